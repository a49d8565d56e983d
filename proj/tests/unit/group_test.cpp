#include <gtest/gtest.h>

#include <map>
#include <set>

#include "sdna/crypto.hpp"
#include "sdna/error.hpp"
#include "sdna/group.hpp"

namespace sdna {
namespace {

using group::test_group;

// Independent oracle: repeated multiplication mod 23.
std::uint64_t slow_pow23(std::uint64_t base, std::uint64_t e) {
  std::uint64_t acc = 1;
  for (std::uint64_t i = 0; i < e; ++i) acc = (acc * base) % 23;
  return acc;
}

std::vector<std::uint64_t> subgroup_values() {
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = 1; v < 23; ++v)
    if (slow_pow23(v, 11) == 1) out.push_back(v);
  return out;
}

TEST(TestGroup, ExpExamples) {
  const auto& g = test_group();
  EXPECT_EQ(g.value(g.exp(g.element(2), g.scalar(1))), 2u);
  EXPECT_EQ(g.value(g.exp(g.element(2), g.scalar(5))), slow_pow23(2, 5));
  EXPECT_EQ(g.value(g.exp(g.element(2), g.scalar(5))), 9u);
  EXPECT_EQ(g.value(g.exp(g.exp(g.element(2), g.scalar(3)), g.scalar(4))), 2u);
}

TEST(TestGroup, SubgroupHasElevenElementsAndGeneratorOrder) {
  const auto& g = test_group();
  auto values = subgroup_values();
  ASSERT_EQ(values.size(), 11u);
  EXPECT_EQ(g.exp(g.generator(), g.scalar(11)), g.identity());
  EXPECT_EQ(g.value(g.identity()), 1u);
  EXPECT_THROW(g.element(5), Error);  // 5 is a non-residue mod 23
}

TEST(TestGroup, ExponentCompositionIsExhaustivelyMultiplicative) {
  const auto& g = test_group();
  for (auto x : subgroup_values()) {
    for (std::uint64_t a = 0; a < 11; ++a) {
      for (std::uint64_t b = 0; b < 11; ++b) {
        auto lhs = g.exp(g.exp(g.element(x), g.scalar(a)), g.scalar(b));
        auto rhs = g.exp(g.element(x), g.scalar((a * b) % 11));
        ASSERT_EQ(lhs, rhs) << x << "^" << a << "^" << b;
        ASSERT_EQ(g.value(lhs), slow_pow23(x, (a * b) % 11));
      }
    }
  }
}

TEST(TestGroup, ScalarInverse) {
  const auto& g = test_group();
  EXPECT_EQ(g.value(g.inverse(g.scalar(3))), 4u);
  for (std::uint64_t a = 1; a < 11; ++a) EXPECT_EQ(g.value(g.mul(g.scalar(a), g.inverse(g.scalar(a)))), 1u);
  EXPECT_THROW(g.inverse(g.scalar(0)), std::domain_error);
}

TEST(TestGroup, HashToGroupIsDeterministicAndNeverIdentity) {
  const auto& g = test_group();
  Rng rng(7);
  std::set<std::uint64_t> reached;
  for (int i = 0; i < 1000; ++i) {
    Bytes msg = rng.bytes(1 + rng.uniform(40));
    auto h1 = g.hash_to_group(msg);
    auto h2 = g.hash_to_group(msg);
    ASSERT_EQ(h1, h2);
    ASSERT_NE(h1, g.identity());
    reached.insert(g.value(h1));
  }
  // Only ten non-identity elements exist, so collisions are expected here;
  // the scan checks that every one of them is reachable.
  EXPECT_EQ(reached.size(), 10u);
}

TEST(TestGroup, HashToGroupRemapsZeroExponentToGenerator) {
  const auto& g = test_group();
  // Oracle: digest as a big-endian integer mod 11, by long division.
  auto digest_mod_11 = [](const Bytes& msg) {
    auto d = crypto::sha256(msg);
    unsigned rem = 0;
    for (auto byte : d) rem = (rem * 256 + byte) % 11;
    return rem;
  };
  int found = 0;
  for (std::uint32_t i = 0; i < 5000 && found < 3; ++i) {
    Bytes msg = to_bytes("probe-" + std::to_string(i));
    auto e = digest_mod_11(msg);
    auto h = g.hash_to_group(msg);
    if (e == 0) {
      EXPECT_EQ(h, g.generator());
      ++found;
    } else {
      EXPECT_EQ(g.value(h), slow_pow23(2, e));
    }
  }
  EXPECT_EQ(found, 3);
}

TEST(ProdGroup, HashToGroupHasNoCollisionsOnDistinctInputs) {
  const auto& g = group::prod_group();
  Rng rng(11);
  std::set<Bytes> seen_msgs;
  std::set<group::GroupElement> seen;
  while (seen_msgs.size() < 2000) {
    Bytes msg = rng.bytes(16);
    if (!seen_msgs.insert(msg).second) continue;
    auto h = g.hash_to_group(msg);
    ASSERT_NE(h, g.identity());
    ASSERT_TRUE(seen.insert(h).second);
  }
}

TEST(ProdGroup, ExponentLawsAndEncodings) {
  const auto& g = group::prod_group();
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto x = g.hash_to_group(rng.bytes(8));
    auto a = g.random_scalar(rng);
    auto b = g.random_scalar(rng);
    EXPECT_EQ(g.exp(g.exp(x, a), b), g.exp(x, g.mul(a, b)));
    EXPECT_EQ(g.mul(g.exp(x, a), g.exp(x, b)), g.exp(x, g.add(a, b)));
    EXPECT_EQ(g.decode_element(x.bytes()), x);
    EXPECT_EQ(g.decode_scalar(a.bytes()), a);
  }
  auto x = g.hash_to_group(to_bytes("x"));
  EXPECT_EQ(g.exp(x, g.scalar(0)), g.identity());
  EXPECT_EQ(g.exp(x, g.scalar(1)), x);
  Bytes not_reduced(32, 0xff);
  EXPECT_THROW(g.decode_scalar(not_reduced), Error);
}

TEST(Signatures, RoundTripTamperAndWrongKey) {
  Rng rng(1);
  auto sk1 = crypto::SigningKey::generate(rng);
  auto sk2 = crypto::SigningKey::generate(rng);
  Bytes m = to_bytes("message");
  auto sig = sk1.sign(m);
  EXPECT_TRUE(crypto::verify(sk1.verify_key(), m, sig));
  Bytes tampered = m;
  tampered.push_back(0);
  EXPECT_FALSE(crypto::verify(sk1.verify_key(), tampered, sig));
  EXPECT_FALSE(crypto::verify(sk2.verify_key(), m, sig));
  EXPECT_FALSE(crypto::verify(sk1.verify_key(), m, Bytes(10, 0)));
}

TEST(Signatures, NegativeMatrixFiveKeysFiveMessages) {
  Rng rng(2);
  std::vector<crypto::SigningKey> keys;
  for (int i = 0; i < 5; ++i) keys.push_back(crypto::SigningKey::generate(rng));
  std::vector<Bytes> msgs;
  for (int i = 0; i < 5; ++i) msgs.push_back(rng.bytes(24));
  for (std::size_t signer = 0; signer < 5; ++signer) {
    for (std::size_t m = 0; m < 5; ++m) {
      auto sig = keys[signer].sign(msgs[m]);
      for (std::size_t verifier = 0; verifier < 5; ++verifier)
        for (std::size_t m2 = 0; m2 < 5; ++m2)
          EXPECT_EQ(crypto::verify(keys[verifier].verify_key(), msgs[m2], sig), verifier == signer && m2 == m);
    }
  }
}

TEST(Aead, RoundTripAndSequenceBinding) {
  Rng rng(4);
  auto key = crypto::SymmetricKey::from_bytes(rng.bytes(32));
  Bytes p = to_bytes("plaintext");
  auto rec = crypto::aead_seal(key, crypto::Direction::ClientToServer, 0, p);
  EXPECT_EQ(crypto::aead_open(key, 0, rec), p);
  try {
    crypto::aead_open(key, 1, rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AuthenticationFailure);
  }
  auto other = crypto::SymmetricKey::from_bytes(rng.bytes(32));
  EXPECT_THROW(crypto::aead_open(other, 0, rec), Error);
}

TEST(Aead, RejectsEverySingleByteMutationOfTheWireRecord) {
  Rng rng(5);
  auto key = crypto::SymmetricKey::from_bytes(rng.bytes(32));
  auto wire = crypto::aead_seal(key, crypto::Direction::ServerToClient, 3, to_bytes("hello records")).encode();
  for (std::size_t i = 0; i < wire.size(); ++i) {
    for (std::uint8_t flip : {0x01, 0x80}) {
      Bytes mutated = wire;
      mutated[i] ^= flip;
      bool rejected = false;
      try {
        crypto::aead_open(key, 3, crypto::Record::decode(mutated));
      } catch (const Error&) {
        rejected = true;
      }
      EXPECT_TRUE(rejected) << "byte " << i;
    }
  }
}

TEST(Aead, SameKeySamePositionRecordsAreInterchangeable) {
  // The latent weakness: with equal keys and equal seq, a record from one
  // session opens in another.
  Rng rng(6);
  auto key = crypto::SymmetricKey::from_bytes(rng.bytes(32));
  auto a = crypto::aead_seal(key, crypto::Direction::ServerToClient, 0, to_bytes("verdict A"));
  auto b = crypto::aead_seal(key, crypto::Direction::ServerToClient, 0, to_bytes("verdict B"));
  EXPECT_EQ(crypto::aead_open(key, 0, b), to_bytes("verdict B"));
  EXPECT_EQ(crypto::aead_open(key, 0, a), to_bytes("verdict A"));
}

}  // namespace
}  // namespace sdna

#include <gtest/gtest.h>

#include <limits>

#include "../support/pki_fixtures.hpp"
#include "sdna/pki.hpp"

namespace sdna::pki {
namespace {

using sdna::testing::chain_for;
using sdna::testing::make_hierarchy;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::Malformed;
}

Token synth_token(const sdna::testing::Hierarchy& h, Rng& rng, std::uint64_t mu = 100) {
  auto sk = SigningKey::generate(rng);
  return issue_token(h.leaf.cert, h.leaf.key, {SynthesizerPayload{"synth-1", mu}, sk.verify_key()}, rng);
}

TEST(Pki, RootIsSelfSignedAndValidatesAlone) {
  Rng rng(1);
  auto r = create_root(CertType::Manufacturer, {"F", "f@x"}, rng);
  EXPECT_TRUE(crypto::verify(r.cert.subject_key, r.cert.signed_part(), r.cert.signature));
  EXPECT_TRUE(validate_chain({std::nullopt, {}, {r.cert}}, r.cert, 0, {}));
}

TEST(Pki, RootsFromOneSeedHaveDistinctSigma) {
  Rng rng(2);
  auto a = create_root(CertType::Manufacturer, {"A", ""}, rng);
  auto b = create_root(CertType::Infrastructure, {"B", ""}, rng);
  auto c = create_root(CertType::Exemption, {"C", ""}, rng);
  EXPECT_NE(a.cert.sigma, b.cert.sigma);
  EXPECT_NE(b.cert.sigma, c.cert.sigma);
  EXPECT_NE(a.cert.sigma, c.cert.sigma);
}

TEST(Pki, DepthThreeChainWithTokenValidates) {
  Rng rng(3);
  auto h = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  auto res = validate_chain(chain_for(h, synth_token(h, rng)), h.root.cert, 10, {});
  EXPECT_TRUE(res) << res.describe();
  EXPECT_TRUE(validate_chain(chain_for(h, std::nullopt), h.root.cert, 10, {}));
}

TEST(Pki, IssuanceLevelAndTypeRules) {
  Rng rng(4);
  auto h = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  auto k = SigningKey::generate(rng);
  EXPECT_EQ(code_of([&] {
              issue_certificate(h.leaf.cert, h.leaf.key,
                                {{"x", ""}, k.verify_key(), CertType::Manufacturer, Level::Leaf}, rng);
            }),
            Errc::LevelViolation);
  EXPECT_EQ(code_of([&] {
              issue_certificate(h.root.cert, h.root.key, {{"x", ""}, k.verify_key(), CertType::Manufacturer, Level::Leaf},
                                rng);
            }),
            Errc::LevelViolation);
  auto ex = create_root(CertType::Exemption, {"E", ""}, rng);
  EXPECT_EQ(code_of([&] {
              issue_certificate(ex.cert, ex.key, {{"x", ""}, k.verify_key(), CertType::Manufacturer, Level::Intermediate},
                                rng);
            }),
            Errc::TypeMismatch);
}

TEST(Pki, TokenIssuanceRules) {
  Rng rng(5);
  auto m = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  auto infra = make_hierarchy(CertType::Infrastructure, "infra", rng);
  auto ex = make_hierarchy(CertType::Exemption, "ex", rng);
  auto k = SigningKey::generate(rng).verify_key();

  const auto max = std::numeric_limits<std::uint64_t>::max();
  auto t = synth_token(m, rng, max);
  EXPECT_EQ(Token::decode(t.encode()).synthesizer().rate_limit, max);

  auto db = issue_token(infra.leaf.cert, infra.leaf.key, {DatabasePayload{}, k}, rng);
  EXPECT_EQ(db.type, TokenType::DatabaseInfra);
  EXPECT_EQ(Token::decode(db.encode()), db);

  auto elt = issue_token(ex.leaf.cert, ex.leaf.key, {ExemptionPayload{{to_bytes("ACGT")}, "yubikey-7", std::nullopt}, k},
                         rng);
  EXPECT_EQ(elt.exemption().device_id, "yubikey-7");

  EXPECT_EQ(code_of([&] { issue_token(infra.leaf.cert, infra.leaf.key, {SynthesizerPayload{"s", 1}, k}, rng); }),
            Errc::TypeMismatch);
  EXPECT_EQ(code_of([&] { issue_token(m.intermediate.cert, m.intermediate.key, {SynthesizerPayload{"s", 1}, k}, rng); }),
            Errc::LevelViolation);
}

struct SubtokenFixture {
  sdna::testing::Hierarchy h;
  SigningKey sub_key;
  Token parent;
};

SubtokenFixture make_elt(Rng& rng) {
  auto h = make_hierarchy(CertType::Exemption, "ex", rng);
  auto sub_key = SigningKey::generate(rng);
  std::vector<Bytes> seqs{to_bytes("AAAA"), to_bytes("CCCC"), to_bytes("GGGG"), to_bytes("TTTT")};
  auto parent = issue_token(
      h.leaf.cert, h.leaf.key,
      {ExemptionPayload{seqs, "dev-1", sub_key.verify_key()}, SigningKey::generate(rng).verify_key()}, rng);
  return {h, sub_key, parent};
}

TEST(Pki, SubtokenSubsetRules) {
  Rng rng(6);
  auto f = make_elt(rng);
  const auto& all = f.parent.exemption().sequences;
  auto same = issue_subtoken(f.parent, f.sub_key, all, rng);
  EXPECT_EQ(same.exemption().sequences, all);
  EXPECT_EQ(same.exemption().device_id, "dev-1");
  auto empty = issue_subtoken(f.parent, f.sub_key, {}, rng);
  EXPECT_TRUE(empty.exemption().sequences.empty());
  EXPECT_TRUE(validate_chain({empty, {f.parent}, chain_for(f.h, std::nullopt).path}, f.h.root.cert, 0, {}));

  EXPECT_EQ(code_of([&] { issue_subtoken(f.parent, f.sub_key, {to_bytes("AAAA"), to_bytes("XXXX")}, rng); }),
            Errc::NotASubset);
  EXPECT_EQ(code_of([&] { issue_subtoken(same, f.sub_key, {}, rng); }), Errc::NoSubtokenKey);
  auto other = SigningKey::generate(rng);
  EXPECT_EQ(code_of([&] { issue_subtoken(f.parent, other, {}, rng); }), Errc::NoSubtokenKey);
}

TEST(Pki, SubtokenChainsToDepthThreeStayWithinAncestors) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = make_elt(rng);
    std::vector<Token> lineage{f.parent};
    SigningKey signer = f.sub_key;
    for (int depth = 1; depth <= 3; ++depth) {
      const auto& cur = lineage.back().exemption().sequences;
      std::vector<Bytes> subset;
      for (const auto& s : cur)
        if (rng.uniform(3) != 0) subset.push_back(s);
      auto next = SigningKey::generate(rng);
      lineage.push_back(issue_subtoken(lineage.back(), signer, subset, rng, next.verify_key()));
      signer = next;

      CertChain chain;
      chain.token = lineage.back();
      for (auto it = lineage.rbegin() + 1; it != lineage.rend(); ++it) chain.parents.push_back(*it);
      chain.path = chain_for(f.h, std::nullopt).path;
      auto res = validate_chain(chain, f.h.root.cert, 0, {});
      ASSERT_TRUE(res) << res.describe();
      for (const auto& s : lineage.back().exemption().sequences)
        for (const auto& anc : lineage) {
          const auto& as = anc.exemption().sequences;
          ASSERT_NE(std::find(as.begin(), as.end(), s), as.end());
        }
    }
  }
}

TEST(Pki, ForgedSupersetSubtokenIsRejected) {
  Rng rng(8);
  auto f = make_elt(rng);
  auto sub = issue_subtoken(f.parent, f.sub_key, {to_bytes("AAAA")}, rng);
  auto& p = std::get<ExemptionPayload>(sub.payload);
  p.sequences.push_back(to_bytes("XXXX"));
  sub.signature = f.sub_key.sign(sub.signed_part());
  auto res = validate_chain({sub, {f.parent}, chain_for(f.h, std::nullopt).path}, f.h.root.cert, 0, {});
  EXPECT_FALSE(res);
  EXPECT_EQ(res.code, Errc::NotASubset);
}

TEST(Pki, RevocationAndExpiry) {
  Rng rng(9);
  auto h = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  auto tok = synth_token(h, rng);
  auto chain = chain_for(h, tok);
  RevocationList rl;
  rl.sigmas.insert(tok.sigma);
  auto res = validate_chain(chain, h.root.cert, 0, rl);
  EXPECT_EQ(res.code, Errc::Revoked);
  EXPECT_EQ(res.depth, 0);
  EXPECT_EQ(res.describe(), "Revoked(0)");

  RevocationList by_key;
  by_key.keys.insert(h.intermediate.cert.subject_key);
  res = validate_chain(chain, h.root.cert, 0, by_key);
  EXPECT_EQ(res.code, Errc::Revoked);
  EXPECT_EQ(res.depth, 2);

  auto short_lived = issue_token(h.leaf.cert, h.leaf.key,
                                 {SynthesizerPayload{"s", 5}, SigningKey::generate(rng).verify_key(), {100, 200}}, rng);
  EXPECT_TRUE(validate_chain(chain_for(h, short_lived), h.root.cert, 100, {}));
  EXPECT_TRUE(validate_chain(chain_for(h, short_lived), h.root.cert, 200, {}));
  res = validate_chain(chain_for(h, short_lived), h.root.cert, 201, {});
  EXPECT_EQ(res.code, Errc::Expired);
  EXPECT_EQ(res.depth, 0);
}

TEST(Pki, EveryByteFlipOfAChainIsRejected) {
  Rng rng(10);
  auto h = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  const auto wire = chain_for(h, synth_token(h, rng)).encode();
  std::size_t rejected = 0, total = 0;
  for (std::size_t i = 0; i < wire.size(); ++i) {
    for (std::uint8_t flip : {0x01, 0x80}) {
      Bytes m = wire;
      m[i] ^= flip;
      ++total;
      try {
        auto res = validate_chain(CertChain::decode(m), h.root.cert, 0, {});
        if (!res) {
          ++rejected;
          EXPECT_TRUE(res.code == Errc::BadSignature || res.code == Errc::UntrustedRoot) << res.describe();
        }
      } catch (const Error&) {
        ++rejected;  // undecodable
      }
    }
  }
  EXPECT_EQ(rejected, total);
}

TEST(Pki, CrossHierarchyValidationAlwaysRejects) {
  Rng rng(11);
  auto m = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  auto i = make_hierarchy(CertType::Infrastructure, "infra", rng);
  auto e = make_hierarchy(CertType::Exemption, "ex", rng);
  auto k = SigningKey::generate(rng).verify_key();
  std::vector<std::pair<const sdna::testing::Hierarchy*, CertChain>> fixtures{
      {&m, chain_for(m, synth_token(m, rng))},
      {&i, chain_for(i, issue_token(i.leaf.cert, i.leaf.key, {KeyserverPayload{1}, k}, rng))},
      {&i, chain_for(i, issue_token(i.leaf.cert, i.leaf.key, {DatabasePayload{}, k}, rng))},
      {&e, chain_for(e, issue_token(e.leaf.cert, e.leaf.key, {ExemptionPayload{{}, "d", std::nullopt}, k}, rng))},
  };
  for (const auto& [home, chain] : fixtures) {
    for (const auto* other : {&m, &i, &e}) {
      auto res = validate_chain(chain, other->root.cert, 0, {});
      EXPECT_EQ(static_cast<bool>(res), other == home) << res.describe();
      // Splice the token onto the other hierarchy's path.
      if (other != home) {
        EXPECT_FALSE(validate_chain(chain_for(*other, chain.token), other->root.cert, 0, {}));
      }
    }
  }
}

TEST(Pki, RevocationIsMonotone) {
  Rng rng(12);
  auto h = make_hierarchy(CertType::Manufacturer, "mfr", rng);
  auto chain = chain_for(h, synth_token(h, rng));
  // Candidate entries: every element's sigma and key, plus unrelated ones.
  std::vector<TokenId> sigmas{chain.token->sigma};
  std::vector<VerifyKey> keys{chain.token->subject_key};
  for (const auto& c : chain.path) {
    sigmas.push_back(c.sigma);
    keys.push_back(c.subject_key);
  }
  for (int j = 0; j < 4; ++j) {
    TokenId s{};
    rng.fill(s);
    sigmas.push_back(s);
    keys.push_back(SigningKey::generate(rng).verify_key());
  }
  auto oracle = [&](const RevocationList& rl) {
    if (rl.revoked(chain.token->sigma, chain.token->subject_key)) return false;
    for (const auto& c : chain.path)
      if (rl.revoked(c.sigma, c.subject_key)) return false;
    return true;
  };
  for (int seq = 0; seq < 100; ++seq) {
    RevocationList rl;
    bool was_rejected = false;
    for (int step = 0; step < 6; ++step) {
      if (rng.uniform(2) == 0)
        rl.sigmas.insert(sigmas[rng.uniform(sigmas.size())]);
      else
        rl.keys.insert(keys[rng.uniform(keys.size())]);
      bool accepted = static_cast<bool>(validate_chain(chain, h.root.cert, 0, rl));
      ASSERT_EQ(accepted, oracle(rl));
      if (was_rejected) ASSERT_FALSE(accepted);
      was_rejected = !accepted;
    }
  }
}

TEST(Pki, EncodingRoundTripsAndDump) {
  Rng rng(13);
  auto f = make_elt(rng);
  auto sub = issue_subtoken(f.parent, f.sub_key, {to_bytes("CCCC")}, rng);
  CertChain chain{sub, {f.parent}, chain_for(f.h, std::nullopt).path};
  EXPECT_EQ(CertChain::decode(chain.encode()), chain);
  RevocationList rl;
  rl.sigmas.insert(sub.sigma);
  rl.keys.insert(f.sub_key.verify_key());
  auto back = RevocationList::decode(rl.encode());
  EXPECT_EQ(back.sigmas, rl.sigmas);
  EXPECT_EQ(back.keys, rl.keys);
  auto text = dump(chain);
  EXPECT_NE(text.find("device_id: dev-1"), std::string::npos);
  EXPECT_NE(text.find("exempt_sequence: " + to_hex(to_bytes("CCCC"))), std::string::npos);
  EXPECT_NE(text.find("level: root"), std::string::npos);
}

TEST(Pki, ForcedSigmaCollides) {
  Rng rng(14);
  auto a = make_hierarchy(CertType::Manufacturer, "honest", rng);
  auto b = make_hierarchy(CertType::Manufacturer, "rogue", rng);
  auto honest = synth_token(a, rng);
  auto k = SigningKey::generate(rng).verify_key();
  auto rogue = issue_token(b.leaf.cert, b.leaf.key, {SynthesizerPayload{"r", 100}, k, kAlways, honest.sigma}, rng);
  EXPECT_EQ(rogue.sigma, honest.sigma);
  EXPECT_TRUE(validate_chain(chain_for(b, rogue), b.root.cert, 0, {}));
}

}  // namespace
}  // namespace sdna::pki

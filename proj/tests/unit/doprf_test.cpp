#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>

#include "sdna/doprf.hpp"
#include "sdna/error.hpp"

namespace sdna::doprf {
namespace {

using group::test_group;

// Oracles over plain integers: p = 23, q = 11, g = 2.
std::uint64_t opow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t acc = 1;
  for (std::uint64_t i = 0; i < e; ++i) acc = acc * b % 23;
  return acc;
}

std::uint64_t oinv11(std::uint64_t a) {
  for (std::uint64_t x = 1; x < 11; ++x)
    if (a * x % 11 == 1) return x;
  ADD_FAILURE() << "no inverse for " << a;
  return 0;
}

std::uint64_t opoly(const std::vector<std::uint64_t>& coeffs, std::uint64_t x) {
  std::uint64_t acc = 0;
  std::uint64_t xp = 1;
  for (auto c : coeffs) {
    acc = (acc + c * xp) % 11;
    xp = xp * x % 11;
  }
  return acc;
}

std::uint64_t olagrange(const std::vector<std::uint32_t>& idx, std::size_t a) {
  std::uint64_t num = 1, den = 1;
  for (std::size_t b = 0; b < idx.size(); ++b) {
    if (a == b) continue;
    num = num * idx[b] % 11;
    den = den * ((idx[b] + 11 - idx[a]) % 11) % 11;
  }
  return num * oinv11(den) % 11;
}

void for_each_subset(std::uint32_t n, std::uint32_t t, const std::function<void(std::vector<std::uint32_t>)>& f) {
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + t, true);
  do {
    std::vector<std::uint32_t> s;
    for (std::uint32_t i = 0; i < n; ++i)
      if (mask[i]) s.push_back(i + 1);
    f(s);
  } while (std::prev_permutation(mask.begin(), mask.end()));
}

TEST(Doprf, ShareExampleMatchesPolynomial) {
  const auto& g = test_group();
  std::vector<Scalar> higher{g.scalar(5)};
  auto shares = share_key_with_coefficients(g, g.scalar(7), 3, higher);
  ASSERT_EQ(shares.size(), 3u);
  const std::vector<std::uint64_t> expected{opoly({7, 5}, 1), opoly({7, 5}, 2), opoly({7, 5}, 3)};
  EXPECT_EQ(expected, (std::vector<std::uint64_t>{1, 6, 0}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(shares[i].index, i + 1);
    EXPECT_EQ(g.value(shares[i].value), expected[i]);
  }
}

TEST(Doprf, LagrangeExample) {
  const auto& g = test_group();
  std::vector<std::uint32_t> idx{1, 2};
  auto l = lagrange_at_zero(g, idx);
  EXPECT_EQ(g.value(l[0]), olagrange(idx, 0));
  EXPECT_EQ(g.value(l[1]), olagrange(idx, 1));
  EXPECT_EQ(g.value(l[0]), 2u);
  EXPECT_EQ(g.value(l[1]), 10u);
}

TEST(Doprf, LagrangeMatchesOracleForEverySubset) {
  const auto& g = test_group();
  for (std::uint32_t n = 1; n <= 10; ++n) {
    for (std::uint32_t t = 1; t <= std::min<std::uint32_t>(n, 4); ++t) {
      for_each_subset(n, t, [&](std::vector<std::uint32_t> idx) {
        auto l = lagrange_at_zero(g, idx);
        for (std::size_t a = 0; a < idx.size(); ++a) ASSERT_EQ(g.value(l[a]), olagrange(idx, a));
      });
    }
  }
}

TEST(Doprf, BlindUnblindEvalExamples) {
  const auto& g = test_group();
  BlindingFactor b{g.scalar(3)};
  EXPECT_EQ(g.value(blind(g, g.element(4), b)), opow(4, 3));
  EXPECT_EQ(g.value(blind(g, g.element(4), b)), 18u);
  EXPECT_EQ(g.value(unblind(g, g.element(18), b)), opow(18, oinv11(3)));
  EXPECT_EQ(g.value(unblind(g, g.element(18), b)), 4u);
  EXPECT_EQ(g.value(eval_share(g, {2, g.scalar(6)}, g.element(2))), 18u);
}

TEST(Doprf, CombineExamples) {
  const auto& g = test_group();
  std::vector<PartialEvaluation> p12{{1, g.element(2)}, {2, g.element(18)}};
  EXPECT_EQ(g.value(combine(g, p12, 2)), opow(2, 7));
  EXPECT_EQ(g.value(combine(g, p12, 2)), 13u);
  // Shares of f = 7 + 5x at indices 2 and 3 applied to x = 2.
  std::vector<PartialEvaluation> p23{{2, g.element(opow(2, 6))}, {3, g.element(opow(2, 0))}};
  EXPECT_EQ(g.value(combine(g, p23, 2)), 13u);
}

TEST(Doprf, CombineRejectsWrongCountsAndDuplicates) {
  const auto& g = test_group();
  std::vector<PartialEvaluation> one{{1, g.element(2)}};
  try {
    combine(g, one, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongResponseCount);
  }
  std::vector<PartialEvaluation> three{{1, g.element(2)}, {2, g.element(4)}, {3, g.element(8)}};
  EXPECT_THROW(combine(g, three, 2), Error);
  std::vector<PartialEvaluation> dup{{1, g.element(2)}, {1, g.element(4)}};
  try {
    combine(g, dup, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateIndex);
  }
}

TEST(Doprf, ThresholdValidation) {
  const auto& g = test_group();
  Rng rng(1);
  auto code_of = [&](std::uint32_t n, std::uint32_t t) {
    try {
      share_key(g, g.scalar(1), n, t, rng);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Malformed;
  };
  EXPECT_EQ(code_of(3, 0), Errc::InvalidThreshold);
  EXPECT_EQ(code_of(3, 4), Errc::InvalidThreshold);
  EXPECT_EQ(code_of(11, 2), Errc::InvalidThreshold);  // n must stay below q
  EXPECT_NO_THROW(share_key(g, g.scalar(1), 10, 10, rng));
}

TEST(Doprf, UnblindRejectsZeroBlind) {
  const auto& g = test_group();
  try {
    unblind(g, g.element(4), {g.scalar(0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonInvertibleBlind);
  }
}

// The distributed pipeline equals H(s)^k for every t-subset of servers, and
// the integer oracle agrees.
void check_pipeline(std::uint32_t t, std::uint32_t n, std::uint64_t seed, int sequences) {
  const auto& g = test_group();
  Rng rng(seed);
  for (int round = 0; round < sequences; ++round) {
    std::vector<std::uint64_t> coeffs;
    for (std::uint32_t i = 0; i < t; ++i) coeffs.push_back(rng.uniform(11));
    std::vector<Scalar> higher;
    for (std::uint32_t i = 1; i < t; ++i) higher.push_back(g.scalar(coeffs[i]));
    auto shares = share_key_with_coefficients(g, g.scalar(coeffs[0]), n, higher);
    Bytes s = rng.bytes(8);
    auto h = g.hash_to_group(s);
    auto b = fresh_blind(g, rng);
    auto x = blind(g, h, b);
    const auto expected = opow(g.value(h), coeffs[0]);
    ASSERT_EQ(g.value(doprf_direct(g, s, g.scalar(coeffs[0]))), expected);
    for_each_subset(n, t, [&](std::vector<std::uint32_t> idx) {
      std::vector<PartialEvaluation> partials;
      for (auto i : idx) {
        ASSERT_EQ(g.value(shares[i - 1].value), opoly(coeffs, i));
        partials.push_back({i, eval_share(g, shares[i - 1], x)});
      }
      ASSERT_EQ(g.value(unblind(g, combine(g, partials, t), b)), expected) << "round " << round;
    });
  }
}

TEST(Doprf, PipelineEqualsDirectT1N1) { check_pipeline(1, 1, 100, 120); }
TEST(Doprf, PipelineEqualsDirectT2N3) { check_pipeline(2, 3, 101, 120); }
TEST(Doprf, PipelineEqualsDirectT3N5) { check_pipeline(3, 5, 102, 120); }

TEST(Doprf, PipelineOnProdBackend) {
  const auto& g = group::prod_group();
  Rng rng(9);
  for (int round = 0; round < 10; ++round) {
    auto k = g.random_scalar(rng);
    auto shares = share_key(g, k, 5, 3, rng);
    Bytes s = rng.bytes(12);
    auto b = fresh_blind(g, rng);
    auto x = blind(g, g.hash_to_group(s), b);
    for_each_subset(5, 3, [&](std::vector<std::uint32_t> idx) {
      std::vector<PartialEvaluation> partials;
      for (auto i : idx) partials.push_back({i, eval_share(g, shares[i - 1], x)});
      ASSERT_EQ(unblind(g, combine(g, partials, 3), b), doprf_direct(g, s, k));
    });
  }
}

TEST(Doprf, BlindedValueIsUniformOverNonIdentityElements) {
  // For any non-identity h, beta -> h^beta over nonzero beta hits every
  // non-identity element exactly once, so x carries no information about h.
  const auto& g = test_group();
  for (std::uint64_t hv = 1; hv < 23; ++hv) {
    if (opow(hv, 11) != 1 || hv == 1) continue;
    std::map<std::uint64_t, int> hits;
    for (std::uint64_t beta = 1; beta < 11; ++beta) hits[g.value(blind(g, g.element(hv), {g.scalar(beta)}))]++;
    ASSERT_EQ(hits.size(), 10u);
    for (auto& [v, c] : hits) {
      EXPECT_NE(v, 1u);
      EXPECT_EQ(c, 1);
    }
  }
}

TEST(Doprf, FewerThanThresholdSharesAreConsistentWithEverySecret) {
  // t = 3, n = 5: for every pair of indices and every observed pair of share
  // values, each candidate secret has exactly one completing polynomial.
  const auto& g = test_group();
  for_each_subset(5, 2, [&](std::vector<std::uint32_t> idx) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::map<std::uint64_t, int>> seen;
    for (std::uint64_t k = 0; k < 11; ++k)
      for (std::uint64_t c1 = 0; c1 < 11; ++c1)
        for (std::uint64_t c2 = 0; c2 < 11; ++c2) {
          std::vector<Scalar> higher{g.scalar(c1), g.scalar(c2)};
          auto shares = share_key_with_coefficients(g, g.scalar(k), 5, higher);
          seen[{g.value(shares[idx[0] - 1].value), g.value(shares[idx[1] - 1].value)}][k]++;
        }
    ASSERT_EQ(seen.size(), 121u);
    for (auto& [obs, per_k] : seen) {
      ASSERT_EQ(per_k.size(), 11u);
      for (auto& [k, c] : per_k) ASSERT_EQ(c, 1);
    }
  });
}

}  // namespace
}  // namespace sdna::doprf

#include "sdna/doprf.hpp"

#include <set>
#include <stdexcept>

#include "sdna/error.hpp"

namespace sdna::doprf {

namespace {

void check_threshold(const Group& g, std::uint32_t n, std::uint32_t t) {
  if (t < 1 || t > n) throw Error(Errc::InvalidThreshold, "need 1 <= t <= n");
  // n < q so that indices 1..n are distinct nonzero scalars. Scalars for
  // indices are built from u64, so compare by wrapping: scalar(n) == 0 or a
  // wrap to an earlier index means n >= q.
  std::set<Scalar> seen;
  for (std::uint32_t i = 1; i <= n; ++i) {
    Scalar s = g.scalar(i);
    if (g.is_zero(s) || !seen.insert(s).second) throw Error(Errc::InvalidThreshold, "n must be smaller than the group order");
  }
}

}  // namespace

std::vector<KeyShare> share_key_with_coefficients(const Group& g, const Scalar& k, std::uint32_t n,
                                                  std::span<const Scalar> higher_coefficients) {
  const auto t = static_cast<std::uint32_t>(higher_coefficients.size() + 1);
  check_threshold(g, n, t);
  std::vector<KeyShare> shares;
  shares.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    // Horner evaluation of f(i) = k + c1 i + ... + c_{t-1} i^{t-1}.
    const Scalar x = g.scalar(i);
    Scalar acc = g.scalar(0);
    for (auto it = higher_coefficients.rbegin(); it != higher_coefficients.rend(); ++it) acc = g.add(g.mul(acc, x), *it);
    acc = g.add(g.mul(acc, x), k);
    shares.push_back({i, acc});
  }
  return shares;
}

std::vector<KeyShare> share_key(const Group& g, const Scalar& k, std::uint32_t n, std::uint32_t t, Rng& rng) {
  check_threshold(g, n, t);
  std::vector<Scalar> coefficients;
  for (std::uint32_t i = 1; i < t; ++i) coefficients.push_back(g.random_scalar(rng));
  return share_key_with_coefficients(g, k, n, coefficients);
}

BlindingFactor fresh_blind(const Group& g, Rng& rng) { return {g.random_nonzero_scalar(rng)}; }

GroupElement blind(const Group& g, const GroupElement& h, const BlindingFactor& b) { return g.exp(h, b.beta); }

GroupElement unblind(const Group& g, const GroupElement& y, const BlindingFactor& b) {
  if (g.is_zero(b.beta)) throw Error(Errc::NonInvertibleBlind);
  return g.exp(y, g.inverse(b.beta));
}

GroupElement eval_share(const Group& g, const KeyShare& share, const GroupElement& x) { return g.exp(x, share.value); }

std::vector<Scalar> lagrange_at_zero(const Group& g, std::span<const std::uint32_t> indices) {
  std::set<Scalar> seen;
  for (auto i : indices) {
    Scalar s = g.scalar(i);
    if (g.is_zero(s)) throw Error(Errc::Malformed, "share index must be nonzero mod q");
    if (!seen.insert(s).second) throw Error(Errc::DuplicateIndex, "index " + std::to_string(i));
  }
  // lambda_i = prod_{j != i} x_j / (x_j - x_i)
  std::vector<Scalar> lambdas;
  lambdas.reserve(indices.size());
  for (std::size_t a = 0; a < indices.size(); ++a) {
    Scalar num = g.scalar(1);
    Scalar den = g.scalar(1);
    const Scalar xi = g.scalar(indices[a]);
    for (std::size_t b = 0; b < indices.size(); ++b) {
      if (a == b) continue;
      const Scalar xj = g.scalar(indices[b]);
      num = g.mul(num, xj);
      den = g.mul(den, g.sub(xj, xi));
    }
    lambdas.push_back(g.mul(num, g.inverse(den)));
  }
  return lambdas;
}

GroupElement combine(const Group& g, std::span<const PartialEvaluation> partials, std::uint32_t t) {
  if (partials.size() != t)
    throw Error(Errc::WrongResponseCount, "expected " + std::to_string(t) + ", got " + std::to_string(partials.size()));
  std::vector<std::uint32_t> indices;
  for (const auto& p : partials) indices.push_back(p.index);
  auto lambdas = lagrange_at_zero(g, indices);
  GroupElement acc = g.identity();
  for (std::size_t i = 0; i < partials.size(); ++i) acc = g.mul(acc, g.exp(partials[i].value, lambdas[i]));
  return acc;
}

GroupElement doprf_direct(const Group& g, ByteView s, const Scalar& k) { return g.exp(g.hash_to_group(s), k); }

}  // namespace sdna::doprf

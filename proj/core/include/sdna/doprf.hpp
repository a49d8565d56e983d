#pragma once

// Distributed oblivious PRF f_k(s) = H(s)^k.
//
// The key k is Shamir-shared among n keyservers with threshold t. A client
// blinds H(s) with a fresh exponent, each of t keyservers raises the blinded
// element to its share, and the client combines the partial results with
// Lagrange coefficients at zero (computed in the exponent) and unblinds.

#include <cstdint>
#include <span>
#include <vector>

#include "sdna/group.hpp"

namespace sdna::doprf {

using group::Group;
using group::GroupElement;
using group::Scalar;

struct BlindingFactor {
  Scalar beta;
};

struct KeyShare {
  std::uint32_t index = 0;  // 1-based evaluation point
  Scalar value;
};

struct PartialEvaluation {
  std::uint32_t index = 0;
  GroupElement value;
};

/// Shares `k` with a random degree t-1 polynomial. Throws InvalidThreshold
/// unless 1 <= t <= n < q.
std::vector<KeyShare> share_key(const Group& g, const Scalar& k, std::uint32_t n, std::uint32_t t, Rng& rng);

/// Same, with caller-chosen coefficients for x^1 .. x^(t-1).
std::vector<KeyShare> share_key_with_coefficients(const Group& g, const Scalar& k, std::uint32_t n,
                                                  std::span<const Scalar> higher_coefficients);

/// Nonzero blind drawn from `rng`.
BlindingFactor fresh_blind(const Group& g, Rng& rng);

GroupElement blind(const Group& g, const GroupElement& h, const BlindingFactor& b);

/// Throws NonInvertibleBlind if the blind is zero.
GroupElement unblind(const Group& g, const GroupElement& y, const BlindingFactor& b);

GroupElement eval_share(const Group& g, const KeyShare& share, const GroupElement& x);

/// Lagrange basis polynomials of the index set evaluated at zero, mod q.
/// Throws DuplicateIndex on repeated indices.
std::vector<Scalar> lagrange_at_zero(const Group& g, std::span<const std::uint32_t> indices);

/// prod y_i^{lambda_i}. Throws WrongResponseCount unless exactly t partials,
/// DuplicateIndex on repeated indices.
GroupElement combine(const Group& g, std::span<const PartialEvaluation> partials, std::uint32_t t);

/// H(s)^k computed in one step; the reference for the distributed path.
GroupElement doprf_direct(const Group& g, ByteView s, const Scalar& k);

}  // namespace sdna::doprf

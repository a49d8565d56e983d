#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "sdna/bytes.hpp"

namespace sdna {

/// Seeded deterministic random source (ChaCha20 keystream per draw).
///
/// Every random value in the simulator (keys, nonces, blinds, cookies) comes
/// from one of these, so equal seeds reproduce equal transcripts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  explicit Rng(const std::array<std::uint8_t, 32>& seed) : seed_(seed) {}

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  /// Uniform in [0, bound). bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);

  /// Independent stream keyed by `label`; does not advance this one.
  Rng derive(std::string_view label) const;

 private:
  std::array<std::uint8_t, 32> seed_{};
  std::uint64_t counter_ = 0;
};

}  // namespace sdna

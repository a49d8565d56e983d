#include "sdna/rng.hpp"

#include <sodium.h>

#include <stdexcept>

#include "sdna/crypto.hpp"

namespace sdna {

namespace {
std::array<std::uint8_t, 32> sha256_of(ByteView in) {
  std::array<std::uint8_t, 32> out{};
  crypto_hash_sha256(out.data(), in.data(), in.size());
  return out;
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
  Bytes material = to_bytes("sdna-rng-seed");
  put_u64_be(material, seed);
  seed_ = sha256_of(material);
}

void Rng::fill(std::span<std::uint8_t> out) {
  crypto::ensure_sodium();
  Bytes material(seed_.begin(), seed_.end());
  put_u64_be(material, counter_++);
  auto sub = sha256_of(material);
  randombytes_buf_deterministic(out.data(), out.size(), sub.data());
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  return get_u64_be(b);
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::uniform bound must be nonzero");
  // Rejection sampling keeps the distribution exact.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

Rng Rng::derive(std::string_view label) const {
  Bytes material(seed_.begin(), seed_.end());
  append(material, to_bytes("derive:"));
  append(material, to_bytes(label));
  return Rng(sha256_of(material));
}

}  // namespace sdna

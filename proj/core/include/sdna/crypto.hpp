#pragma once

// Hashing, signatures and record encryption. Signatures are Ed25519 over the
// SHA-256 digest of the canonical encoding; records are ChaCha20-Poly1305 with
// the sequence number as nonce and the record header as associated data.

#include <array>
#include <compare>
#include <cstdint>

#include "sdna/bytes.hpp"
#include "sdna/rng.hpp"

namespace sdna::crypto {

void ensure_sodium();

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView msg);

/// sha256 over the canonical encoding of `fields`.
Digest hash_fields(const std::vector<Bytes>& fields);

struct VerifyKey {
  std::array<std::uint8_t, 32> bytes{};
  auto operator<=>(const VerifyKey&) const = default;
  /// Throws Malformed unless exactly 32 bytes.
  static VerifyKey from_bytes(ByteView b);
  Bytes to_bytes() const { return Bytes(bytes.begin(), bytes.end()); }
};

class SigningKey {
 public:
  /// Expands a 32-byte seed into the Ed25519 key pair.
  static SigningKey from_seed(ByteView seed);
  static SigningKey generate(Rng& rng) { return from_seed(rng.bytes(32)); }

  const VerifyKey& verify_key() const { return verify_; }
  Bytes seed() const { return Bytes(secret_.begin(), secret_.begin() + 32); }
  Bytes sign(ByteView msg) const;

 private:
  std::array<std::uint8_t, 64> secret_{};
  VerifyKey verify_;
};

inline constexpr std::size_t kSignatureSize = 64;

/// Never throws; false for any malformed input.
bool verify(const VerifyKey& key, ByteView msg, ByteView signature);

struct SymmetricKey {
  std::array<std::uint8_t, 32> bytes{};
  auto operator<=>(const SymmetricKey&) const = default;
  static SymmetricKey from_bytes(ByteView b);
};

enum class Direction : std::uint8_t { ClientToServer = 1, ServerToClient = 2 };

/// Wire layout: 1-byte direction tag, 8-byte big-endian seq, 4-byte
/// big-endian ciphertext length, ciphertext (plaintext + 16-byte tag).
struct Record {
  Direction direction = Direction::ClientToServer;
  std::uint64_t seq = 0;
  Bytes ciphertext;

  static constexpr std::size_t kHeaderSize = 13;

  Bytes encode() const;
  /// Throws Malformed on bad layout.
  static Record decode(ByteView wire);
  /// True if `wire` has the record layout (used by the knowledge engine).
  static bool looks_like_record(ByteView wire);
};

Record aead_seal(const SymmetricKey& key, Direction dir, std::uint64_t seq, ByteView plaintext);

/// Opens with the receiver's expected `seq`. Throws AuthenticationFailure on
/// key, seq, header or ciphertext mismatch.
Bytes aead_open(const SymmetricKey& key, std::uint64_t seq, const Record& record);

}  // namespace sdna::crypto

#include "sdna/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

#include "sdna/encoding.hpp"
#include "sdna/error.hpp"

namespace sdna::crypto {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
    return true;
  }();
  (void)ready;
}

Digest sha256(ByteView msg) {
  Digest out{};
  crypto_hash_sha256(out.data(), msg.data(), msg.size());
  return out;
}

Digest hash_fields(const std::vector<Bytes>& fields) {
  Encoder enc;
  for (const auto& f : fields) enc.bytes(f);
  return sha256(enc.data());
}

VerifyKey VerifyKey::from_bytes(ByteView b) {
  if (b.size() != 32) throw Error(Errc::Malformed, "verify key must be 32 bytes");
  VerifyKey k;
  std::copy(b.begin(), b.end(), k.bytes.begin());
  return k;
}

SigningKey SigningKey::from_seed(ByteView seed) {
  ensure_sodium();
  if (seed.size() != crypto_sign_SEEDBYTES) throw Error(Errc::Malformed, "signing seed must be 32 bytes");
  SigningKey k;
  crypto_sign_seed_keypair(k.verify_.bytes.data(), k.secret_.data(), seed.data());
  return k;
}

Bytes SigningKey::sign(ByteView msg) const {
  auto digest = sha256(msg);
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, digest.data(), digest.size(), secret_.data());
  return sig;
}

bool verify(const VerifyKey& key, ByteView msg, ByteView signature) {
  ensure_sodium();
  if (signature.size() != crypto_sign_BYTES) return false;
  auto digest = sha256(msg);
  return crypto_sign_verify_detached(signature.data(), digest.data(), digest.size(), key.bytes.data()) == 0;
}

SymmetricKey SymmetricKey::from_bytes(ByteView b) {
  if (b.size() != 32) throw Error(Errc::Malformed, "symmetric key must be 32 bytes");
  SymmetricKey k;
  std::copy(b.begin(), b.end(), k.bytes.begin());
  return k;
}

namespace {

Bytes header(Direction dir, std::uint64_t seq, std::size_t ct_len) {
  Bytes h;
  h.push_back(static_cast<std::uint8_t>(dir));
  put_u64_be(h, seq);
  put_u32_be(h, static_cast<std::uint32_t>(ct_len));
  return h;
}

std::array<std::uint8_t, crypto_aead_chacha20poly1305_IETF_NPUBBYTES> nonce_for(std::uint64_t seq) {
  std::array<std::uint8_t, crypto_aead_chacha20poly1305_IETF_NPUBBYTES> n{};
  for (int i = 0; i < 8; ++i) n[4 + i] = static_cast<std::uint8_t>(seq >> (56 - 8 * i));
  return n;
}

}  // namespace

Bytes Record::encode() const {
  Bytes out = header(direction, seq, ciphertext.size());
  append(out, ciphertext);
  return out;
}

bool Record::looks_like_record(ByteView wire) {
  if (wire.size() < kHeaderSize) return false;
  if (wire[0] != 1 && wire[0] != 2) return false;
  return get_u32_be(wire.subspan(9, 4)) == wire.size() - kHeaderSize;
}

Record Record::decode(ByteView wire) {
  if (!looks_like_record(wire)) throw Error(Errc::Malformed, "not a record");
  Record r;
  r.direction = static_cast<Direction>(wire[0]);
  r.seq = get_u64_be(wire.subspan(1, 8));
  r.ciphertext.assign(wire.begin() + kHeaderSize, wire.end());
  return r;
}

Record aead_seal(const SymmetricKey& key, Direction dir, std::uint64_t seq, ByteView plaintext) {
  ensure_sodium();
  Record r;
  r.direction = dir;
  r.seq = seq;
  r.ciphertext.resize(plaintext.size() + crypto_aead_chacha20poly1305_IETF_ABYTES);
  Bytes ad = header(dir, seq, r.ciphertext.size());
  auto nonce = nonce_for(seq);
  unsigned long long ct_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(r.ciphertext.data(), &ct_len, plaintext.data(), plaintext.size(), ad.data(),
                                            ad.size(), nullptr, nonce.data(), key.bytes.data());
  r.ciphertext.resize(ct_len);
  return r;
}

Bytes aead_open(const SymmetricKey& key, std::uint64_t seq, const Record& record) {
  ensure_sodium();
  if (record.ciphertext.size() < crypto_aead_chacha20poly1305_IETF_ABYTES)
    throw Error(Errc::AuthenticationFailure, "record too short");
  Bytes ad = header(record.direction, record.seq, record.ciphertext.size());
  auto nonce = nonce_for(seq);
  Bytes plain(record.ciphertext.size() - crypto_aead_chacha20poly1305_IETF_ABYTES);
  unsigned long long plain_len = 0;
  if (crypto_aead_chacha20poly1305_ietf_decrypt(plain.data(), &plain_len, nullptr, record.ciphertext.data(),
                                                record.ciphertext.size(), ad.data(), ad.size(), nonce.data(),
                                                key.bytes.data()) != 0)
    throw Error(Errc::AuthenticationFailure, "record does not authenticate at seq " + std::to_string(seq));
  plain.resize(plain_len);
  return plain;
}

}  // namespace sdna::crypto

#include "sdna/group.hpp"

#include <sodium.h>

#include <stdexcept>

#include "sdna/crypto.hpp"
#include "sdna/error.hpp"

namespace sdna::group {

std::string_view backend_name(Backend b) { return b == Backend::Test ? "test" : "prod"; }

Backend parse_backend(std::string_view name) {
  if (name == "test") return Backend::Test;
  if (name == "prod") return Backend::Prod;
  throw std::invalid_argument("unknown group backend: " + std::string(name));
}

Scalar Group::random_nonzero_scalar(Rng& rng) const {
  for (;;) {
    Scalar s = random_scalar(rng);
    if (!is_zero(s)) return s;
  }
}

// ---------------------------------------------------------------------------
// SchnorrGroup

namespace {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(a) * b) % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, mod);
    base = mul_mod(base, base, mod);
    exp >>= 1;
  }
  return result;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

Bytes be8(std::uint64_t v) {
  Bytes out;
  put_u64_be(out, v);
  return out;
}

}  // namespace

SchnorrGroup::SchnorrGroup(std::uint64_t p, std::uint64_t q, std::uint64_t g) : p_(p), q_(q), g_(g % p) {
  if (!is_prime(p) || !is_prime(q) || (p - 1) % q != 0)
    throw std::invalid_argument("SchnorrGroup: need primes p, q with q | p-1");
  if (g_ <= 1 || pow_mod(g_, q, p) != 1) throw std::invalid_argument("SchnorrGroup: g must have order q");
}

GroupElement SchnorrGroup::element(std::uint64_t v) const {
  if (v == 0 || v >= p_ || pow_mod(v, q_, p_) != 1) throw Error(Errc::Malformed, "value is not in the subgroup");
  return make_element(be8(v));
}

std::uint64_t SchnorrGroup::value(const GroupElement& e) const { return get_u64_be(e.bytes()); }
std::uint64_t SchnorrGroup::value(const Scalar& s) const { return get_u64_be(s.bytes()); }

GroupElement SchnorrGroup::generator() const { return make_element(be8(g_)); }
GroupElement SchnorrGroup::identity() const { return make_element(be8(1)); }

GroupElement SchnorrGroup::exp(const GroupElement& base, const Scalar& e) const {
  return make_element(be8(pow_mod(value(base), value(e), p_)));
}

GroupElement SchnorrGroup::mul(const GroupElement& a, const GroupElement& b) const {
  return make_element(be8(mul_mod(value(a), value(b), p_)));
}

GroupElement SchnorrGroup::hash_to_group(ByteView msg) const {
  auto digest = crypto::sha256(msg);
  std::uint64_t e = 0;
  for (auto byte : digest) e = (mul_mod(e, 256, q_) + byte) % q_;
  if (e == 0) return generator();
  return make_element(be8(pow_mod(g_, e, p_)));
}

GroupElement SchnorrGroup::decode_element(ByteView enc) const {
  if (enc.size() != 8) throw Error(Errc::Malformed, "element must be 8 bytes");
  return element(get_u64_be(enc));
}

Scalar SchnorrGroup::decode_scalar(ByteView enc) const {
  if (enc.size() != 8) throw Error(Errc::Malformed, "scalar must be 8 bytes");
  std::uint64_t v = get_u64_be(enc);
  if (v >= q_) throw Error(Errc::Malformed, "scalar not reduced");
  return make_scalar(be8(v));
}

Scalar SchnorrGroup::scalar(std::uint64_t v) const { return make_scalar(be8(v % q_)); }

Scalar SchnorrGroup::add(const Scalar& a, const Scalar& b) const {
  return make_scalar(be8((value(a) + value(b)) % q_));
}

Scalar SchnorrGroup::sub(const Scalar& a, const Scalar& b) const {
  return make_scalar(be8((value(a) + q_ - value(b)) % q_));
}

Scalar SchnorrGroup::mul(const Scalar& a, const Scalar& b) const {
  return make_scalar(be8(mul_mod(value(a), value(b), q_)));
}

Scalar SchnorrGroup::inverse(const Scalar& a) const {
  if (value(a) == 0) throw std::domain_error("zero has no inverse");
  return make_scalar(be8(pow_mod(value(a), q_ - 2, q_)));
}

Scalar SchnorrGroup::random_scalar(Rng& rng) const { return make_scalar(be8(rng.uniform(q_))); }

// ---------------------------------------------------------------------------
// ristretto255

namespace {

class RistrettoGroup final : public Group {
 public:
  RistrettoGroup() { crypto::ensure_sodium(); }

  Backend backend() const override { return Backend::Prod; }
  std::size_t element_size() const override { return crypto_core_ristretto255_BYTES; }
  std::size_t scalar_size() const override { return crypto_core_ristretto255_SCALARBYTES; }

  GroupElement generator() const override {
    Bytes one(crypto_core_ristretto255_SCALARBYTES, 0);
    one[0] = 1;
    Bytes out(crypto_core_ristretto255_BYTES);
    crypto_scalarmult_ristretto255_base(out.data(), one.data());
    return make_element(std::move(out));
  }

  GroupElement identity() const override { return make_element(Bytes(crypto_core_ristretto255_BYTES, 0)); }

  GroupElement exp(const GroupElement& base, const Scalar& e) const override {
    Bytes out(crypto_core_ristretto255_BYTES);
    // libsodium refuses to produce the identity; any refusal for a valid
    // input means the result is the identity.
    if (crypto_scalarmult_ristretto255(out.data(), e.bytes().data(), base.bytes().data()) != 0) return identity();
    return make_element(std::move(out));
  }

  GroupElement mul(const GroupElement& a, const GroupElement& b) const override {
    Bytes out(crypto_core_ristretto255_BYTES);
    if (crypto_core_ristretto255_add(out.data(), a.bytes().data(), b.bytes().data()) != 0)
      throw Error(Errc::Malformed, "invalid ristretto255 element");
    return make_element(std::move(out));
  }

  GroupElement hash_to_group(ByteView msg) const override {
    Bytes wide(crypto_hash_sha512_BYTES);
    crypto_hash_sha512(wide.data(), msg.data(), msg.size());
    Bytes out(crypto_core_ristretto255_BYTES);
    crypto_core_ristretto255_from_hash(out.data(), wide.data());
    auto e = make_element(std::move(out));
    if (e == identity()) return generator();
    return e;
  }

  GroupElement decode_element(ByteView enc) const override {
    if (enc.size() != crypto_core_ristretto255_BYTES) throw Error(Errc::Malformed, "element must be 32 bytes");
    Bytes b(enc.begin(), enc.end());
    if (b == identity().bytes()) return identity();
    if (!crypto_core_ristretto255_is_valid_point(b.data())) throw Error(Errc::Malformed, "invalid ristretto255 encoding");
    return make_element(std::move(b));
  }

  Scalar decode_scalar(ByteView enc) const override {
    if (enc.size() != crypto_core_ristretto255_SCALARBYTES) throw Error(Errc::Malformed, "scalar must be 32 bytes");
    Bytes wide(crypto_core_ristretto255_NONREDUCEDSCALARBYTES, 0);
    std::copy(enc.begin(), enc.end(), wide.begin());
    Bytes reduced(crypto_core_ristretto255_SCALARBYTES);
    crypto_core_ristretto255_scalar_reduce(reduced.data(), wide.data());
    if (!std::equal(reduced.begin(), reduced.end(), enc.begin())) throw Error(Errc::Malformed, "scalar not reduced");
    return make_scalar(std::move(reduced));
  }

  Scalar scalar(std::uint64_t v) const override {
    Bytes out(crypto_core_ristretto255_SCALARBYTES, 0);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return make_scalar(std::move(out));
  }

  Scalar add(const Scalar& a, const Scalar& b) const override {
    Bytes out(crypto_core_ristretto255_SCALARBYTES);
    crypto_core_ristretto255_scalar_add(out.data(), a.bytes().data(), b.bytes().data());
    return make_scalar(std::move(out));
  }

  Scalar sub(const Scalar& a, const Scalar& b) const override {
    Bytes out(crypto_core_ristretto255_SCALARBYTES);
    crypto_core_ristretto255_scalar_sub(out.data(), a.bytes().data(), b.bytes().data());
    return make_scalar(std::move(out));
  }

  Scalar mul(const Scalar& a, const Scalar& b) const override {
    Bytes out(crypto_core_ristretto255_SCALARBYTES);
    crypto_core_ristretto255_scalar_mul(out.data(), a.bytes().data(), b.bytes().data());
    return make_scalar(std::move(out));
  }

  Scalar inverse(const Scalar& a) const override {
    Bytes out(crypto_core_ristretto255_SCALARBYTES);
    if (crypto_core_ristretto255_scalar_invert(out.data(), a.bytes().data()) != 0)
      throw std::domain_error("zero has no inverse");
    return make_scalar(std::move(out));
  }

  Scalar random_scalar(Rng& rng) const override {
    Bytes wide = rng.bytes(crypto_core_ristretto255_NONREDUCEDSCALARBYTES);
    Bytes out(crypto_core_ristretto255_SCALARBYTES);
    crypto_core_ristretto255_scalar_reduce(out.data(), wide.data());
    return make_scalar(std::move(out));
  }
};

}  // namespace

const SchnorrGroup& test_group() {
  static const SchnorrGroup g(23, 11, 2);
  return g;
}

const Group& prod_group() {
  static const RistrettoGroup g;
  return g;
}

const Group& group_for(Backend b) { return b == Backend::Test ? static_cast<const Group&>(test_group()) : prod_group(); }

}  // namespace sdna::group

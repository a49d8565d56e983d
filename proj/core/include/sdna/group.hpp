#pragma once

// Prime-order cyclic groups. Protocol code only sees the abstract Group; two
// backends exist:
//
//  * SchnorrGroup: the order-q subgroup of (Z/pZ)* generated by g. The default
//    instance is p = 23, q = 11, g = 2, small enough for brute-force oracles.
//    Elements and scalars encode as 8-byte big-endian integers.
//  * ristretto255: the production backend, via libsodium. Elements are the
//    32-byte canonical ristretto encoding, scalars 32-byte little-endian.

#include <compare>
#include <cstdint>
#include <memory>
#include <string_view>

#include "sdna/bytes.hpp"
#include "sdna/rng.hpp"

namespace sdna::group {

enum class Backend : std::uint8_t { Test, Prod };

std::string_view backend_name(Backend b);
/// Parses "test" / "prod"; throws std::invalid_argument otherwise.
Backend parse_backend(std::string_view name);

/// Canonical encoding of an element; only a Group can mint one.
class GroupElement {
 public:
  GroupElement() = default;
  const Bytes& bytes() const { return enc_; }
  auto operator<=>(const GroupElement&) const = default;

 private:
  friend class Group;
  explicit GroupElement(Bytes enc) : enc_(std::move(enc)) {}
  Bytes enc_;
};

class Scalar {
 public:
  Scalar() = default;
  const Bytes& bytes() const { return enc_; }
  auto operator<=>(const Scalar&) const = default;

 private:
  friend class Group;
  explicit Scalar(Bytes enc) : enc_(std::move(enc)) {}
  Bytes enc_;
};

class Group {
 public:
  virtual ~Group() = default;

  virtual Backend backend() const = 0;
  virtual std::size_t element_size() const = 0;
  virtual std::size_t scalar_size() const = 0;

  virtual GroupElement generator() const = 0;
  virtual GroupElement identity() const = 0;
  /// base^e
  virtual GroupElement exp(const GroupElement& base, const Scalar& e) const = 0;
  virtual GroupElement mul(const GroupElement& a, const GroupElement& b) const = 0;
  /// Deterministic; never returns the identity (an identity result is
  /// remapped to the generator).
  virtual GroupElement hash_to_group(ByteView msg) const = 0;

  /// Throws Error(Malformed) if `enc` is not a canonical element encoding.
  virtual GroupElement decode_element(ByteView enc) const = 0;
  /// Throws Error(Malformed) if `enc` is not a reduced scalar encoding.
  virtual Scalar decode_scalar(ByteView enc) const = 0;

  /// v mod q
  virtual Scalar scalar(std::uint64_t v) const = 0;
  virtual Scalar add(const Scalar& a, const Scalar& b) const = 0;
  virtual Scalar sub(const Scalar& a, const Scalar& b) const = 0;
  virtual Scalar mul(const Scalar& a, const Scalar& b) const = 0;
  /// Throws std::domain_error for zero.
  virtual Scalar inverse(const Scalar& a) const = 0;
  virtual Scalar random_scalar(Rng& rng) const = 0;

  bool is_zero(const Scalar& a) const { return a == scalar(0); }
  Scalar random_nonzero_scalar(Rng& rng) const;

 protected:
  static GroupElement make_element(Bytes enc) { return GroupElement(std::move(enc)); }
  static Scalar make_scalar(Bytes enc) { return Scalar(std::move(enc)); }
};

class SchnorrGroup final : public Group {
 public:
  /// q must be prime, divide p - 1, and g must have order q mod p.
  /// Throws std::invalid_argument otherwise.
  SchnorrGroup(std::uint64_t p, std::uint64_t q, std::uint64_t g);

  std::uint64_t modulus() const { return p_; }
  std::uint64_t order() const { return q_; }
  GroupElement element(std::uint64_t v) const;  // throws Malformed if not in the subgroup
  std::uint64_t value(const GroupElement& e) const;
  std::uint64_t value(const Scalar& s) const;

  Backend backend() const override { return Backend::Test; }
  std::size_t element_size() const override { return 8; }
  std::size_t scalar_size() const override { return 8; }
  GroupElement generator() const override;
  GroupElement identity() const override;
  GroupElement exp(const GroupElement& base, const Scalar& e) const override;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override;
  GroupElement hash_to_group(ByteView msg) const override;
  GroupElement decode_element(ByteView enc) const override;
  Scalar decode_scalar(ByteView enc) const override;
  Scalar scalar(std::uint64_t v) const override;
  Scalar add(const Scalar& a, const Scalar& b) const override;
  Scalar sub(const Scalar& a, const Scalar& b) const override;
  Scalar mul(const Scalar& a, const Scalar& b) const override;
  Scalar inverse(const Scalar& a) const override;
  Scalar random_scalar(Rng& rng) const override;

 private:
  std::uint64_t p_, q_, g_;
};

/// p = 23, q = 11, g = 2.
const SchnorrGroup& test_group();
const Group& prod_group();
const Group& group_for(Backend b);

}  // namespace sdna::group

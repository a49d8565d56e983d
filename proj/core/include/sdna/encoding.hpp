#pragma once

// Canonical encoding used for everything that is signed, hashed or sent.
//
// A structure is the concatenation of its fields in a fixed order, each field
// prefixed by its length as a 4-byte big-endian integer. Nested structures are
// embedded as a single field holding their own encoding. Integers are written
// as fixed-width big-endian fields, so every value has exactly one encoding and
// a decoder that consumes all input rejects anything else.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sdna/bytes.hpp"

namespace sdna {

class Encoder {
 public:
  Encoder& bytes(ByteView field);
  Encoder& str(std::string_view field) { return bytes(ByteView(reinterpret_cast<const std::uint8_t*>(field.data()), field.size())); }
  Encoder& u8(std::uint8_t v);
  Encoder& u32(std::uint32_t v);
  Encoder& u64(std::uint64_t v);
  Encoder& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
  /// A list is one field holding the encoding of its elements.
  Encoder& list(const std::vector<Bytes>& items);

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class Decoder {
 public:
  explicit Decoder(ByteView in) : in_(in) {}

  ByteView bytes();
  Bytes owned() {
    auto b = bytes();
    return Bytes(b.begin(), b.end());
  }
  std::string str() { return to_string(bytes()); }
  /// Field that must have exactly `n` bytes.
  Bytes fixed(std::size_t n);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::vector<Bytes> list();

  bool done() const { return pos_ == in_.size(); }
  /// Throws Malformed unless every input byte was consumed.
  void finish() const;

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

/// Splits `in` into its top-level fields, or returns false if it is not a
/// well-formed field sequence.
bool try_split_fields(ByteView in, std::vector<Bytes>& fields);

}  // namespace sdna

#include "sdna/encoding.hpp"

#include <limits>

#include "sdna/error.hpp"

namespace sdna {

Encoder& Encoder::bytes(ByteView field) {
  if (field.size() > std::numeric_limits<std::uint32_t>::max()) throw Error(Errc::Malformed, "field too long");
  put_u32_be(out_, static_cast<std::uint32_t>(field.size()));
  append(out_, field);
  return *this;
}

Encoder& Encoder::u8(std::uint8_t v) {
  const std::uint8_t b[1] = {v};
  return bytes(b);
}

Encoder& Encoder::u32(std::uint32_t v) {
  Bytes b;
  put_u32_be(b, v);
  return bytes(b);
}

Encoder& Encoder::u64(std::uint64_t v) {
  Bytes b;
  put_u64_be(b, v);
  return bytes(b);
}

Encoder& Encoder::list(const std::vector<Bytes>& items) {
  Encoder inner;
  for (const auto& item : items) inner.bytes(item);
  return bytes(inner.data());
}

ByteView Decoder::bytes() {
  if (in_.size() - pos_ < 4) throw Error(Errc::Malformed, "truncated length prefix");
  std::uint32_t len = get_u32_be(in_.subspan(pos_, 4));
  pos_ += 4;
  if (in_.size() - pos_ < len) throw Error(Errc::Malformed, "truncated field");
  auto field = in_.subspan(pos_, len);
  pos_ += len;
  return field;
}

Bytes Decoder::fixed(std::size_t n) {
  auto b = bytes();
  if (b.size() != n) throw Error(Errc::Malformed, "fixed-width field has wrong size");
  return Bytes(b.begin(), b.end());
}

std::uint8_t Decoder::u8() { return fixed(1)[0]; }

std::uint32_t Decoder::u32() { return get_u32_be(fixed(4)); }

std::uint64_t Decoder::u64() { return get_u64_be(fixed(8)); }

std::vector<Bytes> Decoder::list() {
  Decoder inner(bytes());
  std::vector<Bytes> items;
  while (!inner.done()) items.push_back(inner.owned());
  return items;
}

void Decoder::finish() const {
  if (!done()) throw Error(Errc::Malformed, "trailing bytes");
}

bool try_split_fields(ByteView in, std::vector<Bytes>& fields) {
  fields.clear();
  std::size_t pos = 0;
  while (pos < in.size()) {
    if (in.size() - pos < 4) return false;
    std::uint32_t len = get_u32_be(in.subspan(pos, 4));
    pos += 4;
    if (in.size() - pos < len) return false;
    fields.emplace_back(in.begin() + static_cast<std::ptrdiff_t>(pos), in.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return true;
}

}  // namespace sdna

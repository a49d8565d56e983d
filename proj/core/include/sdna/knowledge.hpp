#pragma once

// What a network adversary can compute from the bytes it has seen plus the
// keys of any roles it has corrupted.
//
// Terms are typed byte strings. The closure applies, until nothing new
// appears:
//   split    a canonical field sequence, a handshake or alert frame, or the
//            32-byte-prefixed SCEP hello into its parts
//   open     a record under any known write key
//   element  read a byte string as a group element when it decodes as one
//   exp      raise an observed element to a known scalar or its inverse
//            (one level; results are not exponentiated again)
//   dh-keys  derive write keys from an exp result and the nonces of the
//            handshake it was seen in (production group only; the channel
//            always runs over ristretto255)
// Every known term carries the rule and premises that produced it, and
// verify() replays that derivation.
//
// Splitting is limited to encodings this code can parse; an unparsed
// concatenation stays opaque. A term outside the closure is therefore only
// "not derived by these rules".

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdna/channel.hpp"
#include "sdna/group.hpp"

namespace sdna::knowledge {

enum class Kind : std::uint8_t { Data, Element, Scalar, SymKey };
std::string_view kind_name(Kind k);

struct TermKey {
  Kind kind = Kind::Data;
  Bytes bytes;
  auto operator<=>(const TermKey&) const = default;
};

struct Derivation {
  std::string rule;  // observed, given, split, open, element, exp, exp-inverse, dh-keys
  std::vector<std::size_t> premises;
  std::string note;
};

struct Term {
  TermKey key;
  Derivation how;
};

class Knowledge {
 public:
  explicit Knowledge(const group::Group& g) : g_(&g) {}

  /// Bytes seen on link `context`.
  void observe(ByteView wire, const std::string& context);
  /// Initial knowledge from a corrupted role.
  void give(Kind kind, ByteView bytes, const std::string& note);
  void give_keys(const channel::SessionKeys& keys, const std::string& note);

  /// Runs the rules to a fixpoint.
  void close();

  bool knows(Kind kind, ByteView bytes) const;
  std::optional<std::size_t> find(Kind kind, ByteView bytes) const;
  const std::vector<Term>& terms() const { return terms_; }
  /// Replays the derivation of term `index` and everything under it.
  bool verify(std::size_t index) const;
  /// Indented derivation tree for evidence output.
  std::string explain(std::size_t index) const;

 private:
  std::size_t add(Kind kind, Bytes bytes, Derivation how);
  void expand_data(std::size_t i);
  void on_symkey(std::size_t i);
  void on_element(std::size_t i);
  void on_scalar(std::size_t i);
  void try_open(std::size_t record, std::size_t key);
  void try_dh(std::size_t pms);
  bool verify_step(std::size_t index, std::set<std::size_t>& seen) const;

  const group::Group* g_;
  std::vector<Term> terms_;
  std::map<TermKey, std::size_t> index_;
  std::size_t next_ = 0;
  std::vector<std::size_t> records_, keys_, scalars_, shares_;
  std::set<std::pair<std::size_t, std::size_t>> dh_done_;
  std::set<std::size_t> exp_results_;
  // Per link: client and server nonces seen in handshake frames.
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> nonces_;
  std::map<std::size_t, std::string> term_context_;
};

}  // namespace sdna::knowledge

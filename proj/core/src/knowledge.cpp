#include "sdna/knowledge.hpp"

#include <algorithm>
#include <sstream>

#include "sdna/encoding.hpp"

namespace sdna::knowledge {

namespace {

bool split_fields(ByteView b, std::vector<Bytes>& out) {
  out.clear();
  if (!try_split_fields(b, out) || out.empty()) return false;
  // A lone field equal to the input would loop forever.
  return !(out.size() == 1 && out[0].size() == b.size());
}

/// Every part a single split step can produce from `b`.
std::vector<Bytes> parts_of(ByteView b) {
  std::vector<Bytes> parts, fields;
  if (b.empty()) return parts;
  if ((b[0] == channel::kHandshakeTag || b[0] == channel::kAlertTag) && split_fields(b.subspan(1), fields))
    parts.insert(parts.end(), fields.begin(), fields.end());
  if (b[0] == channel::kAlertTag && b.size() > 1 && split_fields(b.subspan(2), fields))
    parts.insert(parts.end(), fields.begin(), fields.end());
  if (split_fields(b, fields)) parts.insert(parts.end(), fields.begin(), fields.end());
  if (b.size() > 32 && split_fields(b.subspan(32), fields)) {
    parts.emplace_back(b.begin(), b.begin() + 32);
    parts.emplace_back(b.begin() + 32, b.end());
  }
  return parts;
}

}  // namespace

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Data: return "data";
    case Kind::Element: return "element";
    case Kind::Scalar: return "scalar";
    case Kind::SymKey: return "symkey";
  }
  return "?";
}

std::size_t Knowledge::add(Kind kind, Bytes bytes, Derivation how) {
  TermKey key{kind, std::move(bytes)};
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const std::size_t i = terms_.size();
  index_.emplace(key, i);
  terms_.push_back(Term{std::move(key), std::move(how)});
  return i;
}

void Knowledge::observe(ByteView wire, const std::string& context) {
  if (wire.empty()) return;
  const auto i = add(Kind::Data, Bytes(wire.begin(), wire.end()), {"observed", {}, context});
  term_context_.try_emplace(i, context);
}

void Knowledge::give(Kind kind, ByteView bytes, const std::string& note) {
  add(kind, Bytes(bytes.begin(), bytes.end()), {"given", {}, note});
}

void Knowledge::give_keys(const channel::SessionKeys& keys, const std::string& note) {
  give(Kind::SymKey, keys.client_write.bytes, note + " client-write");
  give(Kind::SymKey, keys.server_write.bytes, note + " server-write");
}

std::optional<std::size_t> Knowledge::find(Kind kind, ByteView bytes) const {
  auto it = index_.find(TermKey{kind, Bytes(bytes.begin(), bytes.end())});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Knowledge::knows(Kind kind, ByteView bytes) const { return find(kind, bytes).has_value(); }

void Knowledge::expand_data(std::size_t i) {
  const Bytes b = terms_[i].key.bytes;
  for (auto& p : parts_of(b)) add(Kind::Data, std::move(p), {"split", {i}, {}});

  std::vector<Bytes> fields;
  if (!b.empty() && b[0] == channel::kHandshakeTag && split_fields(ByteView(b).subspan(1), fields)) {
    const std::string type = to_string(fields[0]);
    auto ctx = term_context_.find(i);
    const auto field = [&](std::size_t n) { return *find(Kind::Data, fields[n]); };
    auto as_share = [&](std::size_t n) {
      // Channel shares live in ristretto255; with the test DOPRF group no
      // known scalar applies to them.
      if (g_->backend() != group::Backend::Prod) return;
      try {
        const auto e = g_->decode_element(fields[n]);
        const auto j = add(Kind::Element, e.bytes(), {"element", {field(n)}, {}});
        if (std::find(shares_.begin(), shares_.end(), j) == shares_.end()) shares_.push_back(j);
      } catch (const Error&) {
      }
    };
    if (type == "client-hello" && fields.size() == 2 && ctx != term_context_.end())
      nonces_[ctx->second].first.push_back(field(1));
    if (type == "server-hello" && fields.size() == 5) {
      if (ctx != term_context_.end()) nonces_[ctx->second].second.push_back(field(1));
      as_share(3);
    }
    if (type == "client-key-exchange" && fields.size() == 3) as_share(1);
  }

  if (crypto::Record::looks_like_record(b)) {
    records_.push_back(i);
    for (auto k : keys_) try_open(i, k);
  }

  if (b.size() == g_->element_size()) {
    try {
      add(Kind::Element, g_->decode_element(b).bytes(), {"element", {i}, {}});
    } catch (const Error&) {
    }
  }
}

void Knowledge::try_open(std::size_t record, std::size_t key) {
  try {
    const auto rec = crypto::Record::decode(terms_[record].key.bytes);
    auto plain = crypto::aead_open(crypto::SymmetricKey::from_bytes(terms_[key].key.bytes), rec.seq, rec);
    const auto j = add(Kind::Data, std::move(plain), {"open", {record, key}, {}});
    auto ctx = term_context_.find(record);
    if (ctx != term_context_.end()) term_context_.try_emplace(j, ctx->second);
  } catch (const Error&) {
  }
}

void Knowledge::on_symkey(std::size_t i) {
  keys_.push_back(i);
  for (auto r : records_) try_open(r, i);
}

void Knowledge::on_element(std::size_t i) {
  if (exp_results_.contains(i)) return;
  for (auto s : scalars_) {
    const auto x = g_->decode_element(terms_[i].key.bytes);
    const auto e = g_->decode_scalar(terms_[s].key.bytes);
    if (g_->is_zero(e)) continue;
    for (bool inverse : {false, true}) {
      const auto before = terms_.size();
      const auto y = g_->exp(x, inverse ? g_->inverse(e) : e);
      const auto j = add(Kind::Element, y.bytes(), {inverse ? "exp-inverse" : "exp", {i, s}, {}});
      if (j >= before) exp_results_.insert(j);
    }
  }
}

void Knowledge::on_scalar(std::size_t i) {
  scalars_.push_back(i);
  // Elements already processed get this scalar now; later ones pick it up themselves.
  std::vector<std::size_t> elements;
  for (std::size_t j = 0; j < i; ++j)
    if (terms_[j].key.kind == Kind::Element && !exp_results_.contains(j)) elements.push_back(j);
  const auto saved = scalars_;
  scalars_ = {i};
  for (auto j : elements) on_element(j);
  scalars_ = saved;
}

void Knowledge::try_dh(std::size_t pms) {
  const auto p = g_->decode_element(terms_[pms].key.bytes);
  for (const auto& [ctx, lists] : nonces_)
    for (auto rc : lists.first)
      for (auto rs : lists.second) {
        const auto keys = channel::derive_keys(p, terms_[rc].key.bytes, terms_[rs].key.bytes);
        add(Kind::SymKey, Bytes(keys.client_write.bytes.begin(), keys.client_write.bytes.end()),
            {"dh-keys", {pms, rc, rs}, ctx});
        add(Kind::SymKey, Bytes(keys.server_write.bytes.begin(), keys.server_write.bytes.end()),
            {"dh-keys", {pms, rc, rs}, ctx});
      }
}

void Knowledge::close() {
  for (;;) {
    // Terms are processed in creation order, so everything below next_ has
    // already met every key and scalar below next_.
    while (next_ < terms_.size()) {
      const auto i = next_++;
      switch (terms_[i].key.kind) {
        case Kind::Data: expand_data(i); break;
        case Kind::SymKey: on_symkey(i); break;
        case Kind::Element: on_element(i); break;
        case Kind::Scalar: on_scalar(i); break;
      }
    }
    std::size_t nonce_total = 0;
    for (const auto& [ctx, l] : nonces_) nonce_total += l.first.size() * l.second.size();
    for (auto j : exp_results_) {
      const auto base = terms_[j].how.premises.at(0);
      if (std::find(shares_.begin(), shares_.end(), base) == shares_.end()) continue;
      if (dh_done_.insert({j, nonce_total}).second) try_dh(j);
    }
    if (next_ == terms_.size()) break;
  }
}

bool Knowledge::verify(std::size_t index) const {
  std::set<std::size_t> seen;
  return verify_step(index, seen);
}

bool Knowledge::verify_step(std::size_t index, std::set<std::size_t>& seen) const {
  if (index >= terms_.size()) return false;
  if (seen.contains(index)) return true;
  const auto& t = terms_[index];
  for (auto p : t.how.premises) {
    if (p >= index) return false;  // derivations only point backwards
    if (!verify_step(p, seen)) return false;
  }
  const auto& r = t.how.rule;
  const auto prem = [&](std::size_t n) -> const Bytes& { return terms_[t.how.premises.at(n)].key.bytes; };
  bool ok = false;
  try {
    if (r == "observed" || r == "given") {
      ok = t.how.premises.empty();
    } else if (r == "split") {
      const auto parts = parts_of(prem(0));
      ok = t.key.kind == Kind::Data && std::find(parts.begin(), parts.end(), t.key.bytes) != parts.end();
    } else if (r == "open") {
      const auto rec = crypto::Record::decode(prem(0));
      ok = crypto::aead_open(crypto::SymmetricKey::from_bytes(prem(1)), rec.seq, rec) == t.key.bytes;
    } else if (r == "element") {
      ok = t.key.kind == Kind::Element && g_->decode_element(prem(0)).bytes() == t.key.bytes;
    } else if (r == "exp" || r == "exp-inverse") {
      auto e = g_->decode_scalar(prem(1));
      if (r == "exp-inverse") e = g_->inverse(e);
      ok = g_->exp(g_->decode_element(prem(0)), e).bytes() == t.key.bytes;
    } else if (r == "dh-keys") {
      const auto k = channel::derive_keys(g_->decode_element(prem(0)), prem(1), prem(2));
      ok = Bytes(k.client_write.bytes.begin(), k.client_write.bytes.end()) == t.key.bytes ||
           Bytes(k.server_write.bytes.begin(), k.server_write.bytes.end()) == t.key.bytes;
    }
  } catch (const Error&) {
    ok = false;
  }
  if (ok) seen.insert(index);
  return ok;
}

std::string Knowledge::explain(std::size_t index) const {
  std::ostringstream out;
  std::set<std::size_t> shown;
  auto rec = [&](auto& self, std::size_t i, int depth) -> void {
    const auto& t = terms_[i];
    out << std::string(2 * depth, ' ') << '#' << i << ' ' << kind_name(t.key.kind) << ' ' << t.how.rule;
    if (!t.how.note.empty()) out << " [" << t.how.note << ']';
    const auto hex = to_hex(t.key.bytes);
    out << ' ' << (hex.size() > 32 ? hex.substr(0, 32) + "..." : hex) << '\n';
    if (!shown.insert(i).second) return;
    for (auto p : t.how.premises) self(self, p, depth + 1);
  };
  rec(rec, index, 0);
  return out.str();
}

}  // namespace sdna::knowledge

#include "sdna/pki.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sdna/encoding.hpp"

namespace sdna::pki {

std::string_view cert_type_name(CertType t) {
  switch (t) {
    case CertType::Manufacturer: return "manufacturer";
    case CertType::Infrastructure: return "infrastructure";
    case CertType::Exemption: return "exemption";
  }
  return "?";
}

std::string_view level_name(Level l) {
  switch (l) {
    case Level::Root: return "root";
    case Level::Intermediate: return "intermediate";
    case Level::Leaf: return "leaf";
  }
  return "?";
}

std::string_view token_type_name(TokenType t) {
  switch (t) {
    case TokenType::Synthesizer: return "synthesizer";
    case TokenType::KeyserverInfra: return "keyserver";
    case TokenType::DatabaseInfra: return "database";
    case TokenType::Exemption: return "exemption";
  }
  return "?";
}

CertType parse_cert_type(std::string_view s) {
  for (auto t : {CertType::Manufacturer, CertType::Infrastructure, CertType::Exemption})
    if (cert_type_name(t) == s) return t;
  throw std::invalid_argument("unknown certificate type: " + std::string(s));
}

TokenType parse_token_type(std::string_view s) {
  for (auto t : {TokenType::Synthesizer, TokenType::KeyserverInfra, TokenType::DatabaseInfra, TokenType::Exemption})
    if (token_type_name(t) == s) return t;
  throw std::invalid_argument("unknown token type: " + std::string(s));
}

CertType issuing_cert_type(TokenType t) {
  switch (t) {
    case TokenType::Synthesizer: return CertType::Manufacturer;
    case TokenType::KeyserverInfra:
    case TokenType::DatabaseInfra: return CertType::Infrastructure;
    case TokenType::Exemption: return CertType::Exemption;
  }
  throw Error(Errc::Malformed, "token type");
}

TokenType payload_type(const Payload& p) {
  struct V {
    TokenType operator()(const SynthesizerPayload&) const { return TokenType::Synthesizer; }
    TokenType operator()(const KeyserverPayload&) const { return TokenType::KeyserverInfra; }
    TokenType operator()(const DatabasePayload&) const { return TokenType::DatabaseInfra; }
    TokenType operator()(const ExemptionPayload&) const { return TokenType::Exemption; }
  };
  return std::visit(V{}, p);
}

namespace {

// Field helpers shared by certificates and tokens.

Bytes encode_identity(const Identity& id) {
  Encoder e;
  e.str(id.name).str(id.email);
  return std::move(e).take();
}

Identity decode_identity(ByteView in) {
  Decoder d(in);
  Identity id{d.str(), d.str()};
  d.finish();
  return id;
}

Bytes encode_validity(const Validity& v) {
  Encoder e;
  e.i64(v.start).i64(v.end);
  return std::move(e).take();
}

Validity decode_validity(ByteView in) {
  Decoder d(in);
  Validity v{d.i64(), d.i64()};
  d.finish();
  return v;
}

TokenId decode_sigma(Decoder& d) {
  auto b = d.fixed(16);
  TokenId id{};
  std::copy(b.begin(), b.end(), id.begin());
  return id;
}

template <typename E>
E checked_enum(std::uint8_t v, std::uint8_t lo, std::uint8_t hi, const char* what) {
  if (v < lo || v > hi) throw Error(Errc::Malformed, std::string("bad ") + what);
  return static_cast<E>(v);
}

Bytes encode_payload(const Payload& p) {
  Encoder e;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SynthesizerPayload>) {
          e.str(v.synth_id).u64(v.rate_limit);
        } else if constexpr (std::is_same_v<T, KeyserverPayload>) {
          e.u32(v.share_index);
        } else if constexpr (std::is_same_v<T, ExemptionPayload>) {
          e.list(v.sequences).str(v.device_id);
          e.bytes(v.subtoken_key ? v.subtoken_key->to_bytes() : Bytes{});
        }
      },
      p);
  return std::move(e).take();
}

Payload decode_payload(TokenType t, ByteView in) {
  Decoder d(in);
  Payload p;
  switch (t) {
    case TokenType::Synthesizer: {
      auto id = d.str();
      p = SynthesizerPayload{id, d.u64()};
      break;
    }
    case TokenType::KeyserverInfra: p = KeyserverPayload{d.u32()}; break;
    case TokenType::DatabaseInfra: p = DatabasePayload{}; break;
    case TokenType::Exemption: {
      ExemptionPayload e;
      e.sequences = d.list();
      e.device_id = d.str();
      auto key = d.bytes();
      if (!key.empty()) e.subtoken_key = VerifyKey::from_bytes(key);
      p = e;
      break;
    }
  }
  d.finish();
  return p;
}

TokenId fresh_sigma(Rng& rng) {
  TokenId id{};
  rng.fill(id);
  return id;
}

std::string hex(ByteView b) { return to_hex(b); }

}  // namespace

Bytes Certificate::signed_part() const {
  Encoder e;
  e.bytes(encode_identity(subject))
      .u32(desc.version)
      .u8(static_cast<std::uint8_t>(desc.type))
      .u8(static_cast<std::uint8_t>(desc.level))
      .bytes(sigma)
      .bytes(subject_key.bytes)
      .bytes(encode_identity(issuer))
      .bytes(issuer_key.bytes)
      .bytes(encode_validity(validity));
  return std::move(e).take();
}

Bytes Certificate::encode() const {
  Encoder e;
  e.bytes(signed_part()).bytes(signature);
  return std::move(e).take();
}

Certificate Certificate::decode(ByteView in) {
  Decoder outer(in);
  auto body = outer.bytes();
  Certificate c;
  c.signature = outer.owned();
  outer.finish();
  Decoder d(body);
  c.subject = decode_identity(d.bytes());
  c.desc.version = d.u32();
  c.desc.type = checked_enum<CertType>(d.u8(), 1, 3, "certificate type");
  c.desc.level = checked_enum<Level>(d.u8(), 1, 3, "level");
  c.sigma = decode_sigma(d);
  c.subject_key = VerifyKey::from_bytes(d.bytes());
  c.issuer = decode_identity(d.bytes());
  c.issuer_key = VerifyKey::from_bytes(d.bytes());
  c.validity = decode_validity(d.bytes());
  d.finish();
  return c;
}

Bytes Token::signed_part() const {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(type))
      .u32(version)
      .bytes(sigma)
      .bytes(subject_key.bytes)
      .bytes(encode_identity(issuer))
      .bytes(issuer_key.bytes)
      .bytes(encode_validity(validity))
      .bytes(encode_payload(payload));
  return std::move(e).take();
}

Bytes Token::encode() const {
  Encoder e;
  e.bytes(signed_part()).bytes(signature);
  return std::move(e).take();
}

Token Token::decode(ByteView in) {
  Decoder outer(in);
  auto body = outer.bytes();
  Token t;
  t.signature = outer.owned();
  outer.finish();
  Decoder d(body);
  t.type = checked_enum<TokenType>(d.u8(), 1, 4, "token type");
  t.version = d.u32();
  t.sigma = decode_sigma(d);
  t.subject_key = VerifyKey::from_bytes(d.bytes());
  t.issuer = decode_identity(d.bytes());
  t.issuer_key = VerifyKey::from_bytes(d.bytes());
  t.validity = decode_validity(d.bytes());
  t.payload = decode_payload(t.type, d.bytes());
  d.finish();
  return t;
}

const SynthesizerPayload& Token::synthesizer() const {
  if (auto* p = std::get_if<SynthesizerPayload>(&payload)) return *p;
  throw Error(Errc::TypeMismatch, "not a synthesizer token");
}

const KeyserverPayload& Token::keyserver() const {
  if (auto* p = std::get_if<KeyserverPayload>(&payload)) return *p;
  throw Error(Errc::TypeMismatch, "not a keyserver token");
}

const ExemptionPayload& Token::exemption() const {
  if (auto* p = std::get_if<ExemptionPayload>(&payload)) return *p;
  throw Error(Errc::TypeMismatch, "not an exemption token");
}

Bytes CertChain::encode() const {
  Encoder e;
  e.bytes(token ? token->encode() : Bytes{});
  std::vector<Bytes> ps, cs;
  for (const auto& p : parents) ps.push_back(p.encode());
  for (const auto& c : path) cs.push_back(c.encode());
  e.list(ps).list(cs);
  return std::move(e).take();
}

CertChain CertChain::decode(ByteView in) {
  Decoder d(in);
  CertChain c;
  auto tok = d.bytes();
  if (!tok.empty()) c.token = Token::decode(tok);
  for (const auto& p : d.list()) c.parents.push_back(Token::decode(p));
  for (const auto& x : d.list()) c.path.push_back(Certificate::decode(x));
  d.finish();
  return c;
}

Bytes RevocationList::encode() const {
  std::vector<Bytes> s, k;
  for (const auto& x : sigmas) s.emplace_back(x.begin(), x.end());
  for (const auto& x : keys) k.push_back(x.to_bytes());
  Encoder e;
  e.list(s).list(k);
  return std::move(e).take();
}

RevocationList RevocationList::decode(ByteView in) {
  Decoder d(in);
  RevocationList r;
  for (const auto& s : d.list()) {
    if (s.size() != 16) throw Error(Errc::Malformed, "sigma must be 16 bytes");
    TokenId id{};
    std::copy(s.begin(), s.end(), id.begin());
    r.sigmas.insert(id);
  }
  for (const auto& k : d.list()) r.keys.insert(VerifyKey::from_bytes(k));
  d.finish();
  return r;
}

Issued create_root(CertType type, const Identity& who, Rng& rng, Validity validity) {
  auto key = SigningKey::generate(rng);
  Certificate c;
  c.subject = who;
  c.desc = {1, type, Level::Root};
  c.sigma = fresh_sigma(rng);
  c.subject_key = key.verify_key();
  c.issuer = who;
  c.issuer_key = key.verify_key();
  c.validity = validity;
  c.signature = key.sign(c.signed_part());
  return {c, key};
}

Certificate issue_certificate(const Certificate& issuer, const SigningKey& issuer_key, const CertRequest& req, Rng& rng) {
  if (issuer.desc.level == Level::Leaf) throw Error(Errc::LevelViolation, "leaf certificates issue tokens only");
  if (static_cast<int>(req.level) != static_cast<int>(issuer.desc.level) + 1)
    throw Error(Errc::LevelViolation, std::string(level_name(issuer.desc.level)) + " cannot issue " +
                                          std::string(level_name(req.level)));
  if (req.type != issuer.desc.type)
    throw Error(Errc::TypeMismatch, std::string(cert_type_name(issuer.desc.type)) + " issuer, " +
                                        std::string(cert_type_name(req.type)) + " request");
  if (issuer_key.verify_key() != issuer.subject_key) throw Error(Errc::BadSignature, "issuer key does not match");
  Certificate c;
  c.subject = req.subject;
  c.desc = {1, req.type, req.level};
  c.sigma = fresh_sigma(rng);
  c.subject_key = req.subject_key;
  c.issuer = issuer.subject;
  c.issuer_key = issuer.subject_key;
  c.validity = req.validity;
  c.signature = issuer_key.sign(c.signed_part());
  return c;
}

Token issue_token(const Certificate& leaf, const SigningKey& leaf_key, const TokenRequest& req, Rng& rng) {
  if (leaf.desc.level != Level::Leaf) throw Error(Errc::LevelViolation, "tokens are issued by leaf certificates");
  const auto type = payload_type(req.payload);
  if (issuing_cert_type(type) != leaf.desc.type)
    throw Error(Errc::TypeMismatch, std::string(token_type_name(type)) + " token from " +
                                        std::string(cert_type_name(leaf.desc.type)) + " leaf");
  if (leaf_key.verify_key() != leaf.subject_key) throw Error(Errc::BadSignature, "issuer key does not match");
  Token t;
  t.type = type;
  t.sigma = req.forced_sigma ? *req.forced_sigma : fresh_sigma(rng);
  t.subject_key = req.subject_key;
  t.issuer = leaf.subject;
  t.issuer_key = leaf.subject_key;
  t.validity = req.validity;
  t.payload = req.payload;
  t.signature = leaf_key.sign(t.signed_part());
  return t;
}

Token issue_subtoken(const Token& parent, const SigningKey& subtoken_signer, const std::vector<Bytes>& subset, Rng& rng,
                     std::optional<VerifyKey> next_subtoken_key) {
  const auto* pe = std::get_if<ExemptionPayload>(&parent.payload);
  if (!pe || !pe->subtoken_key) throw Error(Errc::NoSubtokenKey, "parent carries no sub-token key");
  if (*pe->subtoken_key != subtoken_signer.verify_key())
    throw Error(Errc::NoSubtokenKey, "signer is not the parent's sub-token key");
  for (const auto& s : subset)
    if (std::find(pe->sequences.begin(), pe->sequences.end(), s) == pe->sequences.end())
      throw Error(Errc::NotASubset, "sequence " + hex(s) + " not in parent");
  Token t;
  t.type = TokenType::Exemption;
  t.sigma = fresh_sigma(rng);
  t.subject_key = parent.subject_key;
  t.issuer = parent.issuer;
  t.issuer_key = subtoken_signer.verify_key();
  t.validity = parent.validity;
  t.payload = ExemptionPayload{subset, pe->device_id, next_subtoken_key};
  t.signature = subtoken_signer.sign(t.signed_part());
  return t;
}

std::string ValidationResult::describe() const {
  if (ok) return "OK";
  std::string s = std::string(errc_name(code)) + "(" + std::to_string(depth) + ")";
  if (!detail.empty()) s += ": " + detail;
  return s;
}

ValidationResult validate_chain(const CertChain& chain, const Certificate& trusted_root, Timestamp now,
                                const RevocationList& revocations) {
  const auto& path = chain.path;
  const int ntok = (chain.token ? 1 : 0) + static_cast<int>(chain.parents.size());
  if (!chain.token && !chain.parents.empty())
    return ValidationResult::fail(Errc::Malformed, 0, "parent tokens without a token");
  if (path.empty()) return ValidationResult::fail(Errc::UntrustedRoot, ntok, "empty path");
  const int root_depth = ntok + static_cast<int>(path.size()) - 1;
  const auto cert_depth = [&](std::size_t i) { return ntok + static_cast<int>(i); };

  // Pinned root, compared by encoding.
  const auto& root = path.back();
  if (root.encode() != trusted_root.encode()) return ValidationResult::fail(Errc::UntrustedRoot, root_depth);

  // Signatures, root down to the token.
  if (root.issuer_key != root.subject_key || !crypto::verify(root.subject_key, root.signed_part(), root.signature))
    return ValidationResult::fail(Errc::BadSignature, root_depth, "root is not self-signed");
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto& child = path[i];
    const auto& parent = path[i + 1];
    if (child.issuer_key != parent.subject_key ||
        !crypto::verify(parent.subject_key, child.signed_part(), child.signature))
      return ValidationResult::fail(Errc::BadSignature, cert_depth(i));
  }
  // tokens[0] is the presented token, tokens.back() the one the leaf signed.
  std::vector<const Token*> tokens;
  if (chain.token) tokens.push_back(&*chain.token);
  for (const auto& p : chain.parents) tokens.push_back(&p);
  for (int i = static_cast<int>(tokens.size()) - 1; i >= 0; --i) {
    const Token& tok = *tokens[i];
    VerifyKey signer;
    if (i == static_cast<int>(tokens.size()) - 1) {
      signer = path.front().subject_key;
    } else {
      const auto* pe = std::get_if<ExemptionPayload>(&tokens[i + 1]->payload);
      if (!pe || !pe->subtoken_key) return ValidationResult::fail(Errc::NoSubtokenKey, i + 1);
      signer = *pe->subtoken_key;
    }
    if (tok.issuer_key != signer || !crypto::verify(signer, tok.signed_part(), tok.signature))
      return ValidationResult::fail(Errc::BadSignature, i);
  }

  // Structure: one hierarchy, levels descend one step at a time.
  const CertType hierarchy = root.desc.type;
  if (root.desc.level != Level::Root) return ValidationResult::fail(Errc::LevelViolation, root_depth);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].desc.type != hierarchy) return ValidationResult::fail(Errc::TypeMismatch, cert_depth(i));
    if (i + 1 < path.size() &&
        static_cast<int>(path[i].desc.level) != static_cast<int>(path[i + 1].desc.level) + 1)
      return ValidationResult::fail(Errc::LevelViolation, cert_depth(i));
  }
  if (!tokens.empty()) {
    if (path.front().desc.level != Level::Leaf)
      return ValidationResult::fail(Errc::LevelViolation, ntok - 1, "token not issued by a leaf");
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
      const Token& tok = *tokens[i];
      if (payload_type(tok.payload) != tok.type || issuing_cert_type(tok.type) != hierarchy)
        return ValidationResult::fail(Errc::TypeMismatch, i);
    }
    // Sub-tokens narrow their parent's list and keep its device.
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      const auto& child = tokens[i]->exemption();
      const auto* parent = std::get_if<ExemptionPayload>(&tokens[i + 1]->payload);
      if (!parent || tokens[i]->type != TokenType::Exemption)
        return ValidationResult::fail(Errc::TypeMismatch, static_cast<int>(i));
      if (child.device_id != parent->device_id)
        return ValidationResult::fail(Errc::TypeMismatch, static_cast<int>(i), "device changed");
      for (const auto& s : child.sequences)
        if (std::find(parent->sequences.begin(), parent->sequences.end(), s) == parent->sequences.end())
          return ValidationResult::fail(Errc::NotASubset, static_cast<int>(i));
    }
  }

  for (int i = 0; i < static_cast<int>(tokens.size()); ++i)
    if (!tokens[i]->validity.contains(now)) return ValidationResult::fail(Errc::Expired, i);
  for (std::size_t i = 0; i < path.size(); ++i)
    if (!path[i].validity.contains(now)) return ValidationResult::fail(Errc::Expired, cert_depth(i));

  for (int i = 0; i < static_cast<int>(tokens.size()); ++i)
    if (revocations.revoked(tokens[i]->sigma, tokens[i]->subject_key)) return ValidationResult::fail(Errc::Revoked, i);
  for (std::size_t i = 0; i < path.size(); ++i)
    if (revocations.revoked(path[i].sigma, path[i].subject_key))
      return ValidationResult::fail(Errc::Revoked, cert_depth(i));
  return ValidationResult::pass();
}

namespace {

void dump_identity(std::ostringstream& os, const char* field, const Identity& id) {
  os << field << ".name: " << id.name << "\n" << field << ".email: " << id.email << "\n";
}

}  // namespace

std::string dump(const Certificate& c) {
  std::ostringstream os;
  os << "kind: certificate\n";
  dump_identity(os, "subject", c.subject);
  os << "version: " << c.desc.version << "\n"
     << "type: " << cert_type_name(c.desc.type) << "\n"
     << "level: " << level_name(c.desc.level) << "\n"
     << "sigma: " << hex(c.sigma) << "\n"
     << "subject_key: " << hex(c.subject_key.bytes) << "\n";
  dump_identity(os, "issuer", c.issuer);
  os << "issuer_key: " << hex(c.issuer_key.bytes) << "\n"
     << "valid_from: " << c.validity.start << "\n"
     << "valid_to: " << c.validity.end << "\n"
     << "signature: " << hex(c.signature) << "\n";
  return os.str();
}

std::string dump(const Token& t) {
  std::ostringstream os;
  os << "kind: token\n"
     << "token_type: " << token_type_name(t.type) << "\n"
     << "version: " << t.version << "\n"
     << "sigma: " << hex(t.sigma) << "\n"
     << "subject_key: " << hex(t.subject_key.bytes) << "\n";
  dump_identity(os, "issuer", t.issuer);
  os << "issuer_key: " << hex(t.issuer_key.bytes) << "\n"
     << "valid_from: " << t.validity.start << "\n"
     << "valid_to: " << t.validity.end << "\n";
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SynthesizerPayload>) {
          os << "synth_id: " << p.synth_id << "\n" << "rate_limit: " << p.rate_limit << "\n";
        } else if constexpr (std::is_same_v<T, KeyserverPayload>) {
          os << "share_index: " << p.share_index << "\n";
        } else if constexpr (std::is_same_v<T, ExemptionPayload>) {
          for (const auto& s : p.sequences) os << "exempt_sequence: " << hex(s) << "\n";
          os << "device_id: " << p.device_id << "\n";
          if (p.subtoken_key) os << "subtoken_key: " << hex(p.subtoken_key->bytes) << "\n";
        }
      },
      t.payload);
  os << "signature: " << hex(t.signature) << "\n";
  return os.str();
}

std::string dump(const CertChain& c) {
  std::string out;
  if (c.token) out += dump(*c.token);
  for (const auto& p : c.parents) out += "\n" + dump(p);
  for (const auto& x : c.path) out += "\n" + dump(x);
  return out;
}

}  // namespace sdna::pki

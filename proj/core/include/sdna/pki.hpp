#pragma once

// SecureDNA's own certificate hierarchies (manufacturer, infrastructure,
// exemption), the tokens issued from their leaves, and chain validation.
//
// A chain travels leaf-first: path[0] is the issuing leaf, path.back() the
// root. An exemption sub-token additionally carries its ancestor tokens,
// nearest parent first. Validation depths count from the token: 0 is the
// token, then each parent token, then path[0], path[1], ...

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sdna/bytes.hpp"
#include "sdna/crypto.hpp"
#include "sdna/error.hpp"
#include "sdna/rng.hpp"

namespace sdna::pki {

using Timestamp = std::int64_t;
using TokenId = std::array<std::uint8_t, 16>;
using crypto::SigningKey;
using crypto::VerifyKey;

enum class CertType : std::uint8_t { Manufacturer = 1, Infrastructure = 2, Exemption = 3 };
enum class Level : std::uint8_t { Root = 1, Intermediate = 2, Leaf = 3 };
enum class TokenType : std::uint8_t { Synthesizer = 1, KeyserverInfra = 2, DatabaseInfra = 3, Exemption = 4 };

std::string_view cert_type_name(CertType t);
std::string_view level_name(Level l);
std::string_view token_type_name(TokenType t);
/// "manufacturer" / "infrastructure" / "exemption"; throws std::invalid_argument.
CertType parse_cert_type(std::string_view s);
/// "synthesizer" / "keyserver" / "database" / "exemption"; throws std::invalid_argument.
TokenType parse_token_type(std::string_view s);

/// The certificate type whose leaves may issue tokens of type `t`.
CertType issuing_cert_type(TokenType t);

struct Identity {
  std::string name;
  std::string email;
  auto operator<=>(const Identity&) const = default;
};

struct CertDescription {
  std::uint32_t version = 1;
  CertType type = CertType::Manufacturer;
  Level level = Level::Root;
  auto operator<=>(const CertDescription&) const = default;
};

/// Closed interval [start, end].
struct Validity {
  Timestamp start = 0;
  Timestamp end = 0;
  bool contains(Timestamp t) const { return start <= t && t <= end; }
  auto operator<=>(const Validity&) const = default;
};

inline constexpr Validity kAlways{0, INT64_MAX};

struct Certificate {
  Identity subject;
  CertDescription desc;
  TokenId sigma{};
  VerifyKey subject_key;
  Identity issuer;
  VerifyKey issuer_key;
  Validity validity;
  Bytes signature;

  /// Canonical encoding of every field except the signature.
  Bytes signed_part() const;
  Bytes encode() const;
  /// Throws Malformed.
  static Certificate decode(ByteView in);
  bool operator==(const Certificate&) const = default;
};

struct SynthesizerPayload {
  std::string synth_id;
  std::uint64_t rate_limit = 0;
  bool operator==(const SynthesizerPayload&) const = default;
};
struct KeyserverPayload {
  std::uint32_t share_index = 0;
  bool operator==(const KeyserverPayload&) const = default;
};
struct DatabasePayload {
  bool operator==(const DatabasePayload&) const = default;
};
struct ExemptionPayload {
  std::vector<Bytes> sequences;
  std::string device_id;
  std::optional<VerifyKey> subtoken_key;
  bool operator==(const ExemptionPayload&) const = default;
};
using Payload = std::variant<SynthesizerPayload, KeyserverPayload, DatabasePayload, ExemptionPayload>;

/// The token type a payload shape belongs to.
TokenType payload_type(const Payload& p);

struct Token {
  TokenType type = TokenType::Synthesizer;
  std::uint32_t version = 1;
  TokenId sigma{};
  VerifyKey subject_key;
  Identity issuer;
  VerifyKey issuer_key;
  Validity validity;
  Payload payload;
  Bytes signature;

  Bytes signed_part() const;
  Bytes encode() const;
  static Token decode(ByteView in);
  bool operator==(const Token&) const = default;

  const SynthesizerPayload& synthesizer() const;
  const KeyserverPayload& keyserver() const;
  const ExemptionPayload& exemption() const;
};

struct CertChain {
  std::optional<Token> token;
  std::vector<Token> parents;
  std::vector<Certificate> path;

  Bytes encode() const;
  static CertChain decode(ByteView in);
  bool operator==(const CertChain&) const = default;
};

struct RevocationList {
  std::set<TokenId> sigmas;
  std::set<VerifyKey> keys;

  bool revoked(const TokenId& sigma, const VerifyKey& key) const { return sigmas.contains(sigma) || keys.contains(key); }
  Bytes encode() const;
  static RevocationList decode(ByteView in);
};

struct Issued {
  Certificate cert;
  SigningKey key;
};

/// Self-signed root with a fresh key pair.
Issued create_root(CertType type, const Identity& who, Rng& rng, Validity validity = kAlways);

struct CertRequest {
  Identity subject;
  VerifyKey subject_key;
  CertType type = CertType::Manufacturer;
  Level level = Level::Intermediate;
  Validity validity = kAlways;
};

/// Throws LevelViolation unless the request is exactly one level below the
/// issuer (leaves never issue certificates), TypeMismatch across hierarchies.
Certificate issue_certificate(const Certificate& issuer, const SigningKey& issuer_key, const CertRequest& req, Rng& rng);

struct TokenRequest {
  Payload payload;
  VerifyKey subject_key;
  Validity validity = kAlways;
  /// Replaces the random σ; models an issuer that picks colliding ids.
  std::optional<TokenId> forced_sigma;
};

/// Throws LevelViolation unless `leaf` is a leaf, TypeMismatch unless the
/// payload's token type belongs to the leaf's hierarchy.
Token issue_token(const Certificate& leaf, const SigningKey& leaf_key, const TokenRequest& req, Rng& rng);

/// Exemption sub-token over `subset`, signed with the parent's sub-token key.
/// Throws NoSubtokenKey if the parent has none or `subtoken_signer` does not
/// match it, NotASubset if `subset` has a sequence the parent lacks.
Token issue_subtoken(const Token& parent, const SigningKey& subtoken_signer, const std::vector<Bytes>& subset, Rng& rng,
                     std::optional<VerifyKey> next_subtoken_key = std::nullopt);

struct ValidationResult {
  bool ok = true;
  Errc code = Errc::Malformed;
  int depth = -1;
  std::string detail;

  explicit operator bool() const { return ok; }
  static ValidationResult pass() { return {}; }
  static ValidationResult fail(Errc c, int depth, std::string detail = {}) { return {false, c, depth, std::move(detail)}; }
  /// "OK" or "Name(depth): detail".
  std::string describe() const;
};

ValidationResult validate_chain(const CertChain& chain, const Certificate& trusted_root, Timestamp now,
                                const RevocationList& revocations);

/// Human-readable dumps, one "field: value" per line.
std::string dump(const Certificate& c);
std::string dump(const Token& t);
std::string dump(const CertChain& c);

}  // namespace sdna::pki

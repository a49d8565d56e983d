#pragma once

// SCEP: token-based mutual authentication run inside an established channel,
// synthesizer S (client) and infrastructure server W (keyserver or database).
//
//   S -> W  hello     r_S || T_S chain [|| "keyserver", target id]
//   W -> S  response  omega, r_W, T_W chain, sig_W
//   S -> W  finish    omega, sig_S
//   W -> S  ack
//
// SCEP:   sig_W over h("server-mutauth", r_S, r_W, T_W)
//         sig_S over h("client-mutauth", r_S, r_W, T_S)
// SCEP+:  both hashes also cover omega, T_S and T_W.
//
// Under SCEP nothing in sig_S names the server it was meant for, which is what
// lets a man in the middle replay it elsewhere.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdna/channel.hpp"
#include "sdna/pki.hpp"

namespace sdna::scep {

using pki::Timestamp;
using pki::TokenId;

enum class Variant : std::uint8_t { Scep, ScepPlus };
std::string_view variant_name(Variant v);
/// "scep" / "scep-plus"; throws std::invalid_argument.
Variant parse_variant(std::string_view s);

enum class State : std::uint8_t { Init, HelloSent, Responded, Finished, Failed };
std::string_view state_name(State s);

inline constexpr std::size_t kNonceSize = 32;
inline constexpr std::size_t kCookieSize = 32;

struct Hello {
  Bytes r_client;
  pki::CertChain chain;
  /// Present when the server is a keyserver: the wire carries the literal
  /// "keyserver" and this id. Not covered by any signature.
  std::optional<std::string> keyserver_target;

  Bytes encode() const;
  static Hello decode(ByteView in);
};

struct Response {
  Bytes cookie;
  Bytes r_server;
  pki::CertChain chain;
  Bytes signature;

  Bytes encode() const;
  static Response decode(ByteView in);
};

struct Finish {
  Bytes cookie;
  Bytes signature;

  Bytes encode() const;
  static Finish decode(ByteView in);
};

Bytes ack_message();

/// The bytes each side signs.
Bytes server_signed_input(Variant v, ByteView r_client, ByteView r_server, ByteView cookie,
                          const pki::Token& client_token, const pki::Token& server_token);
Bytes client_signed_input(Variant v, ByteView r_client, ByteView r_server, ByteView cookie,
                          const pki::Token& client_token, const pki::Token& server_token);

struct Trust {
  pki::Certificate manufacturer_root;
  pki::Certificate infrastructure_root;
  const pki::RevocationList* revocations = nullptr;
};

struct Credentials {
  pki::CertChain chain;  // chain.token is this party's token
  crypto::SigningKey token_key;
};

class ClientSession {
 public:
  ClientSession(Variant v, Credentials creds, Trust trust, Rng& rng);

  Bytes hello(std::optional<std::string> keyserver_target = std::nullopt);
  /// Checks the server's chain (which must be an infrastructure token whose
  /// key is the channel peer's key) and signature, and returns the finish
  /// message. Throws BadServerChain or BadServerSig.
  Bytes on_response(ByteView response, const channel::Session& channel, Timestamp now);
  void on_ack(ByteView ack);

  State state() const { return state_; }
  Variant variant() const { return variant_; }
  const Bytes& r_client() const { return r_client_; }
  const Bytes& r_server() const { return r_server_; }
  const Bytes& cookie() const { return cookie_; }
  const std::optional<pki::Token>& server_token() const { return server_token_; }
  const pki::Token& own_token() const { return *creds_.chain.token; }

 private:
  Variant variant_;
  Credentials creds_;
  Trust trust_;
  Rng* rng_;
  State state_ = State::Init;
  Bytes r_client_, r_server_, cookie_;
  std::optional<pki::Token> server_token_;
};

struct Authenticated {
  TokenId sigma{};
  std::uint64_t rate_limit = 0;
  pki::Token client_token;
};

class ServerSession {
 public:
  ServerSession(Variant v, Credentials creds, Trust trust, Rng rng);

  /// Throws Revoked, or BadClientChain for any other chain failure.
  Bytes on_hello(ByteView hello, Timestamp now);
  /// Throws BadCookie, BadClientSig, ProtocolState.
  const Authenticated& on_finish(ByteView finish);

  State state() const { return state_; }
  const Bytes& cookie() const { return cookie_; }
  const Bytes& r_client() const { return r_client_; }
  const Bytes& r_server() const { return r_server_; }
  const std::optional<Hello>& hello() const { return hello_; }
  const std::optional<Authenticated>& authenticated() const { return auth_; }
  const pki::Token& own_token() const { return *creds_.chain.token; }

 private:
  Variant variant_;
  Credentials creds_;
  Trust trust_;
  Rng rng_;
  State state_ = State::Init;
  Bytes r_client_, r_server_, cookie_;
  std::optional<Hello> hello_;
  std::optional<Authenticated> auth_;
};

inline constexpr Timestamp kRateWindow = 24 * 60 * 60;

/// Per-sigma history of allowed requests. A request is allowed iff the counts
/// recorded after now - 24h plus the request stay within the limit; only
/// allowed requests are recorded.
class RateLimitLedger {
 public:
  enum class Decision : std::uint8_t { Allow, Deny };
  struct Entry {
    Timestamp at = 0;
    std::uint64_t count = 0;
  };

  Decision check(const TokenId& sigma, std::uint64_t requested, Timestamp now, std::uint64_t limit);
  std::uint64_t window_total(const TokenId& sigma, Timestamp now) const;
  const std::vector<Entry>& history(const TokenId& sigma) const;
  const std::map<TokenId, std::vector<Entry>>& all() const { return entries_; }

 private:
  std::map<TokenId, std::vector<Entry>> entries_;
};

}  // namespace sdna::scep

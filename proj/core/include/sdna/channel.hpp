#pragma once

// A TLS-like channel with one-way (server) authentication.
//
// Handshake, client C and server S:
//   C -> S  client-hello(r_C)
//   S -> C  server-hello(r_S, Cert_S, g^e_S, sign_S(r_C, r_S, g^e_S))
//   C -> S  client-key-exchange(g^e_C, C_FIN)
//   S -> C  server-finished(S_FIN)
// PMS = g^(e_C e_S). Each direction has its own write key and its own
// sequence counter starting at zero; records carry the counter in the clear
// and use it as the AEAD nonce. A "resume" frame reopens a cached session
// with the same keys and both counters back at zero, if the server allows it.
//
// Frames: 0x16 handshake, 0x15 alert, otherwise a record (crypto::Record).

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "sdna/crypto.hpp"
#include "sdna/error.hpp"
#include "sdna/group.hpp"

namespace sdna::channel {

using crypto::SigningKey;
using crypto::SymmetricKey;
using crypto::VerifyKey;
using group::Group;
using group::GroupElement;
using group::Scalar;

inline constexpr std::uint8_t kHandshakeTag = 0x16;
inline constexpr std::uint8_t kAlertTag = 0x15;

/// Cert_S: a server name and key signed by the channel CA. Unrelated to the
/// pki hierarchies.
struct TlsIdentity {
  std::string name;
  VerifyKey key;
  Bytes ca_signature;

  Bytes signed_part() const;
  Bytes encode() const;
  static TlsIdentity decode(ByteView in);
  bool operator==(const TlsIdentity&) const = default;
};

TlsIdentity certify(const SigningKey& ca, const std::string& name, const VerifyKey& key);
bool verify_identity(const VerifyKey& ca, const TlsIdentity& id);

struct SessionKeys {
  SymmetricKey client_write;
  SymmetricKey server_write;
  Bytes session_id;
  bool operator==(const SessionKeys&) const = default;
};

/// Write keys from the premaster secret and both randoms.
SessionKeys derive_keys(const GroupElement& pms, ByteView r_client, ByteView r_server);

enum class Side : std::uint8_t { Client, Server };

class Session {
 public:
  Session(Side side, SessionKeys keys, std::optional<TlsIdentity> peer = std::nullopt)
      : side_(side), keys_(std::move(keys)), peer_(std::move(peer)) {}

  /// Seals at send_seq and advances it; returns the wire record.
  Bytes send(ByteView plaintext);
  /// Opens at recv_seq and advances it. Throws AuthenticationFailure or
  /// Malformed; the counter does not move on failure.
  Bytes recv(ByteView wire);

  /// Same keys, counters at zero. Throws ResumptionDisabled unless `enabled`.
  Session resumed(bool enabled) const;

  Side side() const { return side_; }
  const SessionKeys& keys() const { return keys_; }
  std::uint64_t send_seq() const { return send_seq_; }
  std::uint64_t recv_seq() const { return recv_seq_; }
  /// The authenticated server (client side only).
  const std::optional<TlsIdentity>& peer() const { return peer_; }

 private:
  const SymmetricKey& write_key() const;
  const SymmetricKey& read_key() const;

  Side side_;
  SessionKeys keys_;
  std::optional<TlsIdentity> peer_;
  std::uint64_t send_seq_ = 0;
  std::uint64_t recv_seq_ = 0;
};

/// Request/response carrier the client drives the handshake over.
using Transport = std::function<Bytes(Bytes)>;

Bytes alert_frame(Errc code, const std::string& detail);
/// Throws the carried Error if `wire` is an alert frame.
void throw_if_alert(ByteView wire);
bool is_handshake(ByteView wire);

struct ClientConfig {
  VerifyKey trusted_ca;
  std::string server_name;
};

/// Runs the full handshake. Throws BadServerCert, BadKeyExchangeSig,
/// FinishedMismatch, or any alert the server sends.
Session client_handshake(const Group& g, const ClientConfig& cfg, Rng& rng, const Transport& transport);

/// Asks the server to resume `old`. Throws ResumptionDisabled if refused.
Session client_resume(const Session& old, const Transport& transport);

/// Keys of completed sessions, shared by all connections of one server.
struct SessionCache {
  std::map<Bytes, SessionKeys> sessions;
};

struct ServerConfig {
  TlsIdentity identity;
  SigningKey identity_key;
  bool resumption = false;
};

/// Server side of one connection. Handshake frames are answered internally;
/// once established, each inbound record is opened, passed to the
/// application handler, and the handler's reply sealed. Failures come back
/// as alert frames.
class ServerConnection {
 public:
  using AppHandler = std::function<Bytes(Session&, const Bytes&)>;

  ServerConnection(const Group& g, const ServerConfig& cfg, SessionCache& cache, Rng rng)
      : g_(&g), cfg_(&cfg), cache_(&cache), rng_(std::move(rng)) {}

  Bytes handle(ByteView inbound, const AppHandler& app);

  bool established() const { return session_.has_value(); }
  Session& session();

 private:
  Bytes on_handshake(ByteView frame);

  const Group* g_;
  const ServerConfig* cfg_;
  SessionCache* cache_;
  Rng rng_;
  // Handshake state between server-hello and client-key-exchange.
  Bytes r_client_, r_server_, transcript_;
  std::optional<Scalar> e_server_;
  std::optional<Session> session_;
};

/// Finished value over the handshake transcript.
Bytes finished_mac(const GroupElement& pms, ByteView r_client, ByteView r_server, std::string_view label,
                   ByteView transcript);

}  // namespace sdna::channel

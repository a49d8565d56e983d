#pragma once

// The screening roles and the two query protocols.
//
// Basic query (synthesizer S, keyservers K_1..K_t, database H):
//   S: x_i = M(s_i)^beta                    -> each K_j: x_i^{k_j}
//   S: combine, unblind to M(s_i)^k         -> H: membership per sequence
// Exemption query: a second keyserver round hashes the sequences listed in
// the exemption-list token (ELT), and the H request carries the ELT chain,
// the customer's one-time code and those hashes. H checks the chain and asks
// the authentication backend about the code before answering.
//
// Every application message travels inside a channel record as
// envelope(kind, body); servers answer failures with alert frames.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdna/doprf.hpp"
#include "sdna/net.hpp"
#include "sdna/scep.hpp"

namespace sdna::screening {

using group::Group;
using group::GroupElement;
using net::ConnId;
using pki::Timestamp;

inline constexpr std::size_t kDefaultMaxSequenceLength = 30;

Bytes envelope(std::string_view kind, ByteView body);
/// Throws Malformed.
std::pair<std::string, Bytes> open_envelope(ByteView in);

// --- hazard database --------------------------------------------------------

struct HazardRecord {
  Bytes sequence;
  std::string name;
  std::string reason;
};

/// One record per line: hex sequence, name, reason (comma separated; the
/// reason may itself contain commas). Blank lines and '#' comments are skipped.
/// Throws Malformed with the line number.
std::vector<HazardRecord> parse_hazard_file(std::string_view text);

struct HazardInfo {
  std::string name;
  std::string reason;
  bool operator==(const HazardInfo&) const = default;
};

/// Keyed hashes f_k(s) of the hazard list with their annotations. Holds no
/// plaintext sequences.
class HazardDb {
 public:
  bool contains(const GroupElement& e) const { return entries_.contains(e); }
  const HazardInfo* lookup(const GroupElement& e) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<GroupElement, HazardInfo>& entries() const { return entries_; }
  void insert(const GroupElement& e, HazardInfo info) { entries_.emplace(e, std::move(info)); }

  /// Sorted entries, canonical encoding.
  Bytes encode() const;
  static HazardDb decode(const Group& g, ByteView in);

 private:
  std::map<GroupElement, HazardInfo> entries_;
};

HazardDb build_hdb(const Group& g, const std::vector<HazardRecord>& hazards, const group::Scalar& k);

// --- messages ---------------------------------------------------------------

struct EvalRequest {
  Bytes cookie;
  std::vector<GroupElement> blinded;
  Bytes encode() const;
  static EvalRequest decode(const Group& g, ByteView in);
};

struct EvalResponse {
  std::uint32_t index = 0;
  std::vector<GroupElement> evaluations;
  Bytes encode() const;
  static EvalResponse decode(const Group& g, ByteView in);
};

struct ExemptionPart {
  pki::CertChain elt;
  std::string auth_code;
  std::vector<GroupElement> hashed_exempt;
};

struct QueryRequest {
  Bytes cookie;
  std::vector<GroupElement> hashed;
  std::optional<ExemptionPart> exemption;
  Bytes encode() const;
  static QueryRequest decode(const Group& g, ByteView in);
};

enum class VerdictKind : std::uint8_t { Clear = 0, Hit = 1, HitExempt = 2 };
std::string_view verdict_name(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::Clear;
  std::string hazard_name;
  std::string reason;
  bool operator==(const Verdict&) const = default;
};

enum class Overall : std::uint8_t { Grant = 1, Deny = 2 };
std::string_view overall_name(Overall o);

struct QueryResponse {
  std::vector<Verdict> verdicts;
  Overall overall = Overall::Grant;
  Bytes encode() const;
  static QueryResponse decode(ByteView in);
  bool operator==(const QueryResponse&) const = default;
};

/// Grant iff every verdict is Clear or HitExempt.
Overall overall_of(const std::vector<Verdict>& v);

/// H's reply: the response plus, with binding on, a signature by H's token
/// key over h(request bytes, response bytes).
struct BoundResponse {
  Bytes response;
  Bytes binding;
  Bytes encode() const;
  static BoundResponse decode(ByteView in);
};

Bytes binding_input(ByteView request, ByteView response);

// --- authentication backend -------------------------------------------------

inline constexpr Timestamp kCodeWindow = 30;

/// Six decimal digits from h(secret, floor(t / 30)).
std::string auth_code(ByteView device_secret, Timestamp t);

enum class AuthResult : std::uint8_t { Ok, Reject };

class AuthRegistry {
 public:
  void enroll(const std::string& device_id, Bytes secret) { devices_[device_id] = std::move(secret); }
  /// Only the current window is accepted. Throws UnknownDevice.
  AuthResult verify(const std::string& device_id, const std::string& code, Timestamp t) const;
  const Bytes& secret(const std::string& device_id) const;

 private:
  std::map<std::string, Bytes> devices_;
};

struct AuthRequest {
  std::string device_id;
  std::string code;
  Timestamp timestamp = 0;
  Bytes encode() const;
  static AuthRequest decode(ByteView in);
};

// --- H-side lookup ------------------------------------------------------------

struct LookupContext {
  Timestamp now = 0;
  scep::RateLimitLedger* ledger = nullptr;
  const scep::Authenticated* auth = nullptr;  // the connection's SCEP result
  Bytes connection_cookie;
  const pki::Certificate* exemption_root = nullptr;
  const pki::RevocationList* revocations = nullptr;
  /// Asks the authentication backend; true for OK.
  std::function<bool(const std::string& device, const std::string& code, Timestamp t)> check_code;
  bool annotate = true;
};

/// Throws BadCookie, BadEltChain, AuthBackendRejected, RateLimited.
QueryResponse hdb_lookup(const HazardDb& db, const QueryRequest& req, LookupContext& ctx);

// --- server roles -------------------------------------------------------------

/// Terminates channels; subclasses see decrypted envelopes.
/// `g` is the DOPRF group. Channel key exchange always runs over
/// ristretto255: the test group's 10 elements would make every session key
/// guessable.
class ChannelServer : public net::Endpoint {
 public:
  ChannelServer(const Group& g, channel::ServerConfig tls, Rng rng)
      : g_(&g), tls_(std::move(tls)), rng_(std::move(rng)) {}
  ChannelServer(const ChannelServer&) = delete;
  ChannelServer& operator=(const ChannelServer&) = delete;

  Bytes handle(ConnId conn, ByteView inbound) override;
  channel::SessionCache& cache() { return cache_; }
  const channel::ServerConfig& tls() const { return tls_; }
  /// Established server-side sessions, for scenario assertions.
  std::vector<const channel::Session*> sessions() const;

 protected:
  virtual Bytes on_message(ConnId conn, const std::string& kind, ByteView body) = 0;
  const Group& group() const { return *g_; }
  Rng& rng() { return rng_; }

 private:
  const Group* g_;
  channel::ServerConfig tls_;
  Rng rng_;
  channel::SessionCache cache_;
  std::map<ConnId, channel::ServerConnection> conns_;
};

struct ScepServerConfig {
  scep::Variant variant = scep::Variant::Scep;
  scep::Credentials creds;
  scep::Trust trust;
};

/// Record of a server-side SCEP session reaching Authenticated.
struct AuthEvent {
  std::string server;
  ConnId conn = 0;
  Bytes r_client, r_server, cookie;
  pki::Token client_token;
  pki::Token server_token;
};

class ScepServer : public ChannelServer {
 public:
  ScepServer(std::string name, const Group& g, net::Network& net, channel::ServerConfig tls, ScepServerConfig cfg, Rng rng)
      : ChannelServer(g, std::move(tls), std::move(rng)), name_(std::move(name)), net_(&net), cfg_(std::move(cfg)) {}

  const std::string& name() const { return name_; }
  const std::vector<AuthEvent>& auth_events() const { return auth_events_; }
  scep::RateLimitLedger& ledger() { return ledger_; }
  const scep::RateLimitLedger& ledger() const { return ledger_; }

 protected:
  Bytes on_message(ConnId conn, const std::string& kind, ByteView body) override;
  virtual Bytes on_request(ConnId conn, const std::string& kind, ByteView body) = 0;
  /// The connection's SCEP result; BadCookie unless `cookie` is its cookie.
  const scep::Authenticated& require_auth(ConnId conn, ByteView cookie) const;
  net::Network& network() { return *net_; }
  const ScepServerConfig& scep_config() const { return cfg_; }

 private:
  std::string name_;
  net::Network* net_;
  ScepServerConfig cfg_;
  std::map<ConnId, scep::ServerSession> sessions_;
  std::vector<AuthEvent> auth_events_;
  scep::RateLimitLedger ledger_;
};

class Keyserver : public ScepServer {
 public:
  Keyserver(std::string name, const Group& g, net::Network& net, channel::ServerConfig tls, ScepServerConfig cfg,
            doprf::KeyShare share, Rng rng)
      : ScepServer(std::move(name), g, net, std::move(tls), std::move(cfg), std::move(rng)), share_(std::move(share)) {}

  const doprf::KeyShare& share() const { return share_; }

 protected:
  Bytes on_request(ConnId conn, const std::string& kind, ByteView body) override;

 private:
  doprf::KeyShare share_;
};

struct HdbConfig {
  bool bind_responses = false;
  bool annotate = true;
  std::string auth_backend = "auth";
  crypto::VerifyKey channel_ca;
  pki::Certificate exemption_root;
};

class HashDbServer : public ScepServer {
 public:
  HashDbServer(std::string name, const Group& g, net::Network& net, channel::ServerConfig tls, ScepServerConfig cfg,
               HazardDb db, HdbConfig hcfg, Rng rng)
      : ScepServer(std::move(name), g, net, std::move(tls), std::move(cfg), std::move(rng)),
        db_(std::move(db)),
        hcfg_(std::move(hcfg)) {}

  const HazardDb& db() const { return db_; }

 protected:
  Bytes on_request(ConnId conn, const std::string& kind, ByteView body) override;

 private:
  bool check_code(const std::string& device, const std::string& code, Timestamp t);

  HazardDb db_;
  HdbConfig hcfg_;
};

class AuthBackend : public ChannelServer {
 public:
  AuthBackend(const Group& g, net::Network& net, channel::ServerConfig tls, AuthRegistry registry, Rng rng)
      : ChannelServer(g, std::move(tls), std::move(rng)), net_(&net), registry_(std::move(registry)) {}

  struct Check {
    AuthRequest request;
    AuthResult result;
  };
  const std::vector<Check>& checks() const { return checks_; }
  const AuthRegistry& registry() const { return registry_; }

 protected:
  Bytes on_message(ConnId conn, const std::string& kind, ByteView body) override;

 private:
  net::Network* net_;
  AuthRegistry registry_;
  std::vector<Check> checks_;
};

/// Opens a connection and runs the channel handshake as a client.
struct ClientChannel {
  ConnId conn = 0;
  channel::Session session;
};
ClientChannel open_channel(net::Network& net, const std::string& from, const std::string& to,
                           const crypto::VerifyKey& channel_ca, Rng& rng);

/// Sends envelope(kind, body) as a record and opens the reply.
Bytes call(net::Network& net, ClientChannel& ch, std::string_view kind, ByteView body);

/// Asks the backend at `backend` about a code, as H does.
AuthResult request_auth_check(net::Network& net, const std::string& from, const std::string& backend,
                              const crypto::VerifyKey& channel_ca, Rng& rng, const AuthRequest& req);

// --- synthesizer ---------------------------------------------------------------

struct SynthConfig {
  scep::Variant variant = scep::Variant::Scep;
  std::uint32_t threshold = 2;
  std::vector<std::string> keyservers;  // in preference order
  std::string hdb = "hdb";
  bool bind_responses = false;
  std::size_t max_sequence_length = kDefaultMaxSequenceLength;
};

struct QueryResult {
  QueryResponse response;
  Overall overall() const { return response.overall; }
};

class Synthesizer {
 public:
  struct Connection {
    std::string server;
    ClientChannel channel;
    std::unique_ptr<scep::ClientSession> scep;
    bool resumed = false;
  };

  Synthesizer(std::string name, const Group& g, net::Network& net, SynthConfig cfg, scep::Credentials creds,
              scep::Trust trust, pki::Certificate exemption_root, crypto::VerifyKey channel_ca, Rng rng);
  Synthesizer(const Synthesizer&) = delete;
  Synthesizer& operator=(const Synthesizer&) = delete;

  /// Connects to the first t keyservers that complete SCEP, then to H.
  /// Throws WrongResponseCount if fewer than t are reachable.
  void connect();
  /// Replaces the H connection, trying resumption of the old channel first
  /// when `try_resume` is set; falls back to a full handshake if the server
  /// refuses. Returns the refusal, if any.
  std::optional<Errc> reconnect_hdb(bool try_resume);

  QueryResult basic_query(const std::vector<Bytes>& order);
  /// Throws BadEltChain, AuthBackendRejected and the basic-query errors.
  QueryResult exemption_query(const std::vector<Bytes>& order, const pki::CertChain& elt, const std::string& code);

  const std::string& name() const { return name_; }
  const std::vector<Connection>& keyserver_connections() const { return keyservers_; }
  const Connection& hdb_connection() const;
  const std::vector<std::pair<std::string, Errc>>& skipped() const { return skipped_; }
  /// H connections replaced by reconnect_hdb, oldest first.
  const std::vector<Connection>& retired_connections() const { return retired_; }
  const pki::Token& token() const { return *creds_.chain.token; }

 private:
  Connection establish(const std::string& server, std::optional<std::string> keyserver_target,
                       const channel::Session* resume_from, std::optional<Errc>* refusal);
  std::vector<GroupElement> keyed_hashes(const std::vector<Bytes>& seqs);
  QueryResult query_hdb(const QueryRequest& req, std::size_t expected);
  void check_order(const std::vector<Bytes>& order) const;

  std::string name_;
  const Group* g_;
  net::Network* net_;
  SynthConfig cfg_;
  scep::Credentials creds_;
  scep::Trust trust_;
  pki::Certificate exemption_root_;
  crypto::VerifyKey channel_ca_;
  Rng rng_;
  std::vector<Connection> keyservers_;
  std::optional<Connection> hdb_;
  std::vector<std::pair<std::string, Errc>> skipped_;
  std::vector<Connection> retired_;
};

}  // namespace sdna::screening

#pragma once

// A complete deployment on the simulated network, the scripted scenario
// runner, and the four attack scenarios.
//
// Roles: synthesizer "S", keyservers "ks1".."ksN", database "hdb",
// authentication backend "auth". Links are named "<from>-><to>#<k>", k
// counting connections between that pair from zero.
//
// Script lines (blank lines and '#' comments ignored):
//   connect
//   query <hex>[,<hex>...]
//   exempt-query <hex>[,...] elt=<hex>[,...] [code=fresh|stale|wrong]
//   reconnect-hdb [resume]
//   advance-clock <seconds>
//   corrupt <role>
//   unreachable <role>
//   drop <link> <label>                  next matching request
//   tamper <link> <label> <offset>       flip one byte of the next matching request
//   swap <src-link> <dst> <label>        next <label> reply on dst (a link, or
//                                        "<from>-><to>" for any other link of that
//                                        pair) becomes the last one seen on src
//   inject <link> <label> <hex>          raw bytes on an open link

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdna/knowledge.hpp"
#include "sdna/screening.hpp"
#include "sdna/simnet.hpp"

namespace sdna::scenario {

using pki::Timestamp;

inline constexpr Timestamp kDefaultStart = 1'700'000'000;

struct Config {
  group::Backend backend = group::Backend::Test;
  scep::Variant variant = scep::Variant::Scep;
  std::uint32_t threshold = 2;
  std::uint32_t keyservers = 3;
  bool resumption = false;
  bool bind_responses = false;
  bool annotate = true;
  std::uint64_t rate_limit = 100;
  std::vector<screening::HazardRecord> hazards;  // empty: the built-in fixture
  Timestamp start = kDefaultStart;
};

/// Built-in hazard fixture, and clear sequences whose hash_to_group differs
/// from every fixture hazard's in both backends (so they stay clear under any key).
std::vector<screening::HazardRecord> default_hazards();
Bytes fixture_hazard(std::size_t i);
Bytes fixture_clear(std::size_t i);

struct ServerIdentity {
  std::string name;
  crypto::SigningKey key;  // TLS identity key and token key
  channel::TlsIdentity tls;
  pki::CertChain chain;
};

class World {
 public:
  World(Config cfg, std::uint64_t seed);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  const Config& config() const { return cfg_; }
  const group::Group& group() const { return *g_; }
  simnet::SimNetwork& net() { return net_; }
  const simnet::SimNetwork& net() const { return net_; }

  screening::Synthesizer& synthesizer() { return *synth_; }
  const screening::Synthesizer& synthesizer() const { return *synth_; }
  std::vector<std::string> keyserver_names() const;
  screening::Keyserver& keyserver(const std::string& name);
  screening::HashDbServer& hdb() { return *hdb_; }
  screening::AuthBackend& auth() { return *auth_; }
  /// S, ks1..ksN, hdb, auth.
  std::vector<std::string> roles() const;
  bool has_role(std::string_view name) const;

  const group::Scalar& doprf_key() const { return k_; }
  const ServerIdentity& server_identity(const std::string& name) const;
  channel::ServerConfig tls_config(const ServerIdentity& id) const;
  screening::ScepServerConfig scep_config(const ServerIdentity& id) const;
  scep::Trust trust() const;
  const pki::Certificate& exemption_root() const { return exemption_root_.cert; }
  const crypto::SigningKey& channel_ca() const { return channel_ca_; }
  const pki::Token& synthesizer_token() const { return *synth_creds_.chain.token; }

  /// Another synthesizer holding S's own credentials.
  std::unique_ptr<screening::Synthesizer> clone_synthesizer(const std::string& role, std::vector<std::string> keyservers);
  /// A synthesizer certified by a second manufacturer leaf, optionally with a chosen token id.
  std::unique_ptr<screening::Synthesizer> rogue_synthesizer(const std::string& role,
                                                            std::optional<pki::TokenId> forced_sigma);

  pki::CertChain issue_elt(const std::vector<Bytes>& sequences);
  const std::string& device_id() const { return device_id_; }
  std::string auth_code_at(Timestamp t) const;

  /// Verdicts computed without the network: direct PRF plus set membership.
  screening::QueryResponse oracle(const std::vector<Bytes>& order, const std::vector<Bytes>* exempt) const;

  /// Adds everything a corrupted `role` holds to `k`.
  void export_role(const std::string& role, knowledge::Knowledge& k);

  Rng rng_for(std::string_view role) const { return root_rng_.derive(role); }

 private:
  pki::CertChain chain_for(pki::Token token, const std::vector<pki::Certificate>& path) const;
  ServerIdentity make_server(const std::string& name, pki::Payload payload, Rng& rng);

  Config cfg_;
  const group::Group* g_;
  Rng root_rng_;
  simnet::SimNetwork net_;
  pki::Issued mfr_root_, mfr_int_, mfr_leaf_;
  pki::Issued infra_root_, infra_int_, infra_leaf_;
  pki::Issued exemption_root_, exemption_int_, exemption_leaf_;
  crypto::SigningKey channel_ca_;
  pki::RevocationList revocations_;
  group::Scalar k_;
  std::vector<doprf::KeyShare> shares_;
  screening::HazardDb db_;
  std::string device_id_ = "authenticator-1";
  Bytes device_secret_;
  std::vector<ServerIdentity> servers_;
  crypto::SigningKey synth_key_;
  scep::Credentials synth_creds_;
  std::vector<std::unique_ptr<screening::Keyserver>> keyservers_;
  std::unique_ptr<screening::HashDbServer> hdb_;
  std::unique_ptr<screening::AuthBackend> auth_;
  screening::SynthConfig synth_cfg_;
  std::unique_ptr<screening::Synthesizer> synth_;
  std::uint32_t elt_count_ = 0;
};

// --- outcomes -----------------------------------------------------------------

struct Assertion {
  std::string id;
  bool pass = false;
  std::string evidence;
};

struct QueryRecord {
  std::string command;
  std::vector<Bytes> order;
  std::optional<screening::QueryResponse> response;
  std::optional<screening::QueryResponse> oracle;
  std::optional<Errc> error;
  std::string detail;
};

struct ScenarioOutcome {
  std::string name;
  std::vector<Assertion> assertions;
  std::vector<QueryRecord> queries;
  std::string headline;  // human line, e.g. "ATTACK SUCCEEDED"
  std::string outcome;   // token for the OUTCOME line
  bool expected = true;  // outcome is the one expected for this configuration

  const Assertion& at(std::string_view id) const;
  bool has(std::string_view id) const;
  /// "PASS id: evidence" lines.
  std::string table() const;
};

struct ScenarioRun {
  simnet::Transcript transcript;
  ScenarioOutcome outcome;
};

// --- scripts --------------------------------------------------------------------

struct Command {
  std::size_t line = 0;
  std::string verb;
  std::vector<std::string> args;
};

/// Syntax only; role names are checked against the world by run_scenario.
/// Throws ScriptError.
std::vector<Command> parse_script(std::string_view text);

/// Runs `script` against a fresh world. Throws ScriptError for malformed
/// scripts or unknown roles before anything runs. Assertions:
///   oracle-agreement, order-secrecy, cookie-secrecy, injective-agreement.
ScenarioRun run_scenario(const Config& cfg, std::string_view script, std::uint64_t seed,
                         const std::string& name = "scenario");

// --- attacks --------------------------------------------------------------------

/// Corrupt ks1 relays S's SCEP run to ks3 and spends S's budget there.
ScenarioRun attack_mitm(Config cfg, std::uint64_t seed);
/// Replays H's first query response into a later connection.
ScenarioRun attack_swap(Config cfg, std::uint64_t seed);
/// A corrupt H reuses the customer's one-time code at the auth backend.
ScenarioRun attack_passcode(Config cfg, std::uint64_t seed);
/// A second manufacturer issues a token with S's id and drains the shared budget.
ScenarioRun attack_collision(Config cfg, std::uint64_t seed, bool force_collision = true);

/// Order sequences must not appear inside any derivable byte string, and
/// (production group only) their hash_to_group values must not be derivable.
Assertion order_secrecy(World& w, const knowledge::Knowledge& k, const std::vector<Bytes>& sequences);
/// Cookies of S's sessions that completed at honest servers stay underivable.
Assertion cookie_secrecy(World& w, const knowledge::Knowledge& k, const std::set<std::string>& corrupt);
/// Each completed SCEP run at an honest server with S's token matches exactly
/// one client session on (r_S, r_W, cookie, T_S, T_W).
Assertion injective_agreement(World& w, const std::set<std::string>& corrupt,
                              const std::vector<const screening::Synthesizer*>& clients);
/// Closure over every byte in the transcript plus the corrupted roles.
std::unique_ptr<knowledge::Knowledge> adversary_knowledge(World& w, const std::set<std::string>& corrupt);

}  // namespace sdna::scenario

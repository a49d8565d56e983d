#include "sdna/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "sdna/encoding.hpp"

namespace sdna::scenario {

using screening::Overall;
using screening::QueryResponse;

namespace {

constexpr const char* kHazardSeqs[] = {"ATGCGTACGTTAGCCTAGGCTAACGTAC", "TTGACCGGTAACGTTCAAGGCATCGATG",
                                       "CCATGGTTAACCGGATCGATCGGCTAAT"};
constexpr const char* kHazardNames[] = {"toxin-alpha", "virulence-beta", "replicase-gamma"};
constexpr const char* kHazardReasons[] = {"regulated toxin, chain A", "host-range virulence factor",
                                          "replication machinery, restricted"};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<Bytes> parse_hex_list(const std::string& arg, std::size_t line) {
  std::vector<Bytes> out;
  for (const auto& h : split(arg, ',')) {
    try {
      out.push_back(from_hex(h));
    } catch (const Error& e) {
      throw Error(Errc::ScriptError, "line " + std::to_string(line) + ": " + e.detail());
    }
    if (out.back().empty()) throw Error(Errc::ScriptError, "line " + std::to_string(line) + ": empty sequence");
  }
  return out;
}

std::string short_hex(ByteView b) {
  auto h = to_hex(b);
  return h.size() > 16 ? h.substr(0, 16) + "..." : h;
}

bool same_params(const scep::ClientSession& c, const screening::AuthEvent& e) {
  return c.server_token() && c.r_client() == e.r_client && c.r_server() == e.r_server && c.cookie() == e.cookie &&
         c.own_token() == e.client_token && *c.server_token() == e.server_token;
}

std::string describe(const std::optional<QueryResponse>& r, const std::optional<Errc>& e) {
  if (r) return std::string(screening::overall_name(r->overall));
  if (e) return std::string(errc_name(*e));
  return "none";
}

}  // namespace

// --- fixtures -------------------------------------------------------------------

std::vector<screening::HazardRecord> default_hazards() {
  std::vector<screening::HazardRecord> out;
  for (std::size_t i = 0; i < std::size(kHazardSeqs); ++i)
    out.push_back({to_bytes(kHazardSeqs[i]), kHazardNames[i], kHazardReasons[i]});
  return out;
}

Bytes fixture_hazard(std::size_t i) { return to_bytes(kHazardSeqs[i % std::size(kHazardSeqs)]); }

Bytes fixture_clear(std::size_t i) {
  const auto& test = group::test_group();
  std::set<group::GroupElement> hazards;
  for (const auto* s : kHazardSeqs) hazards.insert(test.hash_to_group(to_bytes(s)));
  std::size_t found = 0;
  for (std::uint32_t n = 0;; ++n) {
    auto candidate = to_bytes("GATTACAGATTACAGGCC" + std::to_string(n));
    if (hazards.contains(test.hash_to_group(candidate))) continue;
    if (found++ == i) return candidate;
  }
}

// --- world ----------------------------------------------------------------------

namespace {

pki::Issued issue(const pki::Issued& parent, const pki::Identity& who, pki::CertType type, pki::Level level, Rng& rng) {
  auto key = crypto::SigningKey::generate(rng);
  auto cert = pki::issue_certificate(parent.cert, parent.key, {who, key.verify_key(), type, level, pki::kAlways}, rng);
  return {std::move(cert), std::move(key)};
}

}  // namespace

World::World(Config cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), g_(&group::group_for(cfg_.backend)), root_rng_(seed), net_(cfg_.start) {
  if (cfg_.hazards.empty()) cfg_.hazards = default_hazards();
  if (cfg_.keyservers < 1 || cfg_.threshold < 1 || cfg_.threshold > cfg_.keyservers)
    throw Error(Errc::InvalidThreshold, "need 1 <= t <= n");
  Rng rng = root_rng_.derive("pki");
  using pki::CertType;
  using pki::Level;

  mfr_root_ = pki::create_root(CertType::Manufacturer, {"Manufacturer Root", "root@manufacturers.example"}, rng);
  mfr_int_ = issue(mfr_root_, {"Manufacturer CA", "ca@manufacturers.example"}, CertType::Manufacturer,
                   Level::Intermediate, rng);
  mfr_leaf_ = issue(mfr_int_, {"Benchtop Synthesis Ltd", "tokens@benchtop.example"}, CertType::Manufacturer,
                    Level::Leaf, rng);
  infra_root_ = pki::create_root(CertType::Infrastructure, {"Infrastructure Root", "root@infra.example"}, rng);
  infra_int_ = issue(infra_root_, {"Infrastructure CA", "ca@infra.example"}, CertType::Infrastructure,
                     Level::Intermediate, rng);
  infra_leaf_ = issue(infra_int_, {"Infrastructure Issuer", "issuer@infra.example"}, CertType::Infrastructure,
                      Level::Leaf, rng);
  exemption_root_ = pki::create_root(CertType::Exemption, {"Exemption Root", "root@exemptions.example"}, rng);
  exemption_int_ = issue(exemption_root_, {"Exemption CA", "ca@exemptions.example"}, CertType::Exemption,
                         Level::Intermediate, rng);
  exemption_leaf_ = issue(exemption_int_, {"Biosafety Office", "office@exemptions.example"}, CertType::Exemption,
                          Level::Leaf, rng);
  channel_ca_ = crypto::SigningKey::generate(rng);

  k_ = g_->random_nonzero_scalar(rng);
  shares_ = doprf::share_key(*g_, k_, cfg_.keyservers, cfg_.threshold, rng);
  db_ = screening::build_hdb(*g_, cfg_.hazards, k_);
  device_secret_ = rng.bytes(32);

  for (std::uint32_t i = 1; i <= cfg_.keyservers; ++i)
    servers_.push_back(make_server("ks" + std::to_string(i), pki::KeyserverPayload{i}, rng));
  servers_.push_back(make_server("hdb", pki::DatabasePayload{}, rng));
  {
    ServerIdentity auth;
    auth.name = "auth";
    auth.key = crypto::SigningKey::generate(rng);
    auth.tls = channel::certify(channel_ca_, auth.name, auth.key.verify_key());
    servers_.push_back(std::move(auth));
  }

  synth_key_ = crypto::SigningKey::generate(rng);
  auto token = pki::issue_token(mfr_leaf_.cert, mfr_leaf_.key,
                                {pki::SynthesizerPayload{"S", cfg_.rate_limit}, synth_key_.verify_key(), pki::kAlways,
                                 std::nullopt},
                                rng);
  synth_creds_ = {chain_for(std::move(token), {mfr_leaf_.cert, mfr_int_.cert, mfr_root_.cert}), synth_key_};

  for (std::uint32_t i = 0; i < cfg_.keyservers; ++i) {
    const auto& id = servers_[i];
    keyservers_.push_back(std::make_unique<screening::Keyserver>(id.name, *g_, net_, tls_config(id), scep_config(id),
                                                                 shares_[i], rng_for(id.name)));
    net_.add(id.name, *keyservers_.back());
  }
  const auto& hid = server_identity("hdb");
  screening::HdbConfig hcfg{cfg_.bind_responses, cfg_.annotate, "auth", channel_ca_.verify_key(), exemption_root_.cert};
  hdb_ = std::make_unique<screening::HashDbServer>("hdb", *g_, net_, tls_config(hid), scep_config(hid), db_,
                                                   std::move(hcfg), rng_for("hdb"));
  net_.add("hdb", *hdb_);
  screening::AuthRegistry registry;
  registry.enroll(device_id_, device_secret_);
  auth_ = std::make_unique<screening::AuthBackend>(*g_, net_, tls_config(server_identity("auth")), std::move(registry),
                                                   rng_for("auth"));
  net_.add("auth", *auth_);

  synth_cfg_.variant = cfg_.variant;
  synth_cfg_.threshold = cfg_.threshold;
  synth_cfg_.keyservers = keyserver_names();
  synth_cfg_.hdb = "hdb";
  synth_cfg_.bind_responses = cfg_.bind_responses;
  synth_ = std::make_unique<screening::Synthesizer>("S", *g_, net_, synth_cfg_, synth_creds_, trust(),
                                                    exemption_root_.cert, channel_ca_.verify_key(), rng_for("S"));
}

pki::CertChain World::chain_for(pki::Token token, const std::vector<pki::Certificate>& path) const {
  pki::CertChain c;
  c.token = std::move(token);
  c.path = path;
  return c;
}

ServerIdentity World::make_server(const std::string& name, pki::Payload payload, Rng& rng) {
  ServerIdentity id;
  id.name = name;
  id.key = crypto::SigningKey::generate(rng);
  id.tls = channel::certify(channel_ca_, name, id.key.verify_key());
  auto token = pki::issue_token(infra_leaf_.cert, infra_leaf_.key,
                                {std::move(payload), id.key.verify_key(), pki::kAlways, std::nullopt}, rng);
  id.chain = chain_for(std::move(token), {infra_leaf_.cert, infra_int_.cert, infra_root_.cert});
  return id;
}

std::vector<std::string> World::keyserver_names() const {
  std::vector<std::string> out;
  for (std::uint32_t i = 1; i <= cfg_.keyservers; ++i) out.push_back("ks" + std::to_string(i));
  return out;
}

screening::Keyserver& World::keyserver(const std::string& name) {
  for (auto& k : keyservers_)
    if (k->name() == name) return *k;
  throw Error(Errc::ScriptError, "no keyserver " + name);
}

std::vector<std::string> World::roles() const {
  std::vector<std::string> out{"S"};
  for (auto& n : keyserver_names()) out.push_back(n);
  out.push_back("hdb");
  out.push_back("auth");
  return out;
}

bool World::has_role(std::string_view name) const {
  const auto r = roles();
  return std::find(r.begin(), r.end(), name) != r.end();
}

const ServerIdentity& World::server_identity(const std::string& name) const {
  for (const auto& s : servers_)
    if (s.name == name) return s;
  throw Error(Errc::ScriptError, "no server " + name);
}

channel::ServerConfig World::tls_config(const ServerIdentity& id) const {
  return {id.tls, id.key, cfg_.resumption};
}

screening::ScepServerConfig World::scep_config(const ServerIdentity& id) const {
  return {cfg_.variant, {id.chain, id.key}, trust()};
}

scep::Trust World::trust() const { return {mfr_root_.cert, infra_root_.cert, &revocations_}; }

std::unique_ptr<screening::Synthesizer> World::clone_synthesizer(const std::string& role,
                                                                 std::vector<std::string> keyservers) {
  auto cfg = synth_cfg_;
  cfg.keyservers = std::move(keyservers);
  return std::make_unique<screening::Synthesizer>(role, *g_, net_, cfg, synth_creds_, trust(), exemption_root_.cert,
                                                  channel_ca_.verify_key(), rng_for(role + "#clone"));
}

std::unique_ptr<screening::Synthesizer> World::rogue_synthesizer(const std::string& role,
                                                                 std::optional<pki::TokenId> forced_sigma) {
  Rng rng = rng_for(role + "#pki");
  auto leaf = issue(mfr_int_, {"Rogue Synthesis Co", "ops@rogue.example"}, pki::CertType::Manufacturer,
                    pki::Level::Leaf, rng);
  auto key = crypto::SigningKey::generate(rng);
  auto token = pki::issue_token(
      leaf.cert, leaf.key,
      {pki::SynthesizerPayload{role, cfg_.rate_limit}, key.verify_key(), pki::kAlways, forced_sigma}, rng);
  scep::Credentials creds{chain_for(std::move(token), {leaf.cert, mfr_int_.cert, mfr_root_.cert}), key};
  return std::make_unique<screening::Synthesizer>(role, *g_, net_, synth_cfg_, std::move(creds), trust(),
                                                  exemption_root_.cert, channel_ca_.verify_key(), rng_for(role));
}

pki::CertChain World::issue_elt(const std::vector<Bytes>& sequences) {
  Rng rng = rng_for("elt#" + std::to_string(elt_count_++));
  auto holder = crypto::SigningKey::generate(rng);
  auto token = pki::issue_token(exemption_leaf_.cert, exemption_leaf_.key,
                                {pki::ExemptionPayload{sequences, device_id_, std::nullopt}, holder.verify_key(),
                                 pki::kAlways, std::nullopt},
                                rng);
  return chain_for(std::move(token), {exemption_leaf_.cert, exemption_int_.cert, exemption_root_.cert});
}

std::string World::auth_code_at(Timestamp t) const { return screening::auth_code(device_secret_, t); }

QueryResponse World::oracle(const std::vector<Bytes>& order, const std::vector<Bytes>* exempt) const {
  std::set<group::GroupElement> exempt_hashes;
  if (exempt)
    for (const auto& s : *exempt) exempt_hashes.insert(doprf::doprf_direct(*g_, s, k_));
  QueryResponse r;
  for (const auto& s : order) {
    const auto h = doprf::doprf_direct(*g_, s, k_);
    screening::Verdict v;
    if (const auto* info = db_.lookup(h)) {
      v.kind = exempt_hashes.contains(h) ? screening::VerdictKind::HitExempt : screening::VerdictKind::Hit;
      if (cfg_.annotate) {
        v.hazard_name = info->name;
        v.reason = info->reason;
      }
    }
    r.verdicts.push_back(std::move(v));
  }
  r.overall = screening::overall_of(r.verdicts);
  return r;
}

void World::export_role(const std::string& role, knowledge::Knowledge& k) {
  using knowledge::Kind;
  if (role == "S") {
    k.give(Kind::Data, synth_key_.seed(), "S token key");
    const auto& s = *synth_;
    for (const auto& c : s.keyserver_connections()) k.give_keys(c.channel.session.keys(), "S session " + c.server);
    for (const auto& c : s.retired_connections()) k.give_keys(c.channel.session.keys(), "S session " + c.server);
    try {
      k.give_keys(s.hdb_connection().channel.session.keys(), "S session hdb");
    } catch (const Error&) {
    }
    return;
  }
  const auto& id = server_identity(role);
  k.give(Kind::Data, id.key.seed(), role + " signing key");
  const screening::ChannelServer* server = nullptr;
  if (role == "hdb") {
    server = hdb_.get();
    for (const auto& [e, info] : db_.entries()) k.give(Kind::Element, e.bytes(), "hdb entry");
  } else if (role == "auth") {
    server = auth_.get();
    k.give(Kind::Data, device_secret_, "device secret");
  } else {
    auto& ks = keyserver(role);
    server = &ks;
    k.give(Kind::Scalar, ks.share().value.bytes(), role + " key share");
  }
  for (const auto* s : server->sessions()) k.give_keys(s->keys(), role + " session");
}

// --- outcomes -------------------------------------------------------------------

const Assertion& ScenarioOutcome::at(std::string_view id) const {
  for (const auto& a : assertions)
    if (a.id == id) return a;
  throw std::out_of_range("no assertion " + std::string(id));
}

bool ScenarioOutcome::has(std::string_view id) const {
  return std::any_of(assertions.begin(), assertions.end(), [&](const Assertion& a) { return a.id == id; });
}

std::string ScenarioOutcome::table() const {
  std::ostringstream out;
  for (const auto& a : assertions) out << (a.pass ? "PASS " : "FAIL ") << a.id << ": " << a.evidence << '\n';
  return out.str();
}

std::unique_ptr<knowledge::Knowledge> adversary_knowledge(World& w, const std::set<std::string>& corrupt) {
  auto k = std::make_unique<knowledge::Knowledge>(w.group());
  for (const auto& r : w.net().transcript().records()) k->observe(r.bytes, r.link);
  for (const auto& role : corrupt) w.export_role(role, *k);
  k->close();
  return k;
}

Assertion order_secrecy(World& w, const knowledge::Knowledge& k, const std::vector<Bytes>& sequences) {
  Assertion a{"order-secrecy", true, {}};
  const bool prod = w.group().backend() == group::Backend::Prod;
  std::set<Bytes> unique(sequences.begin(), sequences.end());
  for (const auto& s : unique) {
    for (std::size_t i = 0; i < k.terms().size(); ++i) {
      const auto& t = k.terms()[i];
      if (t.key.kind == knowledge::Kind::Data && contains(t.key.bytes, s)) {
        a.pass = false;
        a.evidence = "sequence " + to_string(s) + " inside known term:\n" + k.explain(i);
        return a;
      }
    }
    if (prod) {
      if (auto i = k.find(knowledge::Kind::Element, w.group().hash_to_group(s).bytes())) {
        a.pass = false;
        a.evidence = "hash_to_group(" + to_string(s) + ") derivable:\n" + k.explain(*i);
        return a;
      }
    }
  }
  a.evidence = std::to_string(unique.size()) + " sequences absent from " + std::to_string(k.terms().size()) +
               " derivable terms";
  a.evidence += prod ? "; their hash_to_group values are not derivable"
                     : "; hash_to_group not probed (the test group has only 10 non-identity elements)";
  return a;
}

Assertion cookie_secrecy(World& w, const knowledge::Knowledge& k, const std::set<std::string>& corrupt) {
  Assertion a{"cookie-secrecy", true, {}};
  std::size_t checked = 0;
  std::vector<const screening::ScepServer*> servers;
  for (const auto& n : w.keyserver_names())
    if (!corrupt.contains(n)) servers.push_back(&w.keyserver(n));
  if (!corrupt.contains("hdb")) servers.push_back(&w.hdb());
  for (const auto* s : servers)
    for (const auto& e : s->auth_events()) {
      if (!(e.client_token == w.synthesizer_token())) continue;
      ++checked;
      if (auto i = k.find(knowledge::Kind::Data, e.cookie)) {
        a.pass = false;
        a.evidence = "cookie of " + s->name() + " session on " + w.net().link(e.conn).id + " is derivable (" +
                     (k.verify(*i) ? "derivation replays" : "DERIVATION DOES NOT REPLAY") + "):\n" + k.explain(*i);
        return a;
      }
    }
  a.evidence = std::to_string(checked) + " cookies of S sessions at honest servers not derivable";
  return a;
}

Assertion injective_agreement(World& w, const std::set<std::string>& corrupt,
                              const std::vector<const screening::Synthesizer*>& clients) {
  Assertion a{"injective-agreement", true, {}};
  std::vector<const scep::ClientSession*> sessions;
  for (const auto* c : clients) {
    for (const auto& k : c->keyserver_connections()) sessions.push_back(k.scep.get());
    for (const auto& k : c->retired_connections()) sessions.push_back(k.scep.get());
    try {
      sessions.push_back(c->hdb_connection().scep.get());
    } catch (const Error&) {
    }
  }
  std::vector<const screening::ScepServer*> servers;
  for (const auto& n : w.keyserver_names())
    if (!corrupt.contains(n)) servers.push_back(&w.keyserver(n));
  if (!corrupt.contains("hdb")) servers.push_back(&w.hdb());
  std::size_t checked = 0;
  for (const auto* s : servers)
    for (const auto& e : s->auth_events()) {
      if (!(e.client_token == w.synthesizer_token())) continue;
      ++checked;
      const auto n = std::count_if(sessions.begin(), sessions.end(),
                                   [&](const scep::ClientSession* c) { return c && same_params(*c, e); });
      if (n != 1) {
        a.pass = false;
        a.evidence = s->name() + " authenticated S's token on " + w.net().link(e.conn).id + " (r_W " +
                     short_hex(e.r_server) + ") but " + std::to_string(n) +
                     " client sessions agree on (r_S, r_W, cookie, T_S, T_W)";
        return a;
      }
    }
  a.evidence = std::to_string(checked) + " completed server runs each match exactly one client session";
  return a;
}

// --- scripts --------------------------------------------------------------------

std::vector<Command> parse_script(std::string_view text) {
  static const std::map<std::string, std::pair<std::size_t, std::size_t>> kArity = {
      {"connect", {0, 0}},  {"query", {1, 1}},   {"exempt-query", {2, 3}}, {"reconnect-hdb", {0, 1}},
      {"advance-clock", {1, 1}}, {"corrupt", {1, 1}}, {"unreachable", {1, 1}}, {"drop", {2, 2}},
      {"tamper", {3, 3}},   {"swap", {3, 3}},    {"inject", {3, 3}},
  };
  std::vector<Command> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::istringstream in(raw);
    Command c;
    c.line = line_no;
    // '#' opens a comment only at the start of a word; link ids contain it.
    if (!(in >> c.verb) || c.verb.front() == '#') continue;
    for (std::string w; in >> w && w.front() != '#';) c.args.push_back(w);
    auto it = kArity.find(c.verb);
    if (it == kArity.end()) throw Error(Errc::ScriptError, "line " + std::to_string(line_no) + ": unknown command " + c.verb);
    if (c.args.size() < it->second.first || c.args.size() > it->second.second)
      throw Error(Errc::ScriptError, "line " + std::to_string(line_no) + ": wrong argument count for " + c.verb);
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

struct LinkRef {
  std::string from, to;
  std::optional<std::uint64_t> index;
  std::string text() const { return from + "->" + to + (index ? "#" + std::to_string(*index) : ""); }
};

LinkRef parse_link(const World& w, const std::string& s, std::size_t line, bool allow_pair) {
  const auto err = [&](const std::string& why) {
    return Error(Errc::ScriptError, "line " + std::to_string(line) + ": " + why);
  };
  const auto arrow = s.find("->");
  if (arrow == std::string::npos) throw err("bad link " + s);
  LinkRef r;
  r.from = s.substr(0, arrow);
  std::string rest = s.substr(arrow + 2);
  const auto hash = rest.find('#');
  if (hash != std::string::npos) {
    std::uint64_t k = 0;
    const auto num = rest.substr(hash + 1);
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
    if (ec != std::errc() || p != num.data() + num.size()) throw err("bad link index in " + s);
    r.index = k;
    rest = rest.substr(0, hash);
  } else if (!allow_pair) {
    throw err("link needs #index: " + s);
  }
  r.to = rest;
  if (!w.has_role(r.from)) throw err("unknown role " + r.from);
  if (!w.has_role(r.to)) throw err("unknown role " + r.to);
  return r;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(Errc::ScriptError, "line " + std::to_string(line) + ": not a number: " + s);
  return v;
}

class Runner {
 public:
  Runner(const Config& cfg, std::uint64_t seed) : w(cfg, seed) {}

  void validate(const std::vector<Command>& cmds) const {
    for (const auto& c : cmds) {
      const auto err = [&](const std::string& why) {
        return Error(Errc::ScriptError, "line " + std::to_string(c.line) + ": " + why);
      };
      if (c.verb == "query") parse_hex_list(c.args[0], c.line);
      if (c.verb == "exempt-query") {
        parse_hex_list(c.args[0], c.line);
        if (c.args[1].rfind("elt=", 0) != 0) throw err("exempt-query needs elt=");
        if (c.args[1].size() > 4) parse_hex_list(c.args[1].substr(4), c.line);
        if (c.args.size() == 3 && c.args[2] != "code=fresh" && c.args[2] != "code=stale" && c.args[2] != "code=wrong")
          throw err("code must be fresh, stale or wrong");
      }
      if (c.verb == "reconnect-hdb" && !c.args.empty() && c.args[0] != "resume") throw err("reconnect-hdb [resume]");
      if (c.verb == "advance-clock") parse_u64(c.args[0], c.line);
      if ((c.verb == "corrupt" || c.verb == "unreachable") && !w.has_role(c.args[0])) throw err("unknown role " + c.args[0]);
      if (c.verb == "drop") parse_link(w, c.args[0], c.line, false);
      if (c.verb == "tamper") {
        parse_link(w, c.args[0], c.line, false);
        parse_u64(c.args[2], c.line);
      }
      if (c.verb == "swap") {
        parse_link(w, c.args[0], c.line, false);
        parse_link(w, c.args[1], c.line, true);
      }
      if (c.verb == "inject") {
        parse_link(w, c.args[0], c.line, false);
        try {
          from_hex(c.args[2]);
        } catch (const Error& e) {
          throw err(e.detail());
        }
      }
    }
  }

  void run(const Command& c) {
    auto& net = w.net();
    net.note(c.verb);
    if (c.verb == "connect") {
      QueryRecord q{"connect", {}, {}, {}, {}, {}};
      try {
        w.synthesizer().connect();
      } catch (const Error& e) {
        q.error = e.code();
        q.detail = e.what();
      }
      connects.push_back(std::move(q));
    } else if (c.verb == "query") {
      auto order = parse_hex_list(c.args[0], c.line);
      QueryRecord q{"query", order, {}, w.oracle(order, nullptr), {}, {}};
      try {
        q.response = w.synthesizer().basic_query(order).response;
      } catch (const Error& e) {
        q.error = e.code();
        q.detail = e.what();
      }
      probed.insert(probed.end(), order.begin(), order.end());
      queries.push_back(std::move(q));
    } else if (c.verb == "exempt-query") {
      auto order = parse_hex_list(c.args[0], c.line);
      auto listed = c.args[1].size() > 4 ? parse_hex_list(c.args[1].substr(4), c.line) : std::vector<Bytes>{};
      const std::string mode = c.args.size() == 3 ? c.args[2].substr(5) : "fresh";
      const auto now = net.now();
      std::string code = w.auth_code_at(mode == "stale" ? now - screening::kCodeWindow : now);
      if (mode == "wrong") code = code == "000000" ? "000001" : "000000";
      const auto elt = w.issue_elt(listed);
      QueryRecord q{"exempt-query", order, {}, w.oracle(order, &listed), {}, {}};
      try {
        q.response = w.synthesizer().exemption_query(order, elt, code).response;
      } catch (const Error& e) {
        q.error = e.code();
        q.detail = e.what();
      }
      probed.insert(probed.end(), order.begin(), order.end());
      disclosed.insert(disclosed.end(), listed.begin(), listed.end());
      queries.push_back(std::move(q));
    } else if (c.verb == "reconnect-hdb") {
      std::optional<Errc> refusal;
      try {
        refusal = w.synthesizer().reconnect_hdb(!c.args.empty());
      } catch (const Error& e) {
        refusal = e.code();
      }
      reconnects.push_back(refusal);
    } else if (c.verb == "advance-clock") {
      net.advance(static_cast<Timestamp>(parse_u64(c.args[0], c.line)));
    } else if (c.verb == "corrupt") {
      corrupt.insert(c.args[0]);
    } else if (c.verb == "unreachable") {
      net.set_reachable(c.args[0], false);
    } else if (c.verb == "drop" || c.verb == "tamper") {
      const auto link = parse_link(w, c.args[0], c.line, false).text();
      const auto label = c.args[1];
      const auto offset = c.verb == "tamper" ? parse_u64(c.args[2], c.line) : 0;
      const bool drop = c.verb == "drop";
      auto done = std::make_shared<bool>(false);
      net.add_tap([=](simnet::InFlight& m) {
        if (*done || m.direction != simnet::Direction::Request || m.link != link || m.label != label || m.bytes.empty())
          return simnet::TapAction::Deliver;
        *done = true;
        if (drop) return simnet::TapAction::Drop;
        m.bytes[offset % m.bytes.size()] ^= 0x01;
        return simnet::TapAction::Replace;
      });
    } else if (c.verb == "swap") {
      const auto src = parse_link(w, c.args[0], c.line, false).text();
      const auto dst = parse_link(w, c.args[1], c.line, true);
      const auto label = c.args[2];
      struct State {
        std::optional<Bytes> captured;
        bool done = false;
      };
      auto st = std::make_shared<State>();
      for (const auto& r : net.transcript().records())
        if (r.event == "reply" && r.link == src && r.label == label) st->captured = r.bytes;
      const auto dst_text = dst.text();
      const bool pair = !dst.index;
      net.add_tap([=](simnet::InFlight& m) {
        if (m.direction != simnet::Direction::Reply || m.label != label) return simnet::TapAction::Deliver;
        if (m.link == src) {
          st->captured = m.bytes;
          return simnet::TapAction::Deliver;
        }
        const bool match = pair ? m.link.rfind(dst_text + "#", 0) == 0 : m.link == dst_text;
        if (st->done || !st->captured || !match) return simnet::TapAction::Deliver;
        st->done = true;
        m.bytes = *st->captured;
        return simnet::TapAction::Replace;
      });
    } else if (c.verb == "inject") {
      const auto link = parse_link(w, c.args[0], c.line, false).text();
      const auto conn = net.find_link(link);
      if (!conn) throw Error(Errc::ScriptError, "line " + std::to_string(c.line) + ": link not open: " + link);
      net.inject(*conn, from_hex(c.args[2]), c.args[1]);
    }
  }

  /// The four standard assertions.
  void evaluate(ScenarioOutcome& out) {
    Assertion agree{"oracle-agreement", true, {}};
    std::size_t answered = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto& q = queries[i];
      if (!q.response) continue;
      ++answered;
      if (!(*q.response == *q.oracle)) {
        agree.pass = false;
        agree.evidence += "query " + std::to_string(i + 1) + ": accepted " + describe(q.response, {}) + ", oracle " +
                          describe(q.oracle, {}) + "; ";
      }
    }
    if (agree.pass) agree.evidence = std::to_string(answered) + " answered queries equal the direct-PRF oracle";
    out.assertions.push_back(std::move(agree));

    auto k = adversary_knowledge(w, corrupt);
    std::vector<Bytes> secret;
    for (const auto& s : probed)
      if (!(corrupt.contains("hdb") && std::find(disclosed.begin(), disclosed.end(), s) != disclosed.end()))
        secret.push_back(s);
    out.assertions.push_back(order_secrecy(w, *k, secret));
    out.assertions.push_back(cookie_secrecy(w, *k, corrupt));
    out.assertions.push_back(injective_agreement(w, corrupt, {&w.synthesizer()}));
    out.queries = queries;
  }

  World w;
  std::set<std::string> corrupt;
  std::vector<QueryRecord> connects;
  std::vector<QueryRecord> queries;
  std::vector<std::optional<Errc>> reconnects;
  std::vector<Bytes> probed;
  std::vector<Bytes> disclosed;  // sequences listed in ELTs sent to H
};

ScenarioRun finish(Runner& r, ScenarioOutcome out) {
  return ScenarioRun{r.w.net().transcript(), std::move(out)};
}

}  // namespace

ScenarioRun run_scenario(const Config& cfg, std::string_view script, std::uint64_t seed, const std::string& name) {
  const auto cmds = parse_script(script);
  Runner r(cfg, seed);
  r.validate(cmds);
  for (const auto& c : cmds) r.run(c);
  ScenarioOutcome out;
  out.name = name;
  r.evaluate(out);
  if (!r.queries.empty()) {
    const auto& q = r.queries.back();
    out.headline = describe(q.response, q.error);
  } else if (!r.connects.empty() && r.connects.back().error) {
    out.headline = std::string(errc_name(*r.connects.back().error));
  } else {
    out.headline = "OK";
  }
  out.outcome = out.headline;
  out.expected = std::all_of(out.assertions.begin(), out.assertions.end(), [](const Assertion& a) { return a.pass; });
  return finish(r, std::move(out));
}

// --- attacks --------------------------------------------------------------------

namespace {

/// The corrupt keyserver of the relay attack. It answers S as a keyserver
/// would, but runs S's SCEP exchange against `target` underneath.
class RelayingKeyserver : public screening::ChannelServer {
 public:
  RelayingKeyserver(World& w, const ServerIdentity& me, doprf::KeyShare share, std::string target, Rng rng)
      : ChannelServer(w.group(), w.tls_config(me), std::move(rng)),
        w_(&w),
        me_(me),
        share_(std::move(share)),
        target_(std::move(target)) {}

  std::optional<Errc> step6;
  bool relayed = false;
  Bytes cookie;
  std::uint64_t spent = 0;
  std::optional<Errc> spend_stop;

  void spend(std::size_t batch) {
    if (!upstream_) return;
    for (int round = 0; round < 1000; ++round) {
      screening::EvalRequest req;
      req.cookie = cookie;
      for (std::size_t i = 0; i < batch; ++i)
        req.blinded.push_back(w_->group().hash_to_group(to_bytes("filler-" + std::to_string(round) + "-" +
                                                                 std::to_string(i))));
      try {
        screening::call(w_->net(), *upstream_, "eval", req.encode());
        spent += batch;
      } catch (const Error& e) {
        spend_stop = e.code();
        return;
      }
    }
  }

  void export_to(knowledge::Knowledge& k) const {
    k.give(knowledge::Kind::Data, me_.key.seed(), "relay signing key");
    k.give(knowledge::Kind::Scalar, share_.value.bytes(), "relay key share");
    for (const auto* s : sessions()) k.give_keys(s->keys(), "relay downstream session");
    if (upstream_) k.give_keys(upstream_->session.keys(), "relay upstream session");
  }

 protected:
  Bytes on_message(net::ConnId, const std::string& kind, ByteView body) override {
    const auto variant = w_->config().variant;
    if (kind == "scep-hello") {
      // [1] S's hello: r_S and T_S. [2-3] the same hello, retargeted, to W.
      auto hello = scep::Hello::decode(body);
      hello.keyserver_target = target_;
      upstream_ = screening::open_channel(w_->net(), me_.name, target_, w_->channel_ca().verify_key(), rng());
      auto theirs = scep::Response::decode(
          screening::call(w_->net(), *upstream_, "scep-hello", hello.encode()));
      cookie = theirs.cookie;
      // [4] W's challenge handed to S under K''s own token and signature.
      scep::Response mine{theirs.cookie, theirs.r_server, me_.chain,
                          me_.key.sign(scep::server_signed_input(variant, hello.r_client, theirs.r_server, theirs.cookie,
                                                                 *hello.chain.token, *me_.chain.token))};
      return mine.encode();
    }
    if (kind == "scep-finish") {
      // [5] S's finish carries the signature W wants. [6] present it to W.
      try {
        screening::call(w_->net(), *upstream_, "scep-finish", body);
        relayed = true;
      } catch (const Error& e) {
        step6 = e.code();
      }
      return scep::ack_message();
    }
    if (kind == "eval") {
      auto req = screening::EvalRequest::decode(w_->group(), body);
      screening::EvalResponse resp;
      resp.index = share_.index;
      for (const auto& x : req.blinded) resp.evaluations.push_back(doprf::eval_share(w_->group(), share_, x));
      return resp.encode();
    }
    throw Error(Errc::ProtocolState, "relay cannot handle " + kind);
  }

 private:
  World* w_;
  ServerIdentity me_;
  doprf::KeyShare share_;
  std::string target_;
  std::optional<screening::ClientChannel> upstream_;
};

QueryRecord try_query(World& w, screening::Synthesizer& s, std::vector<Bytes> order, bool connect_first) {
  QueryRecord q{"query", order, {}, w.oracle(order, nullptr), {}, {}};
  try {
    if (connect_first) s.connect();
    q.response = s.basic_query(order).response;
  } catch (const Error& e) {
    q.error = e.code();
    q.detail = e.what();
  }
  return q;
}

}  // namespace

ScenarioRun attack_mitm(Config cfg, std::uint64_t seed) {
  if (cfg.keyservers < cfg.threshold + 1 || cfg.threshold < 2)
    throw Error(Errc::InvalidThreshold, "the relay scenario needs 2 <= t < n");
  World w(cfg, seed);
  const std::string relay_name = "ks1";
  const std::string target = "ks" + std::to_string(cfg.keyservers);
  RelayingKeyserver relay(w, w.server_identity(relay_name), w.keyserver(relay_name).share(), target,
                          w.rng_for("adversary"));
  w.net().add(relay_name, relay);
  const auto sigma = w.synthesizer_token().sigma;

  w.net().note("S connects; ks1 relays its SCEP run to " + target);
  std::vector<Bytes> order{fixture_clear(0), fixture_hazard(0)};
  auto first = try_query(w, w.synthesizer(), order, true);
  w.net().note("relay spends S's budget at " + target);
  relay.spend(10);
  w.net().note("S later reaches " + target + " directly");
  std::vector<std::string> later_ks{target};
  for (const auto& n : w.keyserver_names())
    if (n != relay_name && n != target && later_ks.size() < cfg.threshold) later_ks.push_back(n);
  auto s2 = w.clone_synthesizer("S", later_ks);
  auto second = try_query(w, *s2, {fixture_clear(1)}, true);

  ScenarioOutcome out;
  out.name = std::string("mitm-") + std::string(scep::variant_name(cfg.variant));
  auto& tgt = w.keyserver(target);
  const screening::AuthEvent* hijacked = nullptr;
  for (const auto& e : tgt.auth_events())
    if (w.net().link(e.conn).from == relay_name && e.client_token == w.synthesizer_token()) hijacked = &e;
  out.assertions.push_back(
      {"target-authenticated-adversary-as-S", hijacked != nullptr,
       hijacked ? target + " accepted S's token on " + w.net().link(hijacked->conn).id
                : target + " never authenticated the relay (" +
                      (relay.step6 ? std::string(errc_name(*relay.step6)) : std::string("no finish")) + ")"});
  const auto used = tgt.ledger().window_total(sigma, w.net().now());
  out.assertions.push_back({"budget-spent-by-adversary", relay.spent > 0 && used >= relay.spent,
                            "relay evaluated " + std::to_string(relay.spent) + " sequences at " + target +
                                "; ledger for S's token holds " + std::to_string(used) + " of " +
                                std::to_string(cfg.rate_limit) +
                                (relay.spend_stop ? "; stopped by " + std::string(errc_name(*relay.spend_stop)) : "")});
  out.assertions.push_back({"honest-synthesizer-starved", second.error == Errc::RateLimited,
                            "S's own later query through " + target + ": " + describe(second.response, second.error)});
  out.assertions.push_back({"step6-rejected", relay.step6 == Errc::BadClientSig,
                            relay.step6 ? "forwarded finish answered " + std::string(errc_name(*relay.step6))
                                        : "forwarded finish accepted"});

  auto k = std::make_unique<knowledge::Knowledge>(w.group());
  for (const auto& r : w.net().transcript().records()) k->observe(r.bytes, r.link);
  relay.export_to(*k);
  k->close();
  std::set<std::string> corrupt{relay_name};
  out.assertions.push_back(injective_agreement(w, corrupt, {&w.synthesizer(), s2.get()}));
  out.assertions.push_back(cookie_secrecy(w, *k, corrupt));
  out.assertions.push_back(order_secrecy(w, *k, {fixture_clear(0), fixture_hazard(0), fixture_clear(1)}));
  out.queries = {first, second};

  const bool succeeded = hijacked != nullptr;
  if (succeeded) {
    out.headline = "ATTACK SUCCEEDED";
    out.outcome = "ATTACK_SUCCEEDED";
  } else {
    const std::string why = relay.step6 ? std::string(errc_name(*relay.step6)) : "unknown";
    out.headline = "ATTACK BLOCKED: " + why;
    out.outcome = "ATTACK_BLOCKED:" + why;
  }
  out.expected = cfg.variant == scep::Variant::Scep
                     ? succeeded && out.at("budget-spent-by-adversary").pass && out.at("honest-synthesizer-starved").pass
                     : !succeeded && out.at("step6-rejected").pass;
  return ScenarioRun{w.net().transcript(), std::move(out)};
}

ScenarioRun attack_swap(Config cfg, std::uint64_t seed) {
  const std::string script = "connect\nquery " + to_hex(fixture_clear(0)) +
                             "\nreconnect-hdb resume\nswap S->hdb#0 S->hdb query\nquery " + to_hex(fixture_hazard(0)) +
                             "\n";
  Runner r(cfg, seed);
  const auto cmds = parse_script(script);
  r.validate(cmds);
  for (const auto& c : cmds) r.run(c);
  ScenarioOutcome out;
  out.name = std::string("swap-resumption-") + (cfg.resumption ? "on" : "off") + "-binding-" +
             (cfg.bind_responses ? "on" : "off");
  r.evaluate(out);

  const auto& q2 = r.queries.back();
  const auto refusal = r.reconnects.empty() ? std::nullopt : r.reconnects.front();
  const bool swapped = std::any_of(r.w.net().transcript().records().begin(), r.w.net().transcript().records().end(),
                                   [](const simnet::TranscriptRecord& t) { return t.event == "replace"; });
  const bool inverted = q2.response && q2.oracle && q2.response->overall != q2.oracle->overall;
  out.assertions.push_back({"swap-applied", swapped,
                            swapped ? "adversary replaced the second query reply with the first"
                                    : "no reply was replaced"});
  out.assertions.push_back({"accepted-inverted-verdict", inverted,
                            "second query accepted " + describe(q2.response, q2.error) + ", oracle " +
                                describe(q2.oracle, {})});
  out.assertions.push_back({"binding-mismatch-detected", q2.error == Errc::BadResponseBinding,
                            "second query: " + describe(q2.response, q2.error)});
  out.assertions.push_back({"resumption-refused", refusal == Errc::ResumptionDisabled,
                            refusal ? "resume answered " + std::string(errc_name(*refusal)) : "resume accepted"});

  if (refusal == Errc::ResumptionDisabled) {
    const bool rejected = q2.error.has_value() && !inverted;
    out.headline = "SWAP REJECTED: ResumptionDisabled";
    out.outcome = "SWAP_REJECTED:ResumptionDisabled";
    out.assertions.push_back({"swap-rejected", rejected,
                              "replayed record on a fresh connection: " + describe(q2.response, q2.error)});
    out.expected = !cfg.resumption && rejected;
  } else if (q2.error == Errc::BadResponseBinding) {
    out.headline = "SWAP DETECTED: BadResponseBinding";
    out.outcome = "SWAP_DETECTED:BadResponseBinding";
    out.expected = cfg.resumption && cfg.bind_responses;
  } else if (inverted) {
    out.headline = "VERDICT INVERTED";
    out.outcome = "VERDICT_INVERTED";
    out.expected = cfg.resumption && !cfg.bind_responses;
  } else {
    out.headline = "SWAP INEFFECTIVE: " + describe(q2.response, q2.error);
    out.outcome = "SWAP_INEFFECTIVE";
    out.expected = false;
  }
  return finish(r, std::move(out));
}

ScenarioRun attack_passcode(Config cfg, std::uint64_t seed) {
  const auto hazard = fixture_hazard(0);
  const std::string script = "corrupt hdb\nconnect\nexempt-query " + to_hex(hazard) + "," + to_hex(fixture_clear(0)) +
                             " elt=" + to_hex(hazard) + " code=fresh\n";
  Runner r(cfg, seed);
  const auto cmds = parse_script(script);
  r.validate(cmds);
  for (const auto& c : cmds) r.run(c);
  ScenarioOutcome out;
  out.name = "passcode-replay";
  r.evaluate(out);
  auto& w = r.w;

  const auto& q = r.queries.back();
  out.assertions.push_back({"honest-flow-grant", q.response && q.response->overall == Overall::Grant,
                            "exemption query with a fresh code: " + describe(q.response, q.error)});

  // The corrupt H reads the code out of S's request with its own session keys.
  auto k = adversary_knowledge(w, r.corrupt);
  std::optional<std::pair<std::string, std::string>> stolen;
  std::string how;
  for (std::size_t i = 0; i < k->terms().size() && !stolen; ++i) {
    const auto& t = k->terms()[i];
    if (t.key.kind != knowledge::Kind::Data) continue;
    try {
      auto [kind, body] = screening::open_envelope(t.key.bytes);
      if (kind != "query") continue;
      auto req = screening::QueryRequest::decode(w.group(), body);
      if (!req.exemption || !req.exemption->elt.token) continue;
      stolen.emplace(req.exemption->elt.token->exemption().device_id, req.exemption->auth_code);
      how = std::string(k->verify(i) ? "derivation replays" : "DERIVATION DOES NOT REPLAY") + ":\n" + k->explain(i);
    } catch (const Error&) {
    }
  }
  out.assertions.push_back({"code-recovered-from-traffic", stolen.has_value(),
                            stolen ? "device " + stolen->first + " code " + stolen->second + ", " + how
                                   : "no exemption request decrypted"});

  std::optional<screening::AuthResult> same_window, next_window;
  if (stolen) {
    Rng rng = w.rng_for("adversary");
    const auto ask = [&]() -> std::optional<screening::AuthResult> {
      try {
        return screening::request_auth_check(w.net(), "hdb", "auth", w.channel_ca().verify_key(), rng,
                                             {stolen->first, stolen->second, w.net().now()});
      } catch (const Error&) {
        return std::nullopt;
      }
    };
    w.net().note("corrupt hdb replays the code within its window");
    same_window = ask();
    w.net().advance(screening::kCodeWindow);
    w.net().note("corrupt hdb replays the code one window later");
    next_window = ask();
  }
  const auto name = [](const std::optional<screening::AuthResult>& a) -> std::string {
    if (!a) return "no answer";
    return *a == screening::AuthResult::Ok ? "OK" : "Reject";
  };
  out.assertions.push_back({"replay-same-window-ok", same_window == screening::AuthResult::Ok,
                            "auth backend answered " + name(same_window)});
  out.assertions.push_back({"replay-next-window-reject", next_window == screening::AuthResult::Reject,
                            "auth backend answered " + name(next_window) + " 30 s later"});

  const bool accepted = same_window == screening::AuthResult::Ok;
  out.headline = accepted ? "REPLAY ACCEPTED" : "REPLAY REJECTED";
  out.outcome = accepted ? "REPLAY_ACCEPTED" : "REPLAY_REJECTED";
  out.expected = accepted && out.at("honest-flow-grant").pass && out.at("replay-next-window-reject").pass;
  return finish(r, std::move(out));
}

ScenarioRun attack_collision(Config cfg, std::uint64_t seed, bool force_collision) {
  World w(cfg, seed);
  const auto sigma = w.synthesizer_token().sigma;
  auto rogue = w.rogue_synthesizer("M", force_collision ? std::optional<pki::TokenId>(sigma) : std::nullopt);

  QueryRecord first = try_query(w, w.synthesizer(), {fixture_clear(0)}, true);
  std::optional<Errc> rogue_connect;
  try {
    rogue->connect();
  } catch (const Error& e) {
    rogue_connect = e.code();
  }
  const auto rogue_sigma = rogue->token().sigma;

  w.net().note("M screens filler orders until refused");
  std::uint64_t spent = 0;
  std::optional<Errc> stop;
  if (!rogue_connect) {
    // Batches of 10, then single sequences to use up the remainder.
    std::size_t batch = 10;
    for (int round = 0; round < 1000 && !stop; ++round) {
      std::vector<Bytes> order;
      for (std::size_t i = 0; i < batch; ++i)
        order.push_back(to_bytes("ROGUE" + std::to_string(round) + "N" + std::to_string(i)));
      try {
        rogue->basic_query(order);
        spent += order.size();
      } catch (const Error& e) {
        if (e.code() != Errc::RateLimited || batch == 1) stop = e.code();
        batch = 1;
      }
    }
  }
  const auto used = w.hdb().ledger().window_total(sigma, w.net().now());
  QueryRecord last = try_query(w, w.synthesizer(), {fixture_clear(1)}, false);

  ScenarioOutcome out;
  out.name = force_collision ? "token-collision" : "token-distinct";
  bool s_auth = false, m_auth = false;
  for (const auto& e : w.hdb().auth_events()) {
    s_auth |= e.client_token == w.synthesizer_token();
    m_auth |= e.client_token == rogue->token();
  }
  out.assertions.push_back({"both-authenticated", s_auth && m_auth,
                            std::string("hdb authenticated S: ") + (s_auth ? "yes" : "no") +
                                ", M: " + (m_auth ? "yes" : "no")});
  out.assertions.push_back({"shared-token-id", rogue_sigma == sigma,
                            rogue_sigma == sigma ? "M's token carries S's id" : "token ids differ"});
  const auto s_own = first.response ? first.order.size() : 0;
  out.assertions.push_back({"ledger-merged", rogue_sigma == sigma && spent > 0 && used == spent + s_own,
                            "hdb ledger for S's id holds " + std::to_string(used) + " = " + std::to_string(s_own) +
                                " from S + " + std::to_string(spent) + " from M"});
  out.assertions.push_back({"honest-budget-exhausted", last.error == Errc::RateLimited,
                            "S's next query: " + describe(last.response, last.error)});
  auto k = adversary_knowledge(w, {});
  out.assertions.push_back(order_secrecy(w, *k, {fixture_clear(0), fixture_clear(1)}));
  out.queries = {first, last};

  if (force_collision) {
    const bool merged = out.at("ledger-merged").pass && out.at("honest-budget-exhausted").pass;
    out.headline = merged ? "LEDGER MERGED: honest token rate-limited" : "NO INTERFERENCE";
    out.outcome = merged ? "LEDGER_MERGED" : "NO_INTERFERENCE";
    out.expected = merged && out.at("both-authenticated").pass;
  } else {
    const bool independent = last.response.has_value();
    out.headline = independent ? "INDEPENDENT BUDGETS" : "INTERFERENCE: " + describe(last.response, last.error);
    out.outcome = independent ? "INDEPENDENT_BUDGETS" : "INTERFERENCE";
    out.expected = independent;
  }
  return ScenarioRun{w.net().transcript(), std::move(out)};
}

}  // namespace sdna::scenario

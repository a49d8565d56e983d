#include "sdna/screening.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "sdna/encoding.hpp"

namespace sdna::screening {

namespace {

Rng fork(Rng& parent) {
  std::array<std::uint8_t, 32> seed{};
  parent.fill(seed);
  return Rng(seed);
}

std::vector<Bytes> element_bytes(const std::vector<GroupElement>& v) {
  std::vector<Bytes> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(e.bytes());
  return out;
}

std::vector<GroupElement> decode_elements(const Group& g, const std::vector<Bytes>& raw) {
  std::vector<GroupElement> out;
  out.reserve(raw.size());
  for (const auto& b : raw) out.push_back(g.decode_element(b));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

const pki::RevocationList& revocations_or_empty(const pki::RevocationList* r) {
  static const pki::RevocationList kNone;
  return r ? *r : kNone;
}

}  // namespace

Bytes envelope(std::string_view kind, ByteView body) {
  Encoder e;
  e.str(kind).bytes(body);
  return std::move(e).take();
}

std::pair<std::string, Bytes> open_envelope(ByteView in) {
  Decoder d(in);
  auto kind = d.str();
  auto body = d.owned();
  d.finish();
  return {std::move(kind), std::move(body)};
}

// --- hazard database --------------------------------------------------------

std::vector<HazardRecord> parse_hazard_file(std::string_view text) {
  std::vector<HazardRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw Error(Errc::Malformed, "hazard line " + std::to_string(line_no) + ": expected hex,name,reason");
    HazardRecord r;
    try {
      r.sequence = from_hex(trim(line.substr(0, c1)));
    } catch (const Error& e) {
      throw Error(Errc::Malformed, "hazard line " + std::to_string(line_no) + ": " + e.detail());
    }
    if (r.sequence.empty()) throw Error(Errc::Malformed, "hazard line " + std::to_string(line_no) + ": empty sequence");
    r.name = std::string(trim(line.substr(c1 + 1, c2 - c1 - 1)));
    r.reason = std::string(trim(line.substr(c2 + 1)));
    out.push_back(std::move(r));
  }
  return out;
}

const HazardInfo* HazardDb::lookup(const GroupElement& e) const {
  auto it = entries_.find(e);
  return it == entries_.end() ? nullptr : &it->second;
}

Bytes HazardDb::encode() const {
  std::vector<Bytes> items;
  items.reserve(entries_.size());
  for (const auto& [e, info] : entries_) {
    Encoder item;
    item.bytes(e.bytes()).str(info.name).str(info.reason);
    items.push_back(std::move(item).take());
  }
  Encoder enc;
  enc.str("hazard-db").list(items);
  return std::move(enc).take();
}

HazardDb HazardDb::decode(const Group& g, ByteView in) {
  Decoder d(in);
  if (d.str() != "hazard-db") throw Error(Errc::Malformed, "not a hazard db");
  HazardDb db;
  for (const auto& raw : d.list()) {
    Decoder item(raw);
    auto e = g.decode_element(item.bytes());
    HazardInfo info;
    info.name = item.str();
    info.reason = item.str();
    item.finish();
    if (!db.entries_.emplace(std::move(e), std::move(info)).second) throw Error(Errc::Malformed, "duplicate entry");
  }
  d.finish();
  return db;
}

HazardDb build_hdb(const Group& g, const std::vector<HazardRecord>& hazards, const group::Scalar& k) {
  HazardDb db;
  for (const auto& h : hazards) db.insert(doprf::doprf_direct(g, h.sequence, k), {h.name, h.reason});
  return db;
}

// --- messages ---------------------------------------------------------------

Bytes EvalRequest::encode() const {
  Encoder e;
  e.bytes(cookie).list(element_bytes(blinded));
  return std::move(e).take();
}

EvalRequest EvalRequest::decode(const Group& g, ByteView in) {
  Decoder d(in);
  EvalRequest r;
  r.cookie = d.owned();
  r.blinded = decode_elements(g, d.list());
  d.finish();
  return r;
}

Bytes EvalResponse::encode() const {
  Encoder e;
  e.u32(index).list(element_bytes(evaluations));
  return std::move(e).take();
}

EvalResponse EvalResponse::decode(const Group& g, ByteView in) {
  Decoder d(in);
  EvalResponse r;
  r.index = d.u32();
  r.evaluations = decode_elements(g, d.list());
  d.finish();
  return r;
}

Bytes QueryRequest::encode() const {
  Encoder e;
  e.bytes(cookie).list(element_bytes(hashed)).u8(exemption ? 1 : 0);
  if (exemption) e.bytes(exemption->elt.encode()).str(exemption->auth_code).list(element_bytes(exemption->hashed_exempt));
  return std::move(e).take();
}

QueryRequest QueryRequest::decode(const Group& g, ByteView in) {
  Decoder d(in);
  QueryRequest r;
  r.cookie = d.owned();
  r.hashed = decode_elements(g, d.list());
  const auto flag = d.u8();
  if (flag > 1) throw Error(Errc::Malformed, "exemption flag");
  if (flag == 1) {
    ExemptionPart x;
    x.elt = pki::CertChain::decode(d.bytes());
    x.auth_code = d.str();
    x.hashed_exempt = decode_elements(g, d.list());
    r.exemption = std::move(x);
  }
  d.finish();
  return r;
}

std::string_view verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Clear: return "Clear";
    case VerdictKind::Hit: return "Hit";
    case VerdictKind::HitExempt: return "HitExempt";
  }
  return "?";
}

std::string_view overall_name(Overall o) { return o == Overall::Grant ? "GRANT" : "DENY"; }

Overall overall_of(const std::vector<Verdict>& v) {
  return std::any_of(v.begin(), v.end(), [](const Verdict& x) { return x.kind == VerdictKind::Hit; }) ? Overall::Deny
                                                                                                    : Overall::Grant;
}

Bytes QueryResponse::encode() const {
  std::vector<Bytes> items;
  for (const auto& v : verdicts) {
    Encoder item;
    item.u8(static_cast<std::uint8_t>(v.kind)).str(v.hazard_name).str(v.reason);
    items.push_back(std::move(item).take());
  }
  Encoder e;
  e.list(items).u8(static_cast<std::uint8_t>(overall));
  return std::move(e).take();
}

QueryResponse QueryResponse::decode(ByteView in) {
  Decoder d(in);
  QueryResponse r;
  for (const auto& raw : d.list()) {
    Decoder item(raw);
    Verdict v;
    const auto k = item.u8();
    if (k > 2) throw Error(Errc::Malformed, "verdict kind");
    v.kind = static_cast<VerdictKind>(k);
    v.hazard_name = item.str();
    v.reason = item.str();
    item.finish();
    r.verdicts.push_back(std::move(v));
  }
  const auto o = d.u8();
  if (o != 1 && o != 2) throw Error(Errc::Malformed, "overall");
  r.overall = static_cast<Overall>(o);
  d.finish();
  return r;
}

Bytes BoundResponse::encode() const {
  Encoder e;
  e.bytes(response).bytes(binding);
  return std::move(e).take();
}

BoundResponse BoundResponse::decode(ByteView in) {
  Decoder d(in);
  BoundResponse r;
  r.response = d.owned();
  r.binding = d.owned();
  d.finish();
  return r;
}

Bytes binding_input(ByteView request, ByteView response) {
  auto h = crypto::hash_fields({to_bytes("response-binding"), Bytes(request.begin(), request.end()),
                                Bytes(response.begin(), response.end())});
  return Bytes(h.begin(), h.end());
}

// --- authentication backend -------------------------------------------------

std::string auth_code(ByteView device_secret, Timestamp t) {
  const Timestamp window = t >= 0 ? t / kCodeWindow : -((-t + kCodeWindow - 1) / kCodeWindow);
  Bytes msg(device_secret.begin(), device_secret.end());
  put_u64_be(msg, static_cast<std::uint64_t>(window));
  const auto h = crypto::sha256(msg);
  const std::uint32_t v = get_u32_be(ByteView(h.data(), 4)) % 1000000u;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%06u", v);
  return buf;
}

const Bytes& AuthRegistry::secret(const std::string& device_id) const {
  auto it = devices_.find(device_id);
  if (it == devices_.end()) throw Error(Errc::UnknownDevice, device_id);
  return it->second;
}

AuthResult AuthRegistry::verify(const std::string& device_id, const std::string& code, Timestamp t) const {
  return auth_code(secret(device_id), t) == code ? AuthResult::Ok : AuthResult::Reject;
}

Bytes AuthRequest::encode() const {
  Encoder e;
  e.str(device_id).str(code).i64(timestamp);
  return std::move(e).take();
}

AuthRequest AuthRequest::decode(ByteView in) {
  Decoder d(in);
  AuthRequest r;
  r.device_id = d.str();
  r.code = d.str();
  r.timestamp = d.i64();
  d.finish();
  return r;
}

// --- H-side lookup ------------------------------------------------------------

QueryResponse hdb_lookup(const HazardDb& db, const QueryRequest& req, LookupContext& ctx) {
  if (!ctx.auth || req.cookie != ctx.connection_cookie) throw Error(Errc::BadCookie);
  std::set<GroupElement> exempt;
  if (req.exemption) {
    if (!ctx.exemption_root) throw Error(Errc::BadEltChain, "no exemption root configured");
    const auto& elt = req.exemption->elt;
    auto res = pki::validate_chain(elt, *ctx.exemption_root, ctx.now, revocations_or_empty(ctx.revocations));
    if (!res) throw Error(Errc::BadEltChain, res.describe());
    if (!elt.token || elt.token->type != pki::TokenType::Exemption) throw Error(Errc::BadEltChain, "not an exemption token");
    const auto& device = elt.token->exemption().device_id;
    if (!ctx.check_code || !ctx.check_code(device, req.exemption->auth_code, ctx.now))
      throw Error(Errc::AuthBackendRejected, "device " + device);
    exempt.insert(req.exemption->hashed_exempt.begin(), req.exemption->hashed_exempt.end());
  }
  if (ctx.ledger &&
      ctx.ledger->check(ctx.auth->sigma, req.hashed.size(), ctx.now, ctx.auth->rate_limit) ==
          scep::RateLimitLedger::Decision::Deny)
    throw Error(Errc::RateLimited);

  QueryResponse out;
  out.verdicts.reserve(req.hashed.size());
  for (const auto& h : req.hashed) {
    Verdict v;
    if (const auto* info = db.lookup(h)) {
      v.kind = exempt.contains(h) ? VerdictKind::HitExempt : VerdictKind::Hit;
      if (ctx.annotate) {
        v.hazard_name = info->name;
        v.reason = info->reason;
      }
    }
    out.verdicts.push_back(std::move(v));
  }
  out.overall = overall_of(out.verdicts);
  return out;
}

// --- server roles -------------------------------------------------------------

Bytes ChannelServer::handle(ConnId conn, ByteView inbound) {
  auto it = conns_.find(conn);
  if (it == conns_.end()) it = conns_.try_emplace(conn, group::prod_group(), tls_, cache_, fork(rng_)).first;
  return it->second.handle(inbound, [this, conn](channel::Session&, const Bytes& plain) {
    auto [kind, body] = open_envelope(plain);
    return on_message(conn, kind, body);
  });
}

std::vector<const channel::Session*> ChannelServer::sessions() const {
  std::vector<const channel::Session*> out;
  for (auto& [id, c] : conns_)
    if (c.established()) out.push_back(&const_cast<channel::ServerConnection&>(c).session());
  return out;
}

Bytes ScepServer::on_message(ConnId conn, const std::string& kind, ByteView body) {
  if (kind == "scep-hello") {
    auto [it, _] = sessions_.insert_or_assign(
        conn, scep::ServerSession(cfg_.variant, cfg_.creds, cfg_.trust, fork(rng())));
    return it->second.on_hello(body, net_->now());
  }
  if (kind == "scep-finish") {
    auto it = sessions_.find(conn);
    if (it == sessions_.end()) throw Error(Errc::ProtocolState, "finish before hello");
    const auto& auth = it->second.on_finish(body);
    auth_events_.push_back(AuthEvent{name_, conn, it->second.r_client(), it->second.r_server(), it->second.cookie(),
                                     auth.client_token, it->second.own_token()});
    return scep::ack_message();
  }
  return on_request(conn, kind, body);
}

const scep::Authenticated& ScepServer::require_auth(ConnId conn, ByteView cookie) const {
  auto it = sessions_.find(conn);
  if (it == sessions_.end() || !it->second.authenticated() ||
      !std::equal(cookie.begin(), cookie.end(), it->second.cookie().begin(), it->second.cookie().end()))
    throw Error(Errc::BadCookie);
  return *it->second.authenticated();
}

Bytes Keyserver::on_request(ConnId conn, const std::string& kind, ByteView body) {
  if (kind != "eval") throw Error(Errc::ProtocolState, "keyserver cannot handle " + kind);
  auto req = EvalRequest::decode(group(), body);
  const auto& auth = require_auth(conn, req.cookie);
  if (ledger().check(auth.sigma, req.blinded.size(), network().now(), auth.rate_limit) ==
      scep::RateLimitLedger::Decision::Deny)
    throw Error(Errc::RateLimited);
  EvalResponse resp;
  resp.index = share_.index;
  for (const auto& x : req.blinded) resp.evaluations.push_back(doprf::eval_share(group(), share_, x));
  return resp.encode();
}

bool HashDbServer::check_code(const std::string& device, const std::string& code, Timestamp t) {
  try {
    return request_auth_check(network(), name(), hcfg_.auth_backend, hcfg_.channel_ca, rng(),
                              AuthRequest{device, code, t}) == AuthResult::Ok;
  } catch (const Error& e) {
    throw Error(Errc::AuthBackendRejected, std::string(errc_name(e.code())) + " from auth backend");
  }
}

Bytes HashDbServer::on_request(ConnId conn, const std::string& kind, ByteView body) {
  if (kind != "query") throw Error(Errc::ProtocolState, "database cannot handle " + kind);
  auto req = QueryRequest::decode(group(), body);
  const auto& auth = require_auth(conn, req.cookie);
  LookupContext ctx;
  ctx.now = network().now();
  ctx.ledger = &ledger();
  ctx.auth = &auth;
  ctx.connection_cookie = req.cookie;
  ctx.exemption_root = &hcfg_.exemption_root;
  ctx.revocations = scep_config().trust.revocations;
  ctx.annotate = hcfg_.annotate;
  ctx.check_code = [this](const std::string& d, const std::string& c, Timestamp t) { return check_code(d, c, t); };
  const Bytes response = hdb_lookup(db_, req, ctx).encode();
  BoundResponse out{response, {}};
  if (hcfg_.bind_responses) out.binding = scep_config().creds.token_key.sign(binding_input(body, response));
  return out.encode();
}

Bytes AuthBackend::on_message(ConnId, const std::string& kind, ByteView body) {
  if (kind != "auth-verify") throw Error(Errc::ProtocolState, "auth backend cannot handle " + kind);
  auto req = AuthRequest::decode(body);
  // Judged against the backend's own clock; the requester's timestamp is only recorded.
  const auto result = registry_.verify(req.device_id, req.code, net_->now());
  checks_.push_back({req, result});
  Encoder e;
  e.str(result == AuthResult::Ok ? "OK" : "Reject");
  return std::move(e).take();
}

// --- client helpers ----------------------------------------------------------------

ClientChannel open_channel(net::Network& net, const std::string& from, const std::string& to,
                           const crypto::VerifyKey& channel_ca, Rng& rng) {
  const ConnId conn = net.open(from, to);
  auto session = channel::client_handshake(group::prod_group(), {channel_ca, to}, rng, net::transport(net, conn, "handshake"));
  return ClientChannel{conn, std::move(session)};
}

Bytes call(net::Network& net, ClientChannel& ch, std::string_view kind, ByteView body) {
  const Bytes wire = ch.session.send(envelope(kind, body));
  const Bytes reply = net.exchange(ch.conn, wire, kind);
  channel::throw_if_alert(reply);
  return ch.session.recv(reply);
}

AuthResult request_auth_check(net::Network& net, const std::string& from, const std::string& backend,
                              const crypto::VerifyKey& channel_ca, Rng& rng, const AuthRequest& req) {
  auto ch = open_channel(net, from, backend, channel_ca, rng);
  const Bytes reply = call(net, ch, "auth-verify", req.encode());
  Decoder d(reply);
  const auto verdict = d.str();
  d.finish();
  if (verdict == "OK") return AuthResult::Ok;
  if (verdict == "Reject") return AuthResult::Reject;
  throw Error(Errc::Malformed, "auth verdict");
}

// --- synthesizer ---------------------------------------------------------------

Synthesizer::Synthesizer(std::string name, const Group& g, net::Network& net, SynthConfig cfg, scep::Credentials creds,
                         scep::Trust trust, pki::Certificate exemption_root, crypto::VerifyKey channel_ca, Rng rng)
    : name_(std::move(name)),
      g_(&g),
      net_(&net),
      cfg_(std::move(cfg)),
      creds_(std::move(creds)),
      trust_(std::move(trust)),
      exemption_root_(std::move(exemption_root)),
      channel_ca_(channel_ca),
      rng_(std::move(rng)) {
  if (cfg_.threshold < 1) throw Error(Errc::InvalidThreshold, "t must be at least 1");
}

Synthesizer::Connection Synthesizer::establish(const std::string& server, std::optional<std::string> keyserver_target,
                                               const channel::Session* resume_from, std::optional<Errc>* refusal) {
  std::optional<ClientChannel> ch;
  bool resumed = false;
  if (resume_from) {
    const ConnId conn = net_->open(name_, server);
    try {
      ch.emplace(ClientChannel{conn, channel::client_resume(*resume_from, net::transport(*net_, conn, "resume"))});
      resumed = true;
    } catch (const Error& e) {
      if (e.code() != Errc::ResumptionDisabled) throw;
      if (refusal) *refusal = e.code();
    }
  }
  if (!ch) ch.emplace(open_channel(*net_, name_, server, channel_ca_, rng_));
  Connection c{server, std::move(*ch), nullptr, resumed};

  c.scep = std::make_unique<scep::ClientSession>(cfg_.variant, creds_, trust_, rng_);
  const Bytes response = call(*net_, c.channel, "scep-hello", c.scep->hello(std::move(keyserver_target)));
  const Bytes finish = c.scep->on_response(response, c.channel.session, net_->now());
  c.scep->on_ack(call(*net_, c.channel, "scep-finish", finish));
  return c;
}

void Synthesizer::connect() {
  keyservers_.clear();
  skipped_.clear();
  for (const auto& ks : cfg_.keyservers) {
    if (keyservers_.size() == cfg_.threshold) break;
    try {
      keyservers_.push_back(establish(ks, ks, nullptr, nullptr));
    } catch (const Error& e) {
      skipped_.emplace_back(ks, e.code());
    }
  }
  if (keyservers_.size() < cfg_.threshold)
    throw Error(Errc::WrongResponseCount, std::to_string(keyservers_.size()) + " keyservers reachable, need " +
                                              std::to_string(cfg_.threshold));
  hdb_ = establish(cfg_.hdb, std::nullopt, nullptr, nullptr);
}

const Synthesizer::Connection& Synthesizer::hdb_connection() const {
  if (!hdb_) throw Error(Errc::ProtocolState, "not connected");
  return *hdb_;
}

std::optional<Errc> Synthesizer::reconnect_hdb(bool try_resume) {
  if (!hdb_) throw Error(Errc::ProtocolState, "not connected");
  retired_.push_back(std::move(*hdb_));
  hdb_.reset();
  std::optional<Errc> refusal;
  auto next = establish(cfg_.hdb, std::nullopt, try_resume ? &retired_.back().channel.session : nullptr, &refusal);
  hdb_ = std::move(next);
  return refusal;
}

void Synthesizer::check_order(const std::vector<Bytes>& order) const {
  if (order.empty()) throw Error(Errc::Malformed, "empty order");
  for (const auto& s : order)
    if (s.empty() || s.size() > cfg_.max_sequence_length)
      throw Error(Errc::Malformed, "sequence length " + std::to_string(s.size()) + " outside 1.." +
                                       std::to_string(cfg_.max_sequence_length));
}

std::vector<GroupElement> Synthesizer::keyed_hashes(const std::vector<Bytes>& seqs) {
  if (seqs.empty()) return {};
  if (keyservers_.size() != cfg_.threshold) throw Error(Errc::ProtocolState, "not connected");
  const auto beta = doprf::fresh_blind(*g_, rng_);
  EvalRequest req;
  for (const auto& s : seqs) req.blinded.push_back(doprf::blind(*g_, g_->hash_to_group(s), beta));

  std::vector<std::vector<doprf::PartialEvaluation>> partials(seqs.size());
  for (auto& ks : keyservers_) {
    req.cookie = ks.scep->cookie();
    auto resp = EvalResponse::decode(*g_, call(*net_, ks.channel, "eval", req.encode()));
    const auto index = ks.scep->server_token()->keyserver().share_index;
    if (resp.evaluations.size() != seqs.size())
      throw Error(Errc::WrongResponseCount, ks.server + " returned " + std::to_string(resp.evaluations.size()));
    if (resp.index != index) throw Error(Errc::Malformed, ks.server + " answered with another share index");
    for (std::size_t i = 0; i < seqs.size(); ++i) partials[i].push_back({index, resp.evaluations[i]});
  }
  std::vector<GroupElement> out;
  out.reserve(seqs.size());
  for (const auto& p : partials) out.push_back(doprf::unblind(*g_, doprf::combine(*g_, p, cfg_.threshold), beta));
  return out;
}

QueryResult Synthesizer::query_hdb(const QueryRequest& req, std::size_t expected) {
  if (!hdb_) throw Error(Errc::ProtocolState, "not connected");
  const Bytes body = req.encode();
  auto bound = BoundResponse::decode(call(*net_, hdb_->channel, "query", body));
  if (cfg_.bind_responses &&
      !crypto::verify(hdb_->scep->server_token()->subject_key, binding_input(body, bound.response), bound.binding))
    throw Error(Errc::BadResponseBinding);
  QueryResult r{QueryResponse::decode(bound.response)};
  if (r.response.verdicts.size() != expected)
    throw Error(Errc::WrongResponseCount, std::to_string(r.response.verdicts.size()) + " verdicts for " +
                                              std::to_string(expected) + " sequences");
  if (r.response.overall != overall_of(r.response.verdicts)) throw Error(Errc::Malformed, "inconsistent overall");
  return r;
}

QueryResult Synthesizer::basic_query(const std::vector<Bytes>& order) {
  check_order(order);
  if (!hdb_) throw Error(Errc::ProtocolState, "not connected");
  QueryRequest req{hdb_->scep->cookie(), keyed_hashes(order), std::nullopt};
  return query_hdb(req, order.size());
}

QueryResult Synthesizer::exemption_query(const std::vector<Bytes>& order, const pki::CertChain& elt,
                                         const std::string& code) {
  check_order(order);
  if (!hdb_) throw Error(Errc::ProtocolState, "not connected");
  auto res = pki::validate_chain(elt, exemption_root_, net_->now(), revocations_or_empty(trust_.revocations));
  if (!res) throw Error(Errc::BadEltChain, res.describe());
  if (!elt.token || elt.token->type != pki::TokenType::Exemption) throw Error(Errc::BadEltChain, "not an exemption token");
  auto hashed = keyed_hashes(order);
  auto exempt = keyed_hashes(elt.token->exemption().sequences);
  QueryRequest req{hdb_->scep->cookie(), std::move(hashed), ExemptionPart{elt, code, std::move(exempt)}};
  return query_hdb(req, order.size());
}

}  // namespace sdna::screening

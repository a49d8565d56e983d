#include "sdna/scep.hpp"

#include <limits>
#include <stdexcept>

#include "sdna/encoding.hpp"

namespace sdna::scep {

std::string_view variant_name(Variant v) { return v == Variant::Scep ? "scep" : "scep-plus"; }

Variant parse_variant(std::string_view s) {
  if (s == "scep") return Variant::Scep;
  if (s == "scep-plus") return Variant::ScepPlus;
  throw std::invalid_argument("unknown SCEP variant: " + std::string(s));
}

std::string_view state_name(State s) {
  switch (s) {
    case State::Init: return "Init";
    case State::HelloSent: return "HelloSent";
    case State::Responded: return "Responded";
    case State::Finished: return "Finished";
    case State::Failed: return "Failed";
  }
  return "?";
}

Bytes Hello::encode() const {
  if (r_client.size() != kNonceSize) throw Error(Errc::Malformed, "r_S must be 32 bytes");
  Bytes out = r_client;
  Encoder e;
  e.bytes(chain.encode());
  if (keyserver_target) e.str("keyserver").str(*keyserver_target);
  append(out, e.data());
  return out;
}

Hello Hello::decode(ByteView in) {
  if (in.size() < kNonceSize) throw Error(Errc::Malformed, "short hello");
  Hello h;
  h.r_client.assign(in.begin(), in.begin() + kNonceSize);
  Decoder d(in.subspan(kNonceSize));
  h.chain = pki::CertChain::decode(d.bytes());
  if (!d.done()) {
    if (d.str() != "keyserver") throw Error(Errc::Malformed, "hello trailer");
    h.keyserver_target = d.str();
  }
  d.finish();
  return h;
}

Bytes Response::encode() const {
  Encoder e;
  e.bytes(cookie).bytes(r_server).bytes(chain.encode()).bytes(signature);
  return std::move(e).take();
}

Response Response::decode(ByteView in) {
  Decoder d(in);
  Response r;
  r.cookie = d.fixed(kCookieSize);
  r.r_server = d.fixed(kNonceSize);
  r.chain = pki::CertChain::decode(d.bytes());
  r.signature = d.owned();
  d.finish();
  return r;
}

Bytes Finish::encode() const {
  Encoder e;
  e.bytes(cookie).bytes(signature);
  return std::move(e).take();
}

Finish Finish::decode(ByteView in) {
  Decoder d(in);
  Finish f;
  f.cookie = d.fixed(kCookieSize);
  f.signature = d.owned();
  d.finish();
  return f;
}

Bytes ack_message() {
  Encoder e;
  e.str("scep-ok");
  return std::move(e).take();
}

namespace {

Bytes signed_input(std::string_view label, Variant v, ByteView r_client, ByteView r_server, ByteView cookie,
                   const pki::Token& client_token, const pki::Token& server_token, bool scep_token_is_client) {
  Encoder e;
  e.str(label).bytes(r_client).bytes(r_server);
  if (v == Variant::Scep) {
    e.bytes(scep_token_is_client ? client_token.encode() : server_token.encode());
  } else {
    e.bytes(cookie).bytes(client_token.encode()).bytes(server_token.encode());
  }
  return std::move(e).take();
}

}  // namespace

Bytes server_signed_input(Variant v, ByteView r_client, ByteView r_server, ByteView cookie,
                          const pki::Token& client_token, const pki::Token& server_token) {
  return signed_input("server-mutauth", v, r_client, r_server, cookie, client_token, server_token, false);
}

Bytes client_signed_input(Variant v, ByteView r_client, ByteView r_server, ByteView cookie,
                          const pki::Token& client_token, const pki::Token& server_token) {
  return signed_input("client-mutauth", v, r_client, r_server, cookie, client_token, server_token, true);
}

ClientSession::ClientSession(Variant v, Credentials creds, Trust trust, Rng& rng)
    : variant_(v), creds_(std::move(creds)), trust_(std::move(trust)), rng_(&rng) {
  if (!creds_.chain.token) throw Error(Errc::Malformed, "client credentials need a token");
}

Bytes ClientSession::hello(std::optional<std::string> keyserver_target) {
  if (state_ != State::Init) throw Error(Errc::ProtocolState, "hello already sent");
  r_client_ = rng_->bytes(kNonceSize);
  state_ = State::HelloSent;
  return Hello{r_client_, creds_.chain, std::move(keyserver_target)}.encode();
}

Bytes ClientSession::on_response(ByteView wire, const channel::Session& channel, Timestamp now) {
  if (state_ != State::HelloSent) throw Error(Errc::ProtocolState, "unexpected response");
  state_ = State::Failed;
  Response r = Response::decode(wire);
  static const pki::RevocationList kNone;
  const auto& revs = trust_.revocations ? *trust_.revocations : kNone;
  auto res = pki::validate_chain(r.chain, trust_.infrastructure_root, now, revs);
  if (!res) throw Error(Errc::BadServerChain, res.describe());
  const auto& tok = *r.chain.token;
  if (tok.type != pki::TokenType::KeyserverInfra && tok.type != pki::TokenType::DatabaseInfra)
    throw Error(Errc::BadServerChain, "not an infrastructure token");
  if (!channel.peer() || channel.peer()->key != tok.subject_key)
    throw Error(Errc::BadServerChain, "token key is not the channel peer's key");
  const auto& own = *creds_.chain.token;
  if (!crypto::verify(tok.subject_key, server_signed_input(variant_, r_client_, r.r_server, r.cookie, own, tok),
                      r.signature))
    throw Error(Errc::BadServerSig);
  r_server_ = r.r_server;
  cookie_ = r.cookie;
  server_token_ = tok;
  Finish f{cookie_, creds_.token_key.sign(client_signed_input(variant_, r_client_, r_server_, cookie_, own, tok))};
  state_ = State::Responded;
  return f.encode();
}

void ClientSession::on_ack(ByteView ack) {
  if (state_ != State::Responded) throw Error(Errc::ProtocolState, "unexpected ack");
  if (Bytes(ack.begin(), ack.end()) != ack_message()) {
    state_ = State::Failed;
    throw Error(Errc::Malformed, "bad ack");
  }
  state_ = State::Finished;
}

ServerSession::ServerSession(Variant v, Credentials creds, Trust trust, Rng rng)
    : variant_(v), creds_(std::move(creds)), trust_(std::move(trust)), rng_(std::move(rng)) {
  if (!creds_.chain.token) throw Error(Errc::Malformed, "server credentials need a token");
}

Bytes ServerSession::on_hello(ByteView wire, Timestamp now) {
  if (state_ != State::Init) throw Error(Errc::ProtocolState, "hello already received");
  state_ = State::Failed;
  Hello h = Hello::decode(wire);
  static const pki::RevocationList kNone;
  const auto& revs = trust_.revocations ? *trust_.revocations : kNone;
  auto res = pki::validate_chain(h.chain, trust_.manufacturer_root, now, revs);
  if (!res) {
    if (res.code == Errc::Revoked) throw Error(Errc::Revoked, res.describe());
    throw Error(Errc::BadClientChain, res.describe());
  }
  if (!h.chain.token || h.chain.token->type != pki::TokenType::Synthesizer)
    throw Error(Errc::BadClientChain, "not a synthesizer token");
  r_client_ = h.r_client;
  r_server_ = rng_.bytes(kNonceSize);
  cookie_ = rng_.bytes(kCookieSize);
  const auto& own = *creds_.chain.token;
  Response r{cookie_, r_server_, creds_.chain,
             creds_.token_key.sign(server_signed_input(variant_, r_client_, r_server_, cookie_, *h.chain.token, own))};
  hello_ = std::move(h);
  state_ = State::Responded;
  return r.encode();
}

const Authenticated& ServerSession::on_finish(ByteView wire) {
  if (state_ != State::Responded) throw Error(Errc::ProtocolState, "unexpected finish");
  Finish f = Finish::decode(wire);
  if (f.cookie != cookie_) {
    state_ = State::Failed;
    throw Error(Errc::BadCookie);
  }
  const auto& client_token = *hello_->chain.token;
  if (!crypto::verify(client_token.subject_key,
                      client_signed_input(variant_, r_client_, r_server_, cookie_, client_token, own_token()),
                      f.signature)) {
    state_ = State::Failed;
    throw Error(Errc::BadClientSig);
  }
  auth_ = Authenticated{client_token.sigma, client_token.synthesizer().rate_limit, client_token};
  state_ = State::Finished;
  return *auth_;
}

RateLimitLedger::Decision RateLimitLedger::check(const TokenId& sigma, std::uint64_t requested, Timestamp now,
                                                 std::uint64_t limit) {
  const std::uint64_t used = window_total(sigma, now);
  if (used > limit || requested > limit - used) return Decision::Deny;
  entries_[sigma].push_back({now, requested});
  return Decision::Allow;
}

std::uint64_t RateLimitLedger::window_total(const TokenId& sigma, Timestamp now) const {
  auto it = entries_.find(sigma);
  if (it == entries_.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& e : it->second) {
    if (e.at <= now - kRateWindow) continue;
    total = e.count > std::numeric_limits<std::uint64_t>::max() - total ? std::numeric_limits<std::uint64_t>::max()
                                                                        : total + e.count;
  }
  return total;
}

const std::vector<RateLimitLedger::Entry>& RateLimitLedger::history(const TokenId& sigma) const {
  static const std::vector<Entry> kEmpty;
  auto it = entries_.find(sigma);
  return it == entries_.end() ? kEmpty : it->second;
}

}  // namespace sdna::scep

#include "sdna/channel.hpp"

#include "sdna/encoding.hpp"

namespace sdna::channel {

namespace {

Bytes digest_bytes(const crypto::Digest& d) { return Bytes(d.begin(), d.end()); }

Bytes frame(std::vector<Bytes> fields) {
  Bytes out{kHandshakeTag};
  Encoder e;
  for (const auto& f : fields) e.bytes(f);
  append(out, e.data());
  return out;
}

/// Splits a handshake frame; throws Malformed unless its first field is `type`.
std::vector<Bytes> parse_frame(ByteView wire, std::string_view type, std::size_t nfields) {
  throw_if_alert(wire);
  std::vector<Bytes> fields;
  if (!is_handshake(wire) || !try_split_fields(wire.subspan(1), fields) || fields.size() != nfields ||
      to_string(fields[0]) != type)
    throw Error(Errc::Malformed, "expected " + std::string(type));
  return fields;
}

Bytes kx_message(ByteView r_client, ByteView r_server, const GroupElement& share) {
  return digest_bytes(crypto::hash_fields({to_bytes("server-key-exchange"), Bytes(r_client.begin(), r_client.end()),
                                           Bytes(r_server.begin(), r_server.end()), share.bytes()}));
}

}  // namespace

Bytes TlsIdentity::signed_part() const {
  Encoder e;
  e.str("tls-identity").str(name).bytes(key.bytes);
  return std::move(e).take();
}

Bytes TlsIdentity::encode() const {
  Encoder e;
  e.str(name).bytes(key.bytes).bytes(ca_signature);
  return std::move(e).take();
}

TlsIdentity TlsIdentity::decode(ByteView in) {
  Decoder d(in);
  TlsIdentity id;
  id.name = d.str();
  id.key = VerifyKey::from_bytes(d.bytes());
  id.ca_signature = d.owned();
  d.finish();
  return id;
}

TlsIdentity certify(const SigningKey& ca, const std::string& name, const VerifyKey& key) {
  TlsIdentity id{name, key, {}};
  id.ca_signature = ca.sign(id.signed_part());
  return id;
}

bool verify_identity(const VerifyKey& ca, const TlsIdentity& id) {
  return crypto::verify(ca, id.signed_part(), id.ca_signature);
}

SessionKeys derive_keys(const GroupElement& pms, ByteView r_client, ByteView r_server) {
  const Bytes rc(r_client.begin(), r_client.end());
  const Bytes rs(r_server.begin(), r_server.end());
  auto key = [&](const char* label) {
    return SymmetricKey::from_bytes(digest_bytes(crypto::hash_fields({pms.bytes(), rc, rs, to_bytes(label)})));
  };
  return {key("client-write"), key("server-write"), digest_bytes(crypto::hash_fields({to_bytes("session-id"), rc, rs}))};
}

Bytes finished_mac(const GroupElement& pms, ByteView r_client, ByteView r_server, std::string_view label,
                   ByteView transcript) {
  const Bytes master = digest_bytes(crypto::hash_fields(
      {pms.bytes(), Bytes(r_client.begin(), r_client.end()), Bytes(r_server.begin(), r_server.end()), to_bytes("master")}));
  return digest_bytes(crypto::hash_fields(
      {master, to_bytes(label), digest_bytes(crypto::sha256(transcript))}));
}

const SymmetricKey& Session::write_key() const {
  return side_ == Side::Client ? keys_.client_write : keys_.server_write;
}

const SymmetricKey& Session::read_key() const {
  return side_ == Side::Client ? keys_.server_write : keys_.client_write;
}

Bytes Session::send(ByteView plaintext) {
  auto dir = side_ == Side::Client ? crypto::Direction::ClientToServer : crypto::Direction::ServerToClient;
  auto rec = crypto::aead_seal(write_key(), dir, send_seq_, plaintext);
  ++send_seq_;
  return rec.encode();
}

Bytes Session::recv(ByteView wire) {
  throw_if_alert(wire);
  auto rec = crypto::Record::decode(wire);
  auto expected = side_ == Side::Client ? crypto::Direction::ServerToClient : crypto::Direction::ClientToServer;
  if (rec.direction != expected) throw Error(Errc::AuthenticationFailure, "record direction");
  auto plain = crypto::aead_open(read_key(), recv_seq_, rec);
  ++recv_seq_;
  return plain;
}

Session Session::resumed(bool enabled) const {
  if (!enabled) throw Error(Errc::ResumptionDisabled);
  return Session(side_, keys_, peer_);
}

Bytes alert_frame(Errc code, const std::string& detail) {
  Bytes out{kAlertTag};
  Encoder e;
  e.u8(static_cast<std::uint8_t>(code)).str(detail);
  append(out, e.data());
  return out;
}

void throw_if_alert(ByteView wire) {
  if (wire.empty() || wire[0] != kAlertTag) return;
  Decoder d(wire.subspan(1));
  auto code = static_cast<Errc>(d.u8());
  auto detail = d.str();
  throw Error(code, detail);
}

bool is_handshake(ByteView wire) { return !wire.empty() && wire[0] == kHandshakeTag; }

Session client_handshake(const Group& g, const ClientConfig& cfg, Rng& rng, const Transport& transport) {
  const Bytes r_client = rng.bytes(32);
  const Bytes hello = frame({to_bytes("client-hello"), r_client});
  const Bytes sh_wire = transport(hello);
  auto sh = parse_frame(sh_wire, "server-hello", 5);
  const Bytes& r_server = sh[1];
  TlsIdentity id;
  try {
    id = TlsIdentity::decode(sh[2]);
  } catch (const Error&) {
    throw Error(Errc::BadServerCert, "undecodable");
  }
  if (!verify_identity(cfg.trusted_ca, id)) throw Error(Errc::BadServerCert, "not signed by the channel CA");
  if (id.name != cfg.server_name) throw Error(Errc::BadServerCert, "expected " + cfg.server_name + ", got " + id.name);
  const GroupElement server_share = g.decode_element(sh[3]);
  if (!crypto::verify(id.key, kx_message(r_client, r_server, server_share), sh[4]))
    throw Error(Errc::BadKeyExchangeSig);

  const Scalar e_client = g.random_nonzero_scalar(rng);
  const GroupElement client_share = g.exp(g.generator(), e_client);
  const GroupElement pms = g.exp(server_share, e_client);
  Bytes transcript = concat(hello, sh_wire);
  append(transcript, client_share.bytes());
  const Bytes c_fin = finished_mac(pms, r_client, r_server, "client finished", transcript);
  const Bytes kx = frame({to_bytes("client-key-exchange"), client_share.bytes(), c_fin});
  append(transcript, c_fin);
  auto sf = parse_frame(transport(kx), "server-finished", 2);
  if (sf[1] != finished_mac(pms, r_client, r_server, "server finished", transcript))
    throw Error(Errc::FinishedMismatch, "server finished");
  return Session(Side::Client, derive_keys(pms, r_client, r_server), id);
}

Session client_resume(const Session& old, const Transport& transport) {
  auto reply = parse_frame(transport(frame({to_bytes("resume"), old.keys().session_id})), "resume-ok", 2);
  if (reply[1] != old.keys().session_id) throw Error(Errc::Malformed, "resume-ok for another session");
  return old.resumed(true);
}

Session& ServerConnection::session() {
  if (!session_) throw Error(Errc::ProtocolState, "channel not established");
  return *session_;
}

Bytes ServerConnection::on_handshake(ByteView wire) {
  std::vector<Bytes> fields;
  if (!try_split_fields(wire.subspan(1), fields) || fields.empty()) throw Error(Errc::Malformed, "handshake frame");
  const std::string type = to_string(fields[0]);
  if (type == "client-hello" && fields.size() == 2 && !session_ && !e_server_) {
    r_client_ = fields[1];
    r_server_ = rng_.bytes(32);
    e_server_ = g_->random_nonzero_scalar(rng_);
    const GroupElement share = g_->exp(g_->generator(), *e_server_);
    Bytes sh = frame({to_bytes("server-hello"), r_server_, cfg_->identity.encode(), share.bytes(),
                      cfg_->identity_key.sign(kx_message(r_client_, r_server_, share))});
    transcript_ = Bytes(wire.begin(), wire.end());
    append(transcript_, sh);
    return sh;
  }
  if (type == "client-key-exchange" && fields.size() == 3 && e_server_ && !session_) {
    const GroupElement client_share = g_->decode_element(fields[1]);
    const GroupElement pms = g_->exp(client_share, *e_server_);
    append(transcript_, client_share.bytes());
    if (fields[2] != finished_mac(pms, r_client_, r_server_, "client finished", transcript_))
      throw Error(Errc::FinishedMismatch, "client finished");
    append(transcript_, fields[2]);
    auto keys = derive_keys(pms, r_client_, r_server_);
    cache_->sessions[keys.session_id] = keys;
    session_.emplace(Side::Server, keys);
    e_server_.reset();
    return frame({to_bytes("server-finished"), finished_mac(pms, r_client_, r_server_, "server finished", transcript_)});
  }
  if (type == "resume" && fields.size() == 2 && !session_ && !e_server_) {
    if (!cfg_->resumption) throw Error(Errc::ResumptionDisabled);
    auto it = cache_->sessions.find(fields[1]);
    if (it == cache_->sessions.end()) throw Error(Errc::ResumptionDisabled, "unknown session");
    session_.emplace(Side::Server, it->second);
    return frame({to_bytes("resume-ok"), fields[1]});
  }
  throw Error(Errc::ProtocolState, "unexpected " + type);
}

Bytes ServerConnection::handle(ByteView inbound, const AppHandler& app) {
  try {
    if (is_handshake(inbound)) return on_handshake(inbound);
    auto plain = session().recv(inbound);
    auto reply = app(*session_, plain);
    return session_->send(reply);
  } catch (const Error& e) {
    return alert_frame(e.code(), e.detail());
  }
}

}  // namespace sdna::channel

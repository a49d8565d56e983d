#include "sdna/simnet.hpp"

#include <json.hpp>

namespace sdna::simnet {

void Transcript::append(TranscriptRecord r) {
  r.step = records_.size();
  records_.push_back(std::move(r));
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["time"] = r.time;
    j["link"] = r.link;
    j["from"] = r.from;
    j["to"] = r.to;
    j["event"] = r.event;
    j["label"] = r.label;
    j["bytes"] = to_hex(r.bytes);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_jsonl(std::string_view text) {
  Transcript t;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      TranscriptRecord r;
      r.time = j.at("time").get<Timestamp>();
      r.link = j.at("link").get<std::string>();
      r.from = j.at("from").get<std::string>();
      r.to = j.at("to").get<std::string>();
      r.event = j.at("event").get<std::string>();
      r.label = j.at("label").get<std::string>();
      r.bytes = from_hex(j.at("bytes").get<std::string>());
      const auto step = j.at("step").get<std::uint64_t>();
      t.append(std::move(r));
      if (t.records_.back().step != step) throw Error(Errc::Malformed, "transcript steps out of order");
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Malformed, std::string("transcript line: ") + e.what());
    }
  }
  return t;
}

void SimNetwork::add(const std::string& name, net::Endpoint& endpoint) { endpoints_[name] = &endpoint; }

void SimNetwork::set_reachable(const std::string& name, bool reachable) { unreachable_[name] = !reachable; }

ConnId SimNetwork::open(const std::string& from, const std::string& to) {
  auto u = unreachable_.find(to);
  if (!endpoints_.contains(to) || (u != unreachable_.end() && u->second))
    throw Error(Errc::Dropped, to + " unreachable");
  const auto k = pair_counts_[{from, to}]++;
  Link l{links_.size() + 1, from + "->" + to + "#" + std::to_string(k), from, to};
  links_.push_back(l);
  record(l, "open", "", {}, false);
  return l.conn;
}

const Link& SimNetwork::link(ConnId conn) const {
  if (conn == 0 || conn > links_.size()) throw Error(Errc::ProtocolState, "no such connection");
  return links_[conn - 1];
}

std::optional<ConnId> SimNetwork::find_link(std::string_view id) const {
  for (const auto& l : links_)
    if (l.id == id) return l.conn;
  return std::nullopt;
}

void SimNetwork::record(const Link& l, std::string event, std::string label, ByteView bytes, bool reply) {
  transcript_.append(TranscriptRecord{0, now_, l.id, reply ? l.to : l.from, reply ? l.from : l.to, std::move(event),
                                      std::move(label), Bytes(bytes.begin(), bytes.end())});
}

bool SimNetwork::run_taps(InFlight& m) {
  const Link& l = link(m.conn);
  const bool reply = m.direction == Direction::Reply;
  for (auto& [id, tap] : taps_) {
    const Bytes before = m.bytes;
    switch (tap(m)) {
      case TapAction::Deliver: m.bytes = before; break;
      case TapAction::Drop: record(l, "drop", m.label, before, reply); return false;
      case TapAction::Replace: record(l, "replace", m.label, m.bytes, reply); break;
    }
  }
  return true;
}

Bytes SimNetwork::exchange(ConnId conn, ByteView message, std::string_view label) {
  const Link l = link(conn);
  record(l, "send", std::string(label), message, false);
  InFlight req{conn, l.id, l.from, l.to, std::string(label), Direction::Request, Bytes(message.begin(), message.end())};
  if (!run_taps(req)) throw Error(Errc::Dropped, l.id + " " + std::string(label));
  Bytes reply = endpoints_.at(l.to)->handle(conn, req.bytes);
  record(l, "reply", std::string(label), reply, true);
  InFlight rep{conn, l.id, l.from, l.to, std::string(label), Direction::Reply, std::move(reply)};
  if (!run_taps(rep)) throw Error(Errc::Dropped, l.id + " reply to " + std::string(label));
  return std::move(rep.bytes);
}

Bytes SimNetwork::inject(ConnId conn, ByteView message, std::string_view label) {
  const Link l = link(conn);
  record(l, "inject", std::string(label), message, false);
  Bytes reply = endpoints_.at(l.to)->handle(conn, message);
  record(l, "reply", std::string(label), reply, true);
  return reply;
}

void SimNetwork::advance(Timestamp seconds) {
  if (seconds < 0) throw Error(Errc::ScriptError, "clock cannot go backwards");
  now_ += seconds;
  transcript_.append(TranscriptRecord{0, now_, "", "", "", "clock", std::to_string(seconds), {}});
}

void SimNetwork::note(const std::string& label) {
  transcript_.append(TranscriptRecord{0, now_, "", "", "", "note", label, {}});
}

std::size_t SimNetwork::add_tap(Tap tap) {
  taps_.emplace(next_tap_, std::move(tap));
  return next_tap_++;
}

void SimNetwork::remove_tap(std::size_t id) { taps_.erase(id); }

}  // namespace sdna::simnet

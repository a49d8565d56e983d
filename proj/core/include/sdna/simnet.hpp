#pragma once

// Deterministic in-process network. Every message between roles passes
// through the adversary's taps and is appended to the transcript; delivery is
// a synchronous call into the receiving endpoint, so a server may itself open
// connections while handling a message.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdna/net.hpp"

namespace sdna::simnet {

using net::ConnId;
using pki::Timestamp;

struct TranscriptRecord {
  std::uint64_t step = 0;
  Timestamp time = 0;
  std::string link;  // "from->to#k"; empty for clock events
  std::string from, to;
  std::string event;  // open, send, reply, drop, replace, inject, clock
  std::string label;
  Bytes bytes;
  bool operator==(const TranscriptRecord&) const = default;
};

class Transcript {
 public:
  void append(TranscriptRecord r);
  const std::vector<TranscriptRecord>& records() const { return records_; }
  /// One JSON object per line, fields in a fixed order, bytes as hex.
  std::string to_jsonl() const;
  static Transcript from_jsonl(std::string_view text);
  bool operator==(const Transcript&) const = default;

 private:
  std::vector<TranscriptRecord> records_;
};

enum class Direction : std::uint8_t { Request, Reply };

/// What a tap sees; `bytes` may be rewritten.
struct InFlight {
  ConnId conn = 0;
  std::string link, from, to, label;
  Direction direction = Direction::Request;
  Bytes bytes;
};

enum class TapAction : std::uint8_t { Deliver, Drop, Replace };
/// Taps run in order; the first Drop wins, Replace rewrites for later taps.
using Tap = std::function<TapAction(InFlight&)>;

struct Link {
  ConnId conn = 0;
  std::string id, from, to;
};

class SimNetwork : public net::Network {
 public:
  explicit SimNetwork(Timestamp start = 0) : now_(start) {}

  /// Registers (or replaces) the endpoint reachable as `name`.
  void add(const std::string& name, net::Endpoint& endpoint);
  bool has(const std::string& name) const { return endpoints_.contains(name); }
  void set_reachable(const std::string& name, bool reachable);

  ConnId open(const std::string& from, const std::string& to) override;
  Bytes exchange(ConnId conn, ByteView message, std::string_view label) override;
  Timestamp now() const override { return now_; }

  void advance(Timestamp seconds);
  /// Sends adversary-chosen bytes on an existing connection as if from its
  /// client; returns the reply.
  Bytes inject(ConnId conn, ByteView message, std::string_view label);

  std::size_t add_tap(Tap tap);
  void remove_tap(std::size_t id);

  const Link& link(ConnId conn) const;
  std::optional<ConnId> find_link(std::string_view id) const;
  const std::vector<Link>& links() const { return links_; }
  const Transcript& transcript() const { return transcript_; }
  /// Records a scenario annotation; visible to nobody but the reader.
  void note(const std::string& label);

 private:
  void record(const Link& l, std::string event, std::string label, ByteView bytes, bool reply);
  /// Returns false if dropped.
  bool run_taps(InFlight& m);

  Timestamp now_;
  std::map<std::string, net::Endpoint*> endpoints_;
  std::map<std::string, bool> unreachable_;
  std::vector<Link> links_;  // index = conn - 1
  std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts_;
  std::map<std::size_t, Tap> taps_;
  std::size_t next_tap_ = 0;
  Transcript transcript_;
};

}  // namespace sdna::simnet

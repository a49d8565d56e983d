#pragma once

// What protocol roles need from a network: open a connection, send one
// message and get the reply. The simulator implements this with an
// adversary sitting on every link.

#include <cstdint>
#include <string>
#include <string_view>

#include "sdna/bytes.hpp"
#include "sdna/channel.hpp"
#include "sdna/pki.hpp"

namespace sdna::net {

using ConnId = std::uint64_t;

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  /// One inbound message on `conn`; returns the reply.
  virtual Bytes handle(ConnId conn, ByteView inbound) = 0;
};

class Network {
 public:
  virtual ~Network() = default;
  /// Throws Error(Dropped) if `to` cannot be reached.
  virtual ConnId open(const std::string& from, const std::string& to) = 0;
  /// Throws Error(Dropped) if the message or its reply is dropped.
  virtual Bytes exchange(ConnId conn, ByteView message, std::string_view label) = 0;
  virtual pki::Timestamp now() const = 0;
};

inline channel::Transport transport(Network& net, ConnId conn, std::string label) {
  return [&net, conn, label = std::move(label)](Bytes in) { return net.exchange(conn, in, label); };
}

}  // namespace sdna::net

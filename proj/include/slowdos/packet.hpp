#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slowdos/ipv4.hpp"

namespace slowdos {

/// Timestamps are integer microseconds since the trace epoch.
using Micros = std::int64_t;

inline double to_seconds(Micros t) { return static_cast<double>(t) * 1e-6; }
Micros from_seconds(double s);

namespace tcp {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
}  // namespace tcp

struct Endpoint {
  Ipv4 ip;
  std::uint16_t port = 0;

  friend constexpr auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// One TCP header event.
struct PacketRecord {
  Micros ts = 0;
  Ipv4 src_ip;
  Ipv4 dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t flags = 0;
  std::uint32_t payload_len = 0;

  bool has(std::uint8_t f) const { return (flags & f) != 0; }
  bool is_syn() const { return has(tcp::kSyn); }
  bool is_pure_ack() const {
    return has(tcp::kAck) && !has(tcp::kSyn) && !has(tcp::kFin) &&
           !has(tcp::kRst) && payload_len == 0;
  }
  bool closes() const { return has(tcp::kFin) || has(tcp::kRst); }

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

/// A target-filtered packet stream plus ground truth.
struct LabeledTrace {
  std::vector<PacketRecord> packets;
  std::set<Ipv4> attacker_ips;
  Endpoint target;
  std::optional<std::string> tool;

  bool to_target(const PacketRecord& p) const {
    return p.dst_ip == target.ip && p.dst_port == target.port;
  }
  bool from_target(const PacketRecord& p) const {
    return p.src_ip == target.ip && p.src_port == target.port;
  }
  /// The non-target side of a packet.
  Ipv4 client_of(const PacketRecord& p) const {
    return to_target(p) ? p.src_ip : p.dst_ip;
  }

  /// Every client IP seen in the packet stream.
  std::set<Ipv4> client_ips() const;
  std::set<Ipv4> benign_ips() const;
};

/// Stable sort by timestamp (capture order kept on ties).
void sort_packets(std::vector<PacketRecord>& packets);

}  // namespace slowdos

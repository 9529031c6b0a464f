#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "slowdos/packet.hpp"
#include "slowdos/running_stats.hpp"

namespace slowdos {

/// One TCP connection, oriented so that the client is the non-target side.
struct FlowKey {
  Ipv4 client_ip;
  std::uint16_t client_port = 0;
  Ipv4 server_ip;
  std::uint16_t server_port = 0;

  friend constexpr auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

FlowKey flow_key_of(const PacketRecord& pkt, Endpoint target);

struct HandshakePolicy {
  bool include_handshake = true;
};

enum class HandshakePhase { AwaitSyn, AwaitAck, Established };

/// Online per-connection metrics. Only client->server packets that are
/// eligible under the handshake policy feed the counters.
struct ConnectionState {
  FlowKey key;
  std::optional<Micros> first_ts;
  Micros last_ts = 0;
  Micros last_eligible_ts = 0;
  std::uint64_t pkt_count = 0;
  // Inter-packet gaps kept in microseconds so that equal spacing gives an
  // exactly zero distance difference.
  std::optional<Micros> prev_distance;
  std::optional<Micros> last_distance;
  RunningStats rate_samples;
  HandshakePhase phase = HandshakePhase::AwaitSyn;
  bool closed = false;
  std::optional<Micros> last_swept;
};

/// Derived metrics for one connection at one instant. Absent fields mean
/// "not enough data yet".
struct MetricSnapshot {
  FlowKey key;
  Micros ts = 0;
  double duration = 0.0;               // d, seconds
  std::optional<double> rate;          // p, Hz
  std::optional<double> distance_diff; // Δ, seconds
  std::optional<double> mean_rate;     // p̄, Hz
  std::optional<double> rate_variance; // σ², Hz²
  std::uint64_t pkt_count = 0;
  bool from_sweep = false;
};

MetricSnapshot connection_metrics(const ConnectionState& state, Micros now);

class FlowTracker {
 public:
  FlowTracker(Endpoint target, HandshakePolicy policy)
      : target_(target), policy_(policy) {}

  /// Updates the connection the packet belongs to. Returns a snapshot when
  /// the packet was a metric-eligible client->server packet.
  std::optional<MetricSnapshot> ingest(const PacketRecord& pkt);

  /// Duration-only snapshots for every open connection that has seen at
  /// least one eligible packet, in key order.
  std::vector<MetricSnapshot> sweep_idle(Micros now);

  const ConnectionState* find(const FlowKey& key) const;
  const std::map<FlowKey, ConnectionState>& connections() const { return table_; }
  std::size_t open_count() const;

  HandshakePolicy policy() const { return policy_; }
  Endpoint target() const { return target_; }

 private:
  bool eligible(ConnectionState& state, const PacketRecord& pkt) const;

  Endpoint target_;
  HandshakePolicy policy_;
  std::map<FlowKey, ConnectionState> table_;
};

}  // namespace slowdos

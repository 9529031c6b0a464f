#include "slowdos/flow_tracker.hpp"

#include <algorithm>
#include <cstdlib>

namespace slowdos {

FlowKey flow_key_of(const PacketRecord& pkt, Endpoint target) {
  if (pkt.dst_ip == target.ip && pkt.dst_port == target.port) {
    return {pkt.src_ip, pkt.src_port, pkt.dst_ip, pkt.dst_port};
  }
  return {pkt.dst_ip, pkt.dst_port, pkt.src_ip, pkt.src_port};
}

MetricSnapshot connection_metrics(const ConnectionState& state, Micros now) {
  MetricSnapshot s;
  s.key = state.key;
  s.ts = now;
  s.pkt_count = state.pkt_count;
  if (state.first_ts) s.duration = to_seconds(now - *state.first_ts);
  if (state.pkt_count >= 2 && s.duration > 0.0) {
    s.rate = static_cast<double>(state.pkt_count) / s.duration;
  }
  if (state.prev_distance && state.last_distance) {
    s.distance_diff = to_seconds(std::llabs(*state.last_distance - *state.prev_distance));
  }
  s.mean_rate = state.rate_samples.mean();
  s.rate_variance = state.rate_samples.variance();
  return s;
}

// Advances the handshake state machine and decides whether the packet
// feeds the metrics. Without the handshake, SYNs and the first pure ACK
// after the SYN are skipped.
bool FlowTracker::eligible(ConnectionState& state, const PacketRecord& pkt) const {
  const bool keep_handshake = policy_.include_handshake;
  switch (state.phase) {
    case HandshakePhase::AwaitSyn:
      if (pkt.is_syn()) {
        state.phase = HandshakePhase::AwaitAck;
        return keep_handshake;
      }
      // Capture started mid-connection.
      state.phase = HandshakePhase::Established;
      return true;
    case HandshakePhase::AwaitAck:
      if (pkt.is_syn()) return keep_handshake;
      state.phase = HandshakePhase::Established;
      return pkt.is_pure_ack() ? keep_handshake : true;
    case HandshakePhase::Established:
      return pkt.is_syn() ? keep_handshake : true;
  }
  return true;
}

std::optional<MetricSnapshot> FlowTracker::ingest(const PacketRecord& pkt) {
  const FlowKey key = flow_key_of(pkt, target_);
  const bool inbound = pkt.dst_ip == target_.ip && pkt.dst_port == target_.port;

  if (!inbound) {
    auto it = table_.find(key);
    if (it == table_.end() || it->second.closed) return std::nullopt;
    it->second.last_ts = std::max(it->second.last_ts, pkt.ts);
    if (pkt.closes()) it->second.closed = true;
    return std::nullopt;
  }

  auto [it, inserted] = table_.try_emplace(key);
  ConnectionState& st = it->second;
  if (inserted) {
    st.key = key;
  } else if (st.closed) {
    if (!pkt.is_syn()) return std::nullopt;
    st = ConnectionState{};  // port reuse
    st.key = key;
  }
  st.last_ts = std::max(st.last_ts, pkt.ts);
  if (pkt.closes()) {
    st.closed = true;
    return std::nullopt;
  }
  if (!eligible(st, pkt)) return std::nullopt;

  if (!st.first_ts) {
    st.first_ts = pkt.ts;
  } else {
    st.prev_distance = st.last_distance;
    st.last_distance = pkt.ts - st.last_eligible_ts;
  }
  st.last_eligible_ts = pkt.ts;
  ++st.pkt_count;

  const double d = to_seconds(pkt.ts - *st.first_ts);
  if (st.pkt_count >= 2 && d > 0.0) st.rate_samples.add(static_cast<double>(st.pkt_count) / d);
  return connection_metrics(st, pkt.ts);
}

std::vector<MetricSnapshot> FlowTracker::sweep_idle(Micros now) {
  std::vector<MetricSnapshot> out;
  for (auto& [key, st] : table_) {
    if (st.closed || !st.first_ts) continue;
    MetricSnapshot s;
    s.key = key;
    s.ts = now;
    s.duration = to_seconds(now - *st.first_ts);
    s.pkt_count = st.pkt_count;
    s.from_sweep = true;
    st.last_swept = now;
    out.push_back(s);
  }
  return out;
}

const ConnectionState* FlowTracker::find(const FlowKey& key) const {
  auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

std::size_t FlowTracker::open_count() const {
  return static_cast<std::size_t>(std::count_if(
      table_.begin(), table_.end(), [](const auto& kv) { return !kv.second.closed; }));
}

}  // namespace slowdos

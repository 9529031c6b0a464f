#include "slowdos/detection.hpp"

#include "slowdos/flow_tracker.hpp"

namespace slowdos {

MetricStream record_metrics(const LabeledTrace& trace, bool include_handshake,
                            double sweep_interval_s) {
  MetricStream stream;
  stream.include_handshake = include_handshake;
  stream.sweep_interval_s = sweep_interval_s;
  stream.clients = trace.client_ips();
  stream.attackers = trace.attacker_ips;
  if (trace.packets.empty()) return stream;

  FlowTracker tracker(trace.target, HandshakePolicy{include_handshake});
  const Micros step = sweep_interval_s > 0.0 ? from_seconds(sweep_interval_s) : 0;
  Micros next_sweep = trace.packets.front().ts + step;

  for (const auto& pkt : trace.packets) {
    // A sweep at time T runs after every packet stamped <= T.
    while (step > 0 && next_sweep < pkt.ts) {
      for (auto& s : tracker.sweep_idle(next_sweep)) {
        stream.records.push_back({s.key.client_ip, s});
      }
      next_sweep += step;
    }
    if (auto s = tracker.ingest(pkt)) stream.records.push_back({s->key.client_ip, *s});
  }
  return stream;
}

std::vector<ClassificationEvent> classify(const MetricStream& stream, const SchemeConfig& cfg) {
  StrikeRegistry registry;
  std::vector<ClassificationEvent> events;
  for (const auto& rec : stream.records) {
    const MetricSnapshot& s = rec.snapshot;
    if (!s.from_sweep) registry.observe(rec.client, s.ts);
    if (registry.is_classified(rec.client)) continue;
    if (auto e = registry.apply_strike(rec.client, s.ts, is_suspicious(s, cfg), cfg)) {
      events.push_back(*e);
    }
  }
  return events;
}

}  // namespace slowdos

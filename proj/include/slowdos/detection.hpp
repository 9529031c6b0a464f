#pragma once

#include <set>
#include <vector>

#include "slowdos/packet.hpp"
#include "slowdos/schemes.hpp"

namespace slowdos {

/// A metric snapshot attributed to a client.
struct MetricRecord {
  Ipv4 client;
  MetricSnapshot snapshot;
};

/// Every snapshot the flow tracker produces for one trace under one
/// handshake policy, in emission order. Snapshots do not depend on scheme
/// thresholds, so one stream serves any number of detection runs.
struct MetricStream {
  std::vector<MetricRecord> records;
  std::set<Ipv4> clients;
  std::set<Ipv4> attackers;
  bool include_handshake = true;
  double sweep_interval_s = 0.0;
};

/// Replays the trace through a FlowTracker. When sweep_interval_s > 0 the
/// open connections are swept on that grid (starting at the first packet)
/// and the duration-only snapshots are interleaved in time order.
MetricStream record_metrics(const LabeledTrace& trace, bool include_handshake,
                            double sweep_interval_s = 0.0);

/// Strike accumulation over a recorded stream. Events come out in detection
/// order. Thresholds are not validated here so trainers can probe the
/// boundaries of a search interval.
std::vector<ClassificationEvent> classify(const MetricStream& stream,
                                          const SchemeConfig& cfg);

}  // namespace slowdos

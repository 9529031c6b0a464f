#include "slowdos/mitigation_sim.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "slowdos/detection.hpp"
#include "slowdos/errors.hpp"

namespace slowdos {

ServerModel::ServerModel(ServerConfig config, Endpoint target) : config_(config), target_(target) {
  if (config_.pool_size < 1) throw ConfigError("pool_size must be >= 1");
  if (!(config_.request_timeout_s > 0.0)) throw ConfigError("request_timeout must be > 0");
}

void ServerModel::touch(Micros now) { now_ = std::max(now_, now); }

void ServerModel::acquire(const FlowKey& key, Micros now) {
  occupied_[key] = Slot{now, now};
  ++acquisitions_;
  if (!reachable() && !unreachable_since_) {
    unreachable_since_ = now;
    if (!first_unreachable_) first_unreachable_ = now;
  }
}

void ServerModel::release(const FlowKey& key, Micros now) {
  if (occupied_.erase(key) == 0) return;
  ++releases_;
  finished_keys_.insert(key);
  if (unreachable_since_ && reachable()) {
    downtime_ += now - *unreachable_since_;
    unreachable_since_.reset();
  }
}

bool ServerModel::advance(Micros now) {
  const Micros timeout = from_seconds(config_.request_timeout_s);
  while (!occupied_.empty()) {
    auto oldest = std::min_element(occupied_.begin(), occupied_.end(), [](const auto& a, const auto& b) {
      return a.second.last_activity < b.second.last_activity;
    });
    const Micros expiry = oldest->second.last_activity + timeout;
    if (expiry > now) break;
    release(oldest->first, expiry);
  }
  touch(now);
  return reachable();
}

bool ServerModel::step(const PacketRecord& pkt) {
  advance(pkt.ts);
  const FlowKey key = flow_key_of(pkt, target_);
  const bool inbound = pkt.dst_ip == target_.ip && pkt.dst_port == target_.port;

  if (auto it = occupied_.find(key); it != occupied_.end()) {
    if (inbound) it->second.last_activity = pkt.ts;
    if (pkt.closes()) release(key, pkt.ts);
    return reachable();
  }
  if (!inbound || pkt.closes()) return reachable();
  if (refused_keys_.contains(key) || finished_keys_.contains(key)) {
    if (!pkt.is_syn()) return reachable();
    refused_keys_.erase(key);
    finished_keys_.erase(key);
  }
  if (reachable()) {
    acquire(key, pkt.ts);
  } else {
    refused_keys_.insert(key);
    ++refused_;
  }
  return reachable();
}

bool ServerModel::reset(const FlowKey& key, Micros now) {
  advance(now);
  if (!occupied_.contains(key)) return false;
  release(key, now);
  return true;
}

std::vector<FlowKey> ServerModel::open_connections_of(Ipv4 client) const {
  std::vector<FlowKey> out;
  for (const auto& [key, slot] : occupied_) {
    if (key.client_ip == client) out.push_back(key);
  }
  return out;
}

double ServerModel::downtime_s() const {
  Micros total = downtime_;
  if (unreachable_since_) total += now_ - *unreachable_since_;
  return to_seconds(total);
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Monitoring: return "monitoring";
    case Phase::Identifying: return "identifying";
    case Phase::Mitigating: return "mitigating";
  }
  return "?";
}

Phase Controller::probe(ServerModel& server, Micros now, std::vector<Action>& log) {
  const bool reachable = server.advance(now);
  if (phase_ == Phase::Monitoring) {
    if (reachable) return phase_;
    phase_ = Phase::Identifying;
    ++episodes_;
    log.push_back({now, "identifying", {}, 0});
    auto held = std::move(pending_);
    pending_.clear();
    for (const auto& e : held) {
      auto actions = mitigate(e, server, now);
      log.insert(log.end(), actions.begin(), actions.end());
    }
    return phase_;
  }
  if (reachable && pending_.empty()) {
    phase_ = Phase::Monitoring;
    log.push_back({now, "monitoring", {}, 0});
  }
  return phase_;
}

std::vector<Action> Controller::mitigate(const ClassificationEvent& event, ServerModel& server,
                                         Micros now) {
  if (phase_ == Phase::Monitoring) throw std::logic_error("mitigate() outside an attack episode");
  std::vector<Action> actions;
  if (!blocked_.insert(event.client_ip).second) return actions;
  if (phase_ == Phase::Identifying) {
    phase_ = Phase::Mitigating;
    actions.push_back({now, "mitigating", {}, 0});
  }
  actions.push_back({now, "block", event.client_ip, 0});
  for (const FlowKey& key : server.open_connections_of(event.client_ip)) {
    server.reset(key, now);
    actions.push_back({now, "rst", event.client_ip, key.client_port});
  }
  return actions;
}

void Controller::on_classification(const ClassificationEvent& event, ServerModel& server, Micros now,
                                   std::vector<Action>& log) {
  if (phase_ == Phase::Monitoring) {
    pending_.push_back(event);
    return;
  }
  auto actions = mitigate(event, server, now);
  log.insert(log.end(), actions.begin(), actions.end());
}

SimulationReport simulate(const LabeledTrace& trace, std::span<const ClassificationEvent> classifications,
                          const ControllerConfig& controller_cfg, const ServerConfig& server_cfg) {
  if (!(controller_cfg.probe_interval_s > 0.0)) throw ConfigError("probe_interval must be > 0");
  ServerModel server(server_cfg, trace.target);
  Controller controller(controller_cfg);
  SimulationReport report;
  if (trace.packets.empty()) return report;

  std::vector<ClassificationEvent> events(classifications.begin(), classifications.end());
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.detection_ts < b.detection_ts; });

  const auto& packets = trace.packets;
  const Micros step = std::max<Micros>(1, from_seconds(controller_cfg.probe_interval_s));
  const Micros last_ts = packets.back().ts;
  Micros next_probe = packets.front().ts + step;
  std::optional<Micros> attack_start;
  constexpr Micros kNever = std::numeric_limits<Micros>::max();

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < packets.size() || j < events.size()) {
    const Micros pkt_ts = i < packets.size() ? packets[i].ts : kNever;
    const Micros ev_ts = j < events.size() ? events[j].detection_ts : kNever;
    // A probe at T runs after every packet and classification stamped <= T.
    while (next_probe < std::min(pkt_ts, ev_ts)) {
      controller.probe(server, next_probe, report.actions);
      next_probe += step;
    }
    if (pkt_ts <= ev_ts) {
      const PacketRecord& pkt = packets[i++];
      const Ipv4 client = trace.client_of(pkt);
      if (!attack_start && trace.attacker_ips.contains(client)) attack_start = pkt.ts;
      if (trace.to_target(pkt) && controller.is_blocked(client)) {
        ++report.dropped_packets;
        continue;
      }
      server.step(pkt);
    } else {
      const auto& e = events[j++];
      controller.on_classification(e, server, e.detection_ts, report.actions);
    }
  }
  while (next_probe <= last_ts) {
    controller.probe(server, next_probe, report.actions);
    next_probe += step;
  }
  server.advance(last_ts);

  std::optional<Micros> last_attacker_block;
  for (const auto& a : report.actions) {
    if (a.kind == "block" && trace.attacker_ips.contains(a.ip)) last_attacker_block = a.ts;
  }
  for (const Ipv4 ip : controller.blocked()) {
    if (trace.attacker_ips.contains(ip)) {
      ++report.blocked_attackers;
    } else {
      ++report.blocked_benign;
    }
  }
  report.downtime_s = server.downtime_s();
  if (last_attacker_block && attack_start) {
    report.time_to_last_block_s = to_seconds(*last_attacker_block - *attack_start);
  }
  if (auto t = server.first_unreachable()) report.first_unreachable_s = to_seconds(*t);
  report.refused_connections = server.refused();
  report.episodes = controller.episodes();
  report.reachable_at_end = server.reachable();
  report.final_phase = controller.phase();
  return report;
}

SimulationReport run_pipeline(const LabeledTrace& trace, const ControllerConfig& controller,
                              const ServerConfig& server) {
  const SchemeConfig& cfg = controller.scheme;
  cfg.validate();
  const double sweep = cfg.scheme == Scheme::LC ? 1.0 : 0.0;
  const MetricStream stream = record_metrics(trace, cfg.effective_handshake(), sweep);
  const auto events = classify(stream, cfg);
  return simulate(trace, events, controller, server);
}

}  // namespace slowdos

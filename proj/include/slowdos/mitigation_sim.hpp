#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "slowdos/flow_tracker.hpp"
#include "slowdos/schemes.hpp"

namespace slowdos {

struct ServerConfig {
  int pool_size = 150;
  /// Idle time after which a worker gives up on a request.
  double request_timeout_s = 300.0;
};

/// Worker-pool model of the protected server.
class ServerModel {
 public:
  ServerModel(ServerConfig config, Endpoint target);

  /// Applies one packet at its timestamp; returns reachability afterwards.
  bool step(const PacketRecord& pkt);
  /// Expires idle slots up to `now`; returns reachability.
  bool advance(Micros now);
  /// Spoofed RST: releases the connection's slot immediately.
  bool reset(const FlowKey& key, Micros now);

  bool reachable() const { return static_cast<int>(occupied_.size()) < config_.pool_size; }
  std::size_t occupied() const { return occupied_.size(); }
  std::vector<FlowKey> open_connections_of(Ipv4 client) const;

  std::uint64_t acquisitions() const { return acquisitions_; }
  std::uint64_t releases() const { return releases_; }
  std::uint64_t refused() const { return refused_; }
  /// Total unreachable time up to the last processed instant.
  double downtime_s() const;
  std::optional<Micros> first_unreachable() const { return first_unreachable_; }

 private:
  struct Slot {
    Micros acquired = 0;
    Micros last_activity = 0;
  };

  void acquire(const FlowKey& key, Micros now);
  void release(const FlowKey& key, Micros now);
  void touch(Micros now);

  ServerConfig config_;
  Endpoint target_;
  std::map<FlowKey, Slot> occupied_;
  std::set<FlowKey> refused_keys_;
  std::set<FlowKey> finished_keys_;
  std::uint64_t acquisitions_ = 0;
  std::uint64_t releases_ = 0;
  std::uint64_t refused_ = 0;
  Micros downtime_ = 0;
  std::optional<Micros> unreachable_since_;
  std::optional<Micros> first_unreachable_;
  Micros now_ = 0;
};

enum class Phase { Monitoring, Identifying, Mitigating };
std::string_view phase_name(Phase phase);

struct ControllerConfig {
  double probe_interval_s = 1.0;
  SchemeConfig scheme;
};

struct Action {
  Micros ts = 0;
  std::string kind;  // "block", "rst", "identifying", "mitigating", "monitoring"
  Ipv4 ip;
  std::uint16_t port = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Detection / identification / mitigation state machine. Classifications
/// that arrive while monitoring are held back until the next episode.
class Controller {
 public:
  explicit Controller(ControllerConfig config) : config_(std::move(config)) {}

  /// Periodic reachability check; returns the phase after the transition.
  Phase probe(ServerModel& server, Micros now, std::vector<Action>& log);

  /// Blocks the client and resets its open connections. Requires an active
  /// episode; an already-blocked client is a no-op.
  std::vector<Action> mitigate(const ClassificationEvent& event, ServerModel& server,
                               Micros now);

  /// Routes a classification to mitigate() or to the pending queue.
  void on_classification(const ClassificationEvent& event, ServerModel& server,
                         Micros now, std::vector<Action>& log);

  bool is_blocked(Ipv4 client) const { return blocked_.contains(client); }
  const std::set<Ipv4>& blocked() const { return blocked_; }
  Phase phase() const { return phase_; }
  int episodes() const { return episodes_; }
  const ControllerConfig& config() const { return config_; }

 private:
  ControllerConfig config_;
  Phase phase_ = Phase::Monitoring;
  std::set<Ipv4> blocked_;
  std::vector<ClassificationEvent> pending_;
  bool identified_since_probe_ = false;
  int episodes_ = 0;
};

struct SimulationReport {
  double downtime_s = 0.0;
  /// From the first labeled attacker packet to the last attacker block.
  std::optional<double> time_to_last_block_s;
  std::optional<double> first_unreachable_s;
  std::size_t blocked_attackers = 0;
  std::size_t blocked_benign = 0;
  std::uint64_t refused_connections = 0;
  std::uint64_t dropped_packets = 0;
  int episodes = 0;
  bool reachable_at_end = true;
  Phase final_phase = Phase::Monitoring;
  std::vector<Action> actions;
};

/// Replays the trace through server and controller with a given
/// classification stream (sorted by detection time).
SimulationReport simulate(const LabeledTrace& trace,
                          std::span<const ClassificationEvent> classifications,
                          const ControllerConfig& controller, const ServerConfig& server);

/// Classifies the trace with the controller's scheme, then simulates.
SimulationReport run_pipeline(const LabeledTrace& trace, const ControllerConfig& controller,
                              const ServerConfig& server);

}  // namespace slowdos

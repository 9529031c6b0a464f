#pragma once

#include <cstdint>
#include <string_view>

#include "slowdos/packet.hpp"

namespace slowdos {

enum class AttackTool { Slowloris, Slowhttptest, SlowlorisNg };

/// "slowloris", "slowhttptest", "slowloris-ng".
std::string_view tool_name(AttackTool tool);
AttackTool parse_tool(std::string_view name);

inline constexpr Endpoint kDefaultTarget{Ipv4(10, 0, 0, 80), 80};

struct AttackProfile {
  AttackTool tool = AttackTool::Slowloris;
  int clients = 50;
  int sockets_per_client = 1;
  double interval = 15.0;       // seconds between keep-alive sends
  double jitter = 0.0;          // uniform ± around interval (slowloris-ng)
  int content_length = 8192;    // declared body size (slowhttptest)
  int body_chunk = 10;          // bytes per body packet (slowhttptest)
  bool burst_per_char = true;   // one packet per header character (slowloris-ng)
  Cidr attacker_block{Ipv4(128, 10, 0, 0), 16};
  double start_ts = 0.0;
  double duration = 600.0;
  std::uint64_t rng_seed = 1;
  Endpoint target = kDefaultTarget;

  /// Throws ConfigError when the profile is inconsistent.
  void validate() const;
};

/// Tool defaults: 15 s interval for slowloris, 30 s for slowhttptest and
/// 15 ± 5 s for slowloris-ng.
AttackProfile default_profile(AttackTool tool);

LabeledTrace synth_slowloris(const AttackProfile& profile);
LabeledTrace synth_slowhttptest(const AttackProfile& profile);
LabeledTrace synth_slowloris_ng(const AttackProfile& profile);
/// Dispatches on profile.tool.
LabeledTrace synth_attack(const AttackProfile& profile);

/// Seeded stand-in for a benign capture: clients with Poisson session
/// arrivals, plus a share of slow long-lived clients (low rate, irregular
/// gaps) and of timer-driven clients (fast, exactly periodic packets).
struct BenignProfile {
  int clients = 500;
  Cidr block{Ipv4(192, 168, 0, 0), 16};
  double start_ts = 0.0;
  double duration = 600.0;
  double mean_session_gap = 60.0;
  double slow_fraction = 0.05;
  double slow_mean_gap = 20.0;
  double timer_fraction = 0.05;
  double timer_period = 0.04;
  std::uint64_t rng_seed = 7;
  Endpoint target = kDefaultTarget;

  void validate() const;
};

LabeledTrace synth_benign(const BenignProfile& profile);

/// Shifts the attack by `offset_s` and merges both streams in time order
/// (benign first on ties). Throws DataError on client IP collisions or
/// different targets.
LabeledTrace merge_traces(const LabeledTrace& benign, const LabeledTrace& attack,
                          double offset_s);

}  // namespace slowdos

#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "slowdos/attack_synth.hpp"
#include "slowdos/evaluator.hpp"
#include "slowdos/mitigation_sim.hpp"
#include "slowdos/trainer.hpp"

namespace slowdos {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& value);

// Scheme configuration:
//   {"scheme": "lpr-pdu", "thresholds": {"p": 0.0799, "delta": 1.4e-5},
//    "include_handshake": false, "strikes": 1}
// Threshold keys: d, p, delta, pbar, var.
Json to_json(const Thresholds& t);
Thresholds thresholds_from_json(const Json& j);
Json to_json(const SchemeConfig& cfg);
SchemeConfig scheme_config_from_json(const Json& j);

Json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const Json& j);

Json to_json(const AttackProfile& profile);
AttackProfile attack_profile_from_json(const Json& j);

struct SimulationConfig {
  ServerConfig server;
  ControllerConfig controller;
};
/// {"server": {"pool_size", "request_timeout"},
///  "controller": {"probe_interval", "scheme": {...} | "path.json"}}.
/// A string scheme reference is resolved relative to `base_dir`.
SimulationConfig simulation_config_from_json(const Json& j,
                                             const std::filesystem::path& base_dir = {});
Json to_json(const SimulationConfig& cfg);
Json to_json(const SimulationReport& report);

struct TrainingReport {
  Scheme scheme = Scheme::LPR;
  bool include_handshake = true;
  Thresholds thresholds;
  double bacc = 0.0;
  int iterations = 0;
  int rounds = 0;
  /// Exhaustive breakpoint sweep per trained threshold.
  std::optional<OracleResult> oracle;
  std::optional<OracleResult> oracle_distance;
};
Json to_json(const TrainingReport& report);

}  // namespace slowdos

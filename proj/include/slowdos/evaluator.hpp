#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slowdos/detection.hpp"

namespace slowdos {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(const std::set<Ipv4>& classified,
                          const std::set<Ipv4>& labels,
                          const std::set<Ipv4>& all_clients);

/// (TPR + TNR) / 2. Throws DataError when either class is empty.
double balanced_accuracy(const ConfusionMatrix& cm);

struct DetectionTimeStats {
  std::optional<double> mean;
  std::optional<double> stddev;  // population
};

/// Statistics over the events of labeled attackers only.
DetectionTimeStats detection_time_stats(const std::vector<ClassificationEvent>& events,
                                        const std::set<Ipv4>& labels);

struct EvalReport {
  SchemeConfig config;
  std::string dataset;
  std::string attack;
  ConfusionMatrix confusion;
  double bacc = 0.0;
  DetectionTimeStats detection;
  std::vector<ClassificationEvent> events;
};

struct ExperimentOptions {
  std::string dataset = "synthetic";
  /// Defaults to the trace's tool name.
  std::optional<std::string> attack;
  /// Sweep period for LC idle connections; 0 disables sweeping.
  double lc_sweep_interval_s = 1.0;
};

/// Scores the classification of a recorded stream.
EvalReport evaluate_stream(const MetricStream& stream, const SchemeConfig& cfg);

/// Streams the trace through the flow tracker and the scheme and scores the
/// result against the trace labels.
EvalReport run_experiment(const LabeledTrace& trace, const SchemeConfig& cfg,
                          const ExperimentOptions& options = {});

/// Thresholds per scheme, handshake policy and attack name.
struct ThresholdTable {
  struct Row {
    Scheme scheme;
    bool include_handshake;
    std::string attack;
    Thresholds thresholds;
  };
  std::vector<Row> rows;
};

/// The thresholds trained on the one-day SUEE1 capture, one row per scheme,
/// handshake policy ("N/A" for LC is emitted for both) and attack tool.
ThresholdTable suee1_thresholds();

/// Evaluates every row whose attack has a trace in `traces_by_attack`.
std::vector<EvalReport> run_grid(const std::map<std::string, LabeledTrace>& traces_by_attack,
                                 const ThresholdTable& table, int strikes,
                                 const ExperimentOptions& options = {});

/// Fixed-width table in the column order scheme, handshake, dataset, attack,
/// TP, FP, FN, TN, BACC (3 decimals), detection time (2 decimals).
std::string render_table(const std::vector<EvalReport>& reports);
std::string render_csv(const std::vector<EvalReport>& reports);

}  // namespace slowdos

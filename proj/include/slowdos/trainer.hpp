#pragma once

#include <span>
#include <vector>

#include "slowdos/detection.hpp"

namespace slowdos {

struct TrainingSpec {
  Scheme scheme = Scheme::LPR;
  bool include_handshake = true;
  /// Search bounds; derived from the observed metric range when unset.
  std::optional<double> search_lo;
  std::optional<double> search_hi;
  int max_iters = 50;
  double tol = 1e-6;
  /// Sweep period used for LC streams.
  double lc_sweep_interval_s = 1.0;
};

struct TrainingResult {
  double threshold = 0.0;
  double bacc = 0.0;
  int iterations = 0;
  double search_lo = 0.0;
  double search_hi = 0.0;
};

struct PairResult {
  double threshold_rate = 0.0;
  double threshold_distance = 0.0;
  double bacc = 0.0;
  int rounds = 0;
  int iterations = 0;
};

struct OracleResult {
  double threshold = 0.0;
  double bacc = 0.0;
  std::size_t evaluated = 0;
};

/// Records the stream a training run over `trace` needs.
MetricStream training_stream(const LabeledTrace& trace, const TrainingSpec& spec);

/// BACC of a strikes=1 detection run at one threshold value.
double bacc_at(const MetricStream& stream, Scheme scheme, double threshold);
double bacc_at_pair(const MetricStream& stream, double rate, double distance);

/// Bisection between a threshold that flags no client and one that flags
/// every client, at strikes=1.
TrainingResult bisect_threshold(const MetricStream& stream, const TrainingSpec& spec);
TrainingResult bisect_threshold(const LabeledTrace& trace, const TrainingSpec& spec);

/// Alternating coordinate bisection over (p, Δ) for LPR_PDU.
PairResult bisect_threshold_pair(const MetricStream& stream, const TrainingSpec& spec);
PairResult bisect_threshold_pair(const LabeledTrace& trace, const TrainingSpec& spec);

/// Every threshold at which BACC can change at strikes=1: each client's
/// extreme metric value, the next representable double above it, and the
/// smallest positive double. Sorted, positive, distinct.
std::vector<double> breakpoint_grid(const MetricStream& stream, Scheme scheme);

/// Exhaustive evaluation over `grid`; ties go to the smaller threshold.
OracleResult sweep_oracle(const MetricStream& stream, Scheme scheme,
                          std::span<const double> grid);
OracleResult sweep_oracle(const LabeledTrace& trace, const TrainingSpec& spec,
                          std::span<const double> grid);

/// Coordinate-wise maximum of several threshold sets.
Thresholds max_thresholds(std::span<const Thresholds> sets);

}  // namespace slowdos

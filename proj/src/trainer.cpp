#include "slowdos/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <unordered_map>

#include "slowdos/errors.hpp"
#include "slowdos/evaluator.hpp"

namespace slowdos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = std::numeric_limits<double>::denorm_min();
constexpr int kMaxPairRounds = 10;

struct Candidate {
  double threshold = 0.0;
  double bacc = -1.0;
};

// Higher BACC first, then the threshold that flags fewer clients.
bool better(const Candidate& a, const Candidate& b, bool high_suspicious) {
  if (a.bacc != b.bacc) return a.bacc > b.bacc;
  return high_suspicious ? a.threshold > b.threshold : a.threshold < b.threshold;
}

void check_labels(const MetricStream& stream) {
  if (stream.attackers.empty()) throw DataError("training trace has no labeled attackers");
  const bool has_benign = std::any_of(stream.clients.begin(), stream.clients.end(),
                                      [&](Ipv4 c) { return !stream.attackers.contains(c); });
  if (!has_benign) throw DataError("training trace has no benign clients");
}

SchemeConfig config_for(const MetricStream& stream, Scheme scheme, double threshold) {
  SchemeConfig cfg;
  cfg.scheme = scheme;
  cfg.include_handshake = stream.include_handshake;
  cfg.strikes_required = 1;
  switch (scheme) {
    case Scheme::LC: cfg.thresholds.duration = threshold; break;
    case Scheme::LPR: cfg.thresholds.rate = threshold; break;
    case Scheme::PDU: cfg.thresholds.distance_diff = threshold; break;
    case Scheme::MPR: cfg.thresholds.mean_rate = threshold; break;
    case Scheme::PRV: cfg.thresholds.rate_variance = threshold; break;
    case Scheme::LPR_PDU: throw ConfigError("lpr-pdu needs a threshold pair");
  }
  return cfg;
}

double max_metric(const MetricStream& stream, Scheme scheme) {
  double hi = -kInf;
  for (const auto& rec : stream.records) {
    if (auto v = scheme_metric(rec.snapshot, scheme)) hi = std::max(hi, *v);
  }
  if (hi == -kInf) {
    throw DataError("metric for scheme " + std::string(scheme_name(scheme)) +
                    " is not computable for any client");
  }
  return hi;
}

/// Interval search on one threshold axis. Each round evaluates the quarter
/// points and the midpoint, then keeps the half-width interval centred on
/// the best of the five known points (ties toward fewer flagged clients).
TrainingResult bisect_axis(const std::function<double(double)>& score, double lo, double hi,
                           int max_iters, double tol, bool high_suspicious,
                           std::optional<Candidate> incumbent) {
  if (!(hi > lo)) throw ConfigError("search interval is empty");
  std::map<double, double> seen;
  std::optional<Candidate> best = incumbent;
  auto eval = [&](double t) {
    auto it = seen.find(t);
    if (it != seen.end()) return it->second;
    const double b = score(t);
    seen.emplace(t, b);
    // Zero is only a search boundary; thresholds must stay positive.
    if (t > 0.0 && (!best || better({t, b}, *best, high_suspicious))) best = Candidate{t, b};
    return b;
  };

  TrainingResult result;
  result.search_lo = lo;
  result.search_hi = hi;
  eval(lo);
  eval(hi);
  int iters = 0;
  while (iters < max_iters) {
    const double width = hi - lo;
    if (width <= tol * std::max(std::abs(hi), kTiny)) break;
    const double q1 = lo + width * 0.25;
    const double mid = lo + width * 0.5;
    const double q3 = lo + width * 0.75;
    if (!(q1 > lo && q3 < hi)) break;  // exhausted floating-point resolution
    ++iters;
    const double points[5] = {lo, q1, mid, q3, hi};
    double scores[5];
    for (int i = 0; i < 5; ++i) scores[i] = eval(points[i]);
    int arg = 0;
    for (int i = 1; i < 5; ++i) {
      if (scores[i] > scores[arg] || (high_suspicious && scores[i] == scores[arg])) arg = i;
    }
    if (arg <= 1) {
      hi = mid;
    } else if (arg == 2) {
      lo = q1;
      hi = q3;
    } else {
      lo = mid;
    }
  }
  if (!best) throw DataError("bisection found no positive threshold");
  result.threshold = best->threshold;
  result.bacc = best->bacc;
  result.iterations = iters;
  return result;
}

std::vector<double> positive_candidates(std::vector<double> values) {
  std::vector<double> grid{kTiny};
  for (double v : values) {
    if (v > 0.0) grid.push_back(v);
    grid.push_back(std::nextafter(v, kInf));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

MetricStream training_stream(const LabeledTrace& trace, const TrainingSpec& spec) {
  const bool lc = spec.scheme == Scheme::LC;
  return record_metrics(trace, lc ? true : spec.include_handshake,
                        lc ? spec.lc_sweep_interval_s : 0.0);
}

double bacc_at(const MetricStream& stream, Scheme scheme, double threshold) {
  return evaluate_stream(stream, config_for(stream, scheme, threshold)).bacc;
}

double bacc_at_pair(const MetricStream& stream, double rate, double distance) {
  SchemeConfig cfg;
  cfg.scheme = Scheme::LPR_PDU;
  cfg.include_handshake = stream.include_handshake;
  cfg.thresholds.rate = rate;
  cfg.thresholds.distance_diff = distance;
  return evaluate_stream(stream, cfg).bacc;
}

TrainingResult bisect_threshold(const MetricStream& stream, const TrainingSpec& spec) {
  if (spec.scheme == Scheme::LPR_PDU) {
    throw ConfigError("use bisect_threshold_pair for lpr-pdu");
  }
  if (spec.max_iters < 0 || !(spec.tol >= 0.0)) throw ConfigError("invalid bisection limits");
  check_labels(stream);
  const double lo = spec.search_lo.value_or(0.0);
  const double hi = spec.search_hi.value_or(std::nextafter(max_metric(stream, spec.scheme), kInf));
  return bisect_axis([&](double t) { return bacc_at(stream, spec.scheme, t); }, lo, hi,
                     spec.max_iters, spec.tol, high_is_suspicious(spec.scheme), std::nullopt);
}

TrainingResult bisect_threshold(const LabeledTrace& trace, const TrainingSpec& spec) {
  return bisect_threshold(training_stream(trace, spec), spec);
}

PairResult bisect_threshold_pair(const MetricStream& stream, const TrainingSpec& spec) {
  check_labels(stream);
  TrainingSpec component = spec;
  component.search_lo.reset();
  component.search_hi.reset();
  component.scheme = Scheme::LPR;
  const TrainingResult rate = bisect_threshold(stream, component);
  component.scheme = Scheme::PDU;
  const TrainingResult dist = bisect_threshold(stream, component);

  const double rate_hi = std::nextafter(max_metric(stream, Scheme::LPR), kInf);
  const double dist_hi = std::nextafter(max_metric(stream, Scheme::PDU), kInf);

  // Start from the best of: LPR alone, PDU alone, both component optima.
  struct Pair {
    double rate, dist, bacc;
  };
  Pair seeds[3] = {{rate.threshold, dist_hi, 0.0},
                   {rate_hi, dist.threshold, 0.0},
                   {rate.threshold, dist.threshold, 0.0}};
  for (auto& s : seeds) s.bacc = bacc_at_pair(stream, s.rate, s.dist);
  Pair cur = seeds[0];
  for (const auto& s : seeds) {
    if (s.bacc > cur.bacc ||
        (s.bacc == cur.bacc && std::tie(s.rate, s.dist) < std::tie(cur.rate, cur.dist))) {
      cur = s;
    }
  }

  PairResult result;
  result.iterations = rate.iterations + dist.iterations;
  for (int round = 0; round < kMaxPairRounds; ++round) {
    const double before = cur.bacc;
    const TrainingResult r = bisect_axis(
        [&](double t) { return bacc_at_pair(stream, t, cur.dist); }, 0.0, rate_hi,
        spec.max_iters, spec.tol, false, Candidate{cur.rate, cur.bacc});
    cur.rate = r.threshold;
    cur.bacc = r.bacc;
    const TrainingResult d = bisect_axis(
        [&](double t) { return bacc_at_pair(stream, cur.rate, t); }, 0.0, dist_hi,
        spec.max_iters, spec.tol, false, Candidate{cur.dist, cur.bacc});
    cur.dist = d.threshold;
    cur.bacc = d.bacc;
    result.iterations += r.iterations + d.iterations;
    result.rounds = round + 1;
    if (cur.bacc - before < spec.tol) break;
  }
  result.threshold_rate = cur.rate;
  result.threshold_distance = cur.dist;
  result.bacc = cur.bacc;
  return result;
}

PairResult bisect_threshold_pair(const LabeledTrace& trace, const TrainingSpec& spec) {
  return bisect_threshold_pair(record_metrics(trace, spec.include_handshake), spec);
}

std::vector<double> breakpoint_grid(const MetricStream& stream, Scheme scheme) {
  if (scheme == Scheme::LPR_PDU) throw ConfigError("breakpoint grid is one-dimensional");
  // At strikes=1 a client is flagged as soon as its most extreme value
  // crosses the threshold, so only those extremes move BACC.
  const bool high = high_is_suspicious(scheme);
  std::unordered_map<Ipv4, double, Ipv4Hash> extreme;
  for (const auto& rec : stream.records) {
    const auto v = scheme_metric(rec.snapshot, scheme);
    if (!v) continue;
    auto [it, inserted] = extreme.try_emplace(rec.client, *v);
    if (!inserted) it->second = high ? std::max(it->second, *v) : std::min(it->second, *v);
  }
  std::vector<double> values;
  values.reserve(extreme.size());
  for (const auto& kv : extreme) values.push_back(kv.second);
  return positive_candidates(std::move(values));
}

OracleResult sweep_oracle(const MetricStream& stream, Scheme scheme, std::span<const double> grid) {
  check_labels(stream);
  if (grid.empty()) throw DataError("empty threshold grid");
  std::optional<Candidate> best;
  for (double t : grid) {
    const Candidate c{t, bacc_at(stream, scheme, t)};
    if (!best || better(c, *best, false)) best = c;
  }
  return {best->threshold, best->bacc, grid.size()};
}

OracleResult sweep_oracle(const LabeledTrace& trace, const TrainingSpec& spec,
                          std::span<const double> grid) {
  return sweep_oracle(training_stream(trace, spec), spec.scheme, grid);
}

Thresholds max_thresholds(std::span<const Thresholds> sets) {
  Thresholds out;
  auto fold = [](std::optional<double>& acc, const std::optional<double>& v) {
    if (v) acc = acc ? std::max(*acc, *v) : *v;
  };
  for (const auto& t : sets) {
    fold(out.duration, t.duration);
    fold(out.rate, t.rate);
    fold(out.distance_diff, t.distance_diff);
    fold(out.mean_rate, t.mean_rate);
    fold(out.rate_variance, t.rate_variance);
  }
  return out;
}

}  // namespace slowdos

#include "slowdos/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "slowdos/errors.hpp"

namespace slowdos {

ConfusionMatrix confusion(const std::set<Ipv4>& classified, const std::set<Ipv4>& labels,
                          const std::set<Ipv4>& all_clients) {
  ConfusionMatrix cm;
  for (const Ipv4 c : classified) {
    if (!all_clients.contains(c)) {
      throw DataError("classified client " + c.str() + " is not part of the client set");
    }
    if (labels.contains(c)) {
      ++cm.tp;
    } else {
      ++cm.fp;
    }
  }
  for (const Ipv4 c : labels) {
    if (!all_clients.contains(c)) {
      throw DataError("labeled attacker " + c.str() + " is not part of the client set");
    }
    if (!classified.contains(c)) ++cm.fn;
  }
  cm.tn = all_clients.size() - cm.tp - cm.fp - cm.fn;
  return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  const auto positives = cm.tp + cm.fn;
  const auto negatives = cm.tn + cm.fp;
  if (positives == 0) throw DataError("balanced accuracy undefined: no labeled attackers");
  if (negatives == 0) throw DataError("balanced accuracy undefined: no benign clients");
  return (static_cast<double>(cm.tp) / static_cast<double>(positives) +
          static_cast<double>(cm.tn) / static_cast<double>(negatives)) *
         0.5;
}

DetectionTimeStats detection_time_stats(const std::vector<ClassificationEvent>& events,
                                        const std::set<Ipv4>& labels) {
  std::vector<double> times;
  for (const auto& e : events) {
    if (labels.contains(e.client_ip)) times.push_back(e.detection_time());
  }
  if (times.empty()) return {};
  double sum = 0.0;
  for (double t : times) sum += t;
  const double mean = sum / static_cast<double>(times.size());
  double sq = 0.0;
  for (double t : times) sq += (t - mean) * (t - mean);
  return {mean, std::sqrt(sq / static_cast<double>(times.size()))};
}

EvalReport evaluate_stream(const MetricStream& stream, const SchemeConfig& cfg) {
  EvalReport report;
  report.config = cfg;
  report.events = classify(stream, cfg);

  std::set<Ipv4> classified;
  for (const auto& e : report.events) classified.insert(e.client_ip);
  std::set<Ipv4> universe = stream.clients;
  universe.insert(stream.attackers.begin(), stream.attackers.end());

  report.confusion = confusion(classified, stream.attackers, universe);
  report.bacc = balanced_accuracy(report.confusion);
  report.detection = detection_time_stats(report.events, stream.attackers);
  return report;
}

EvalReport run_experiment(const LabeledTrace& trace, const SchemeConfig& cfg,
                          const ExperimentOptions& options) {
  cfg.validate();
  const double sweep = cfg.scheme == Scheme::LC ? options.lc_sweep_interval_s : 0.0;
  const MetricStream stream = record_metrics(trace, cfg.effective_handshake(), sweep);
  EvalReport report = evaluate_stream(stream, cfg);
  report.dataset = options.dataset;
  report.attack = options.attack.value_or(trace.tool.value_or(""));
  return report;
}

ThresholdTable suee1_thresholds() {
  const char* attacks[3] = {"slowloris", "slowhttptest", "slowloris-ng"};
  ThresholdTable table;
  auto add = [&](Scheme scheme, bool hs, int attack, Thresholds t) {
    table.rows.push_back({scheme, hs, attacks[attack], t});
  };
  const double lc[3] = {2.1e-5, 2.1e-5, 0.0999727};
  const double lpr[2][3] = {{0.079935, 0.03806, 0.77687}, {0.091756, 0.01739, 0.783869}};
  const double pdu[2][3] = {{1.4e-5, 0.000631, 1e-6}, {5.9e-5, 2.5e-5, 2.5e-5}};
  const double pair_delta[2][3] = {{1.4e-5, 0.000631, 1e-6}, {5.9e-5, 2.5e-5, 4.1e-5}};
  const double mpr[2][3] = {{4049, 21845, 995}, {0.83315, 0.83315, 0.83315}};
  const double prv[2] = {1332497506, 0.028007};

  for (Scheme scheme : kAllSchemes) {
    for (int hs = 0; hs < 2; ++hs) {
      for (int a = 0; a < 3; ++a) {
        Thresholds t;
        switch (scheme) {
          case Scheme::LC: t.duration = lc[a]; break;
          case Scheme::LPR: t.rate = lpr[hs][a]; break;
          case Scheme::PDU: t.distance_diff = pdu[hs][a]; break;
          case Scheme::LPR_PDU:
            t.rate = lpr[hs][a];
            t.distance_diff = pair_delta[hs][a];
            break;
          case Scheme::MPR: t.mean_rate = mpr[hs][a]; break;
          case Scheme::PRV: t.rate_variance = prv[hs]; break;
        }
        add(scheme, hs == 1, a, t);
      }
    }
  }
  return table;
}

std::vector<EvalReport> run_grid(const std::map<std::string, LabeledTrace>& traces_by_attack,
                                 const ThresholdTable& table, int strikes,
                                 const ExperimentOptions& options) {
  // Streams depend only on (attack, handshake, sweep), not on thresholds.
  std::map<std::tuple<std::string, bool, double>, MetricStream> streams;
  std::vector<EvalReport> reports;
  for (const auto& row : table.rows) {
    auto trace = traces_by_attack.find(row.attack);
    if (trace == traces_by_attack.end()) continue;
    SchemeConfig cfg{row.scheme, row.thresholds, row.include_handshake, strikes};
    cfg.validate();
    const double sweep = cfg.scheme == Scheme::LC ? options.lc_sweep_interval_s : 0.0;
    const auto key = std::make_tuple(row.attack, cfg.effective_handshake(), sweep);
    auto it = streams.find(key);
    if (it == streams.end()) {
      it = streams.emplace(key, record_metrics(trace->second, cfg.effective_handshake(), sweep)).first;
    }
    EvalReport report = evaluate_stream(it->second, cfg);
    report.dataset = options.dataset;
    report.attack = row.attack;
    reports.push_back(std::move(report));
  }
  return reports;
}

namespace {

std::string detection_cell(const DetectionTimeStats& d) {
  if (!d.mean) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "t=%.2f s=%.2f", *d.mean, d.stddev.value_or(0.0));
  return buf;
}

}  // namespace

std::string render_table(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-3s %-10s %-13s %6s %6s %6s %6s %6s  %s\n", "scheme",
                "hs", "dataset", "attack", "TP", "FP", "FN", "TN", "BACC", "detection time [s]");
  out << line;
  for (const auto& r : reports) {
    const bool hs_applies = r.config.scheme != Scheme::LC;
    std::snprintf(line, sizeof line, "%-8s %-3s %-10s %-13s %6llu %6llu %6llu %6llu %6.3f  %s\n",
                  std::string(scheme_name(r.config.scheme)).c_str(),
                  hs_applies ? (r.config.include_handshake ? "Y" : "N") : "-", r.dataset.c_str(),
                  r.attack.c_str(), static_cast<unsigned long long>(r.confusion.tp),
                  static_cast<unsigned long long>(r.confusion.fp),
                  static_cast<unsigned long long>(r.confusion.fn),
                  static_cast<unsigned long long>(r.confusion.tn), r.bacc,
                  detection_cell(r.detection).c_str());
    out << line;
  }
  return out.str();
}

std::string render_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "scheme,handshake,dataset,attack,tp,fp,fn,tn,bacc,det_mean_s,det_std_s\n";
  char num[64];
  for (const auto& r : reports) {
    const char* hs = r.config.scheme == Scheme::LC ? "-" : (r.config.include_handshake ? "Y" : "N");
    out << scheme_name(r.config.scheme) << ',' << hs << ','
        << r.dataset << ',' << r.attack << ',' << r.confusion.tp << ',' << r.confusion.fp << ','
        << r.confusion.fn << ',' << r.confusion.tn << ',';
    std::snprintf(num, sizeof num, "%.3f", r.bacc);
    out << num << ',';
    if (r.detection.mean) {
      std::snprintf(num, sizeof num, "%.2f,%.2f", *r.detection.mean, r.detection.stddev.value_or(0.0));
      out << num;
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace slowdos

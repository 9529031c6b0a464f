// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "random_traces.hpp"
#include "reference_rows.hpp"
#include "slowdos/attack_synth.hpp"
#include "slowdos/detection.hpp"
#include "slowdos/evaluator.hpp"
#include "slowdos/flow_tracker.hpp"
#include "slowdos/mitigation_sim.hpp"
#include "slowdos/trainer.hpp"

using namespace slowdos;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

LabeledTrace attack_vs_benign(AttackTool tool, int attackers, int benign, double duration,
                              std::uint64_t seed) {
  AttackProfile a = default_profile(tool);
  a.clients = attackers;
  a.duration = duration;
  a.rng_seed = seed;
  BenignProfile b;
  b.clients = benign;
  b.duration = duration;
  b.rng_seed = seed + 1;
  return merge_traces(synth_benign(b), synth_attack(a), 0.0);
}

Thresholds reference_thresholds(Scheme scheme, bool handshake, AttackTool tool) {
  for (const auto& row : suee1_thresholds().rows) {
    if (row.scheme == scheme && row.include_handshake == handshake && row.attack == tool_name(tool)) {
      return row.thresholds;
    }
  }
  throw std::logic_error("no reference thresholds");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Outcome golden_bacc() {
  Outcome o;
  int worst = -1;
  double worst_err = 0.0;
  for (std::size_t i = 0; i < testing::kReferenceRows.size(); ++i) {
    const auto& r = testing::kReferenceRows[i];
    const double err = std::abs(balanced_accuracy({r.tp, r.fp, r.fn, r.tn}) - r.bacc);
    if (err > worst_err) {
      worst_err = err;
      worst = static_cast<int>(i);
    }
  }
  o.require(worst_err <= 0.001 + 1e-12, "row " + std::to_string(worst) + " off by " + fmt(worst_err));
  o.detail = o.ok ? std::to_string(testing::kReferenceRows.size()) + " rows, max error " + fmt(worst_err) : o.detail;
  return o;
}

Outcome lpr_on_slowloris() {
  Outcome o;
  const LabeledTrace trace = attack_vs_benign(AttackTool::Slowloris, 50, 500, 600, 1);
  const EvalReport r = run_experiment(trace, {Scheme::LPR, {.rate = 0.079935}, false, 1});
  const auto last = trace.packets.back().ts;
  bool in_window = true;
  for (const auto& e : r.events) in_window = in_window && e.detection_ts <= last;
  o.require(r.confusion.tp == 50, "tp=" + std::to_string(r.confusion.tp));
  o.require(r.confusion.fn == 0, "fn=" + std::to_string(r.confusion.fn));
  o.require(in_window, "detection after trace end");
  if (o.ok) {
    o.detail = "tp=50 fn=0 fp=" + std::to_string(r.confusion.fp) + " mean detection " +
               fmt(r.detection.mean.value_or(0)) + " s";
  }
  return o;
}

// Keeps the first packet of every burst: a client packet within 100 ms of
// the previous one on the same connection is dropped.
LabeledTrace collapse_bursts(const LabeledTrace& trace) {
  LabeledTrace out = trace;
  out.packets.clear();
  std::map<FlowKey, Micros> last;
  for (const auto& p : trace.packets) {
    if (trace.to_target(p) && p.payload_len > 0) {
      const FlowKey key = flow_key_of(p, trace.target);
      const auto it = last.find(key);
      const bool in_burst = it != last.end() && p.ts - it->second < 100'000;
      last[key] = p.ts;
      if (in_burst) continue;
    }
    out.packets.push_back(p);
  }
  return out;
}

double flagged_share(const LabeledTrace& trace, double threshold) {
  const MetricStream stream = record_metrics(trace, false);
  const auto events = classify(stream, {Scheme::PDU, {.distance_diff = threshold}, false, 1});
  std::size_t hits = 0;
  for (const auto& e : events) hits += trace.attacker_ips.contains(e.client_ip) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(trace.attacker_ips.size());
}

Outcome pdu_uniformity() {
  Outcome o;
  AttackProfile sl = default_profile(AttackTool::Slowloris);
  AttackProfile ng = default_profile(AttackTool::SlowlorisNg);
  const double sl_share = flagged_share(synth_attack(sl), 1e-6);
  const double ng_share = flagged_share(collapse_bursts(synth_attack(ng)), 1e-6);
  o.require(sl_share == 1.0, "slowloris flagged " + fmt(sl_share));
  o.require(ng_share < 0.05, "slowloris-ng flagged " + fmt(ng_share));
  if (o.ok) o.detail = "slowloris " + fmt(sl_share) + ", slowloris-ng " + fmt(ng_share);
  return o;
}

Outcome strike_tradeoff() {
  Outcome o;
  std::string summary;
  for (AttackTool tool : {AttackTool::Slowloris, AttackTool::Slowhttptest, AttackTool::SlowlorisNg}) {
    const LabeledTrace trace = attack_vs_benign(tool, 50, 500, 600, 3);
    const MetricStream stream = record_metrics(trace, false);
    SchemeConfig cfg{Scheme::LPR, reference_thresholds(Scheme::LPR, false, tool), false, 1};
    std::uint64_t prev_fp = UINT64_MAX;
    double prev_mean = -1.0;
    std::string row;
    for (int s = 1; s <= 4; ++s) {
      cfg.strikes_required = s;
      const EvalReport r = evaluate_stream(stream, cfg);
      const std::string tag = std::string(tool_name(tool)) + " strikes=" + std::to_string(s);
      o.require(r.confusion.fp <= prev_fp, tag + " fp rose");
      o.require(r.detection.mean.has_value(), tag + " no detections");
      if (r.detection.mean) {
        o.require(*r.detection.mean >= prev_mean, tag + " mean fell");
        prev_mean = *r.detection.mean;
      }
      prev_fp = r.confusion.fp;
      row += (s > 1 ? "," : "") + std::to_string(r.confusion.fp);
    }
    summary += std::string(summary.empty() ? "" : " ") + std::string(tool_name(tool)) + " fp " + row;
  }
  if (o.ok) o.detail = summary;
  return o;
}

Outcome trainer_vs_oracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (double noise : {0.1, 0.0}) {
      const LabeledTrace trace = testing::random_labeled_trace(seed, {.noise = noise});
      for (Scheme scheme : {Scheme::LPR, Scheme::MPR}) {
        const TrainingSpec spec{.scheme = scheme, .include_handshake = false};
        const MetricStream stream = training_stream(trace, spec);
        const TrainingResult b = bisect_threshold(stream, spec);
        const auto grid = breakpoint_grid(stream, scheme);
        const OracleResult orc = sweep_oracle(stream, scheme, grid);
        const std::string tag = "seed " + std::to_string(seed) + " " + std::string(scheme_name(scheme));
        o.require(orc.bacc >= b.bacc, tag + " bisect beats oracle");
        o.require(b.bacc >= orc.bacc - 0.02, tag + " bisect " + fmt(b.bacc) + " vs " + fmt(orc.bacc));
        if (noise == 0.0) o.require(b.bacc == 1.0 && orc.bacc == 1.0, tag + " separable below 1.0");
        worst_gap = std::max(worst_gap, orc.bacc - b.bacc);
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 60.0, "took " + fmt(secs) + " s");
  if (o.ok) o.detail = "max gap " + fmt(worst_gap) + ", " + fmt(secs) + " s";
  return o;
}

double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

Outcome online_stats() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> count(3, 200);
  std::uniform_real_distribution<double> gap(0.001, 30.0);
  const Endpoint target{Ipv4(10, 0, 0, 80), 80};
  const Ipv4 client(192, 168, 1, 1);
  double worst = 0.0;
  for (int stream = 0; stream < 1000; ++stream) {
    FlowTracker tracker(target, {false});
    const int n = count(gen);
    Micros t = 0;
    std::vector<double> rates;
    std::optional<MetricSnapshot> last;
    for (int k = 0; k < n; ++k) {
      t += from_seconds(gap(gen));
      last = tracker.ingest({t, client, target.ip, 40000, target.port, tcp::kPsh | tcp::kAck, 1});
      if (last && last->rate) rates.push_back(*last->rate);
    }
    if (rates.size() < 2 || !last || !last->mean_rate || !last->rate_variance) {
      o.require(false, "stream " + std::to_string(stream) + " lacks statistics");
      continue;
    }
    double sum = 0.0;
    for (double r : rates) sum += r;
    const double mean = sum / static_cast<double>(rates.size());
    double sq = 0.0;
    for (double r : rates) sq += (r - mean) * (r - mean);
    const double var = sq / static_cast<double>(rates.size());
    worst = std::max({worst, rel_err(*last->mean_rate, mean), rel_err(*last->rate_variance, var)});
  }
  o.require(worst <= 1e-9, "relative error " + fmt(worst));
  if (o.ok) o.detail = "1000 streams, max relative error " + fmt(worst);
  return o;
}

Outcome mitigation() {
  Outcome o;
  const LabeledTrace trace = attack_vs_benign(AttackTool::Slowloris, 50, 500, 600, 5);
  const TrainingSpec spec{.scheme = Scheme::LPR_PDU, .include_handshake = false};
  const PairResult trained = bisect_threshold_pair(trace, spec);
  const SchemeConfig scheme{Scheme::LPR_PDU,
                            {.rate = trained.threshold_rate, .distance_diff = trained.threshold_distance},
                            false, 1};
  const ControllerConfig ctrl{1.0, scheme};
  const SimulationReport sim = run_pipeline(trace, ctrl, {50, 300});
  const EvalReport eval = run_experiment(trace, scheme);

  double max_detect = 0.0;
  for (const auto& e : eval.events) {
    if (trace.attacker_ips.contains(e.client_ip)) max_detect = std::max(max_detect, e.detection_time());
  }
  const bool identified = std::any_of(sim.actions.begin(), sim.actions.end(),
                                      [](const Action& a) { return a.kind == "identifying"; });
  o.require(sim.first_unreachable_s.has_value(), "server never unreachable");
  o.require(identified, "never entered identifying");
  o.require(sim.reachable_at_end, "not restored");
  o.require(sim.blocked_benign == 0, "blocked benign " + std::to_string(sim.blocked_benign));
  o.require(sim.downtime_s < max_detect + 2 * ctrl.probe_interval_s,
            "downtime " + fmt(sim.downtime_s) + " vs max detection " + fmt(max_detect));
  o.require(sim.blocked_benign == eval.confusion.fp,
            "blocked benign " + std::to_string(sim.blocked_benign) + " != fp " + std::to_string(eval.confusion.fp));
  if (o.ok) {
    o.detail = "downtime " + fmt(sim.downtime_s) + " s, max detection " + fmt(max_detect) +
               " s, blocked " + std::to_string(sim.blocked_attackers) + " attackers";
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "slowdos_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  {
    std::ofstream(p("sim.json")) << R"({"server":{"pool_size":20,"request_timeout":300},
      "controller":{"probe_interval":1.0,"scheme":{"scheme":"lpr-pdu",
      "thresholds":{"p":0.079935,"delta":1.4e-5},"include_handshake":false}}})";
  }
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> steps = {
      {{"--seed", "11", "synth", "--tool", "slowloris", "--clients", "20", "--duration", "300",
        "--benign-clients", "100", "--out", p("sl.pcap")},
       {"sl.pcap", "sl.labels.json"}},
      {{"--seed", "11", "synth", "--tool", "slowloris-ng", "--clients", "20", "--duration", "300",
        "--benign-clients", "100", "--out", p("ng.pcap")},
       {"ng.pcap", "ng.labels.json"}},
      {{"--seed", "11", "synth", "--tool", "slowhttptest", "--clients", "20", "--duration", "300",
        "--benign-clients", "100", "--out", p("sh.pcap")},
       {"sh.pcap", "sh.labels.json"}},
      {{"--seed", "11", "train", "--trace", p("sl.pcap"), "--scheme", "lpr-pdu", "--no-handshake",
        "--out", p("train.json")},
       {"train.json"}},
      {{"--seed", "11", "eval", "--trace", p("ng.pcap"), "--scheme", "lpr", "--threshold", "0.079935",
        "--no-handshake", "--out", p("eval.json")},
       {"eval.json"}},
      {{"--seed", "11", "eval", "--grid", "--trace", p("sl.pcap"), "--trace", p("ng.pcap"), "--trace",
        p("sh.pcap"), "--out", p("grid.json")},
       {"grid.json"}},
      {{"--seed", "11", "simulate", "--trace", p("sl.pcap"), "--config", p("sim.json"), "--out",
        p("simout.json")},
       {"simout.json"}},
      {{"--seed", "11", "report", "--in", p("grid.json"), "--out", p("table.txt")}, {"table.txt"}},
      {{"--seed", "11", "report", "--in", p("grid.json"), "--csv"}, {}},
  };
  for (const auto& [args, files] : steps) {
    std::vector<std::string> snapshots[2];
    for (int run = 0; run < 2; ++run) {
      std::ostringstream out, err;
      const int code = cli::dispatch(args, out, err);
      o.require(code == 0, args[2] + " exit " + std::to_string(code) + ": " + err.str());
      snapshots[run].push_back(out.str());
      for (const auto& f : files) snapshots[run].push_back(slurp(dir / f));
    }
    o.require(snapshots[0] == snapshots[1], args[2] + " differs between runs");
  }
  if (o.ok) o.detail = std::to_string(steps.size()) + " invocations covering every subcommand";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"BACC reproduces every reference confusion row", golden_bacc},
      {"LPR at 0.079935 Hz detects all 50 slowloris clients", lpr_on_slowloris},
      {"PDU at 1e-6 s separates slowloris from slowloris-ng", pdu_uniformity},
      {"more strikes never raise fp or lower mean detection time", strike_tradeoff},
      {"bisection stays within 0.02 of the exhaustive oracle", trainer_vs_oracle},
      {"online rate mean and variance match two-pass", online_stats},
      {"mitigation restores a saturated server without blocking benign clients", mitigation},
      {"every subcommand is byte-identical across runs", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.ok ? 0 : 1;
    std::cout << (o.ok ? "[PASS] " : "[FAIL] ") << i + 1 << ": " << criteria[i].first;
    if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
    std::cout << '\n' << std::flush;
  }
  return failures == 0 ? 0 : 1;
}

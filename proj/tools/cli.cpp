#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "slowdos/attack_synth.hpp"
#include "slowdos/errors.hpp"
#include "slowdos/evaluator.hpp"
#include "slowdos/json_io.hpp"
#include "slowdos/mitigation_sim.hpp"
#include "slowdos/trace_io.hpp"
#include "slowdos/trainer.hpp"

namespace slowdos::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  int strikes = 1;
  bool include_handshake = true;
  bool strikes_given = false;
  bool handshake_given = false;
};

struct SynthArgs {
  std::string tool;
  std::optional<int> clients;
  std::optional<double> duration;
  std::string out;
  std::string profile;
  int benign_clients = 500;
  double offset = 0.0;
  bool full_payload = false;
};

struct TrainArgs {
  std::string trace;
  std::string scheme;
  int max_iters = 50;
  double tol = 1e-6;
  std::string out;
};

struct EvalArgs {
  std::vector<std::string> traces;
  std::string scheme;
  std::optional<double> threshold;
  std::optional<double> delta_threshold;
  std::string config;
  bool grid = false;
  std::string out;
};

struct SimulateArgs {
  std::string trace;
  std::string config;
  std::string out;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  bool csv = false;
  std::string out;
};

void emit_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path);
  file << text;
}

void emit_json(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json_file(path, j);
  }
}

LabeledTrace load_trace(const std::string& path, std::ostream& err) {
  PcapReadResult r = load_labeled_trace(path);
  for (const auto& w : r.warnings) err << "warning: " << path << ": " << w << '\n';
  return std::move(r.trace);
}

int run_synth(const SynthArgs& a, const Globals& g, std::ostream& out) {
  AttackProfile profile;
  if (!a.profile.empty()) {
    profile = attack_profile_from_json(read_json_file(a.profile));
    if (!a.tool.empty() && parse_tool(a.tool) != profile.tool) {
      throw UsageError("--tool disagrees with the profile");
    }
  } else {
    if (a.tool.empty()) throw UsageError("synth needs --tool or --profile");
    profile = default_profile(parse_tool(a.tool));
    profile.rng_seed = g.seed;
  }
  if (a.clients) profile.clients = *a.clients;
  if (a.duration) profile.duration = *a.duration;
  profile.validate();

  LabeledTrace attack = synth_attack(profile);
  LabeledTrace trace;
  if (a.benign_clients > 0) {
    BenignProfile benign;
    benign.clients = a.benign_clients;
    benign.duration = profile.duration + a.offset;
    benign.rng_seed = g.seed + 1;
    benign.target = profile.target;
    benign.validate();
    trace = merge_traces(synth_benign(benign), attack, a.offset);
  } else {
    trace = std::move(attack);
  }
  write_trace(trace, a.out, WriteOptions{.headers_only = !a.full_payload});
  out << "wrote " << trace.packets.size() << " packets, " << trace.attacker_ips.size()
      << " attackers, " << trace.benign_ips().size() << " benign clients to " << a.out << '\n';
  return kOk;
}

int run_train(const TrainArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const LabeledTrace trace = load_trace(a.trace, err);
  TrainingSpec spec;
  spec.scheme = parse_scheme(a.scheme);
  spec.include_handshake = g.include_handshake;
  spec.max_iters = a.max_iters;
  spec.tol = a.tol;
  const MetricStream stream = training_stream(trace, spec);

  TrainingReport report;
  report.scheme = spec.scheme;
  report.include_handshake = stream.include_handshake;
  if (spec.scheme == Scheme::LPR_PDU) {
    const PairResult pair = bisect_threshold_pair(stream, spec);
    report.thresholds.rate = pair.threshold_rate;
    report.thresholds.distance_diff = pair.threshold_distance;
    report.bacc = pair.bacc;
    report.iterations = pair.iterations;
    report.rounds = pair.rounds;
    report.oracle = sweep_oracle(stream, Scheme::LPR, breakpoint_grid(stream, Scheme::LPR));
    report.oracle_distance =
        sweep_oracle(stream, Scheme::PDU, breakpoint_grid(stream, Scheme::PDU));
  } else {
    const TrainingResult r = bisect_threshold(stream, spec);
    switch (spec.scheme) {
      case Scheme::LC: report.thresholds.duration = r.threshold; break;
      case Scheme::LPR: report.thresholds.rate = r.threshold; break;
      case Scheme::PDU: report.thresholds.distance_diff = r.threshold; break;
      case Scheme::MPR: report.thresholds.mean_rate = r.threshold; break;
      case Scheme::PRV: report.thresholds.rate_variance = r.threshold; break;
      case Scheme::LPR_PDU: break;
    }
    report.bacc = r.bacc;
    report.iterations = r.iterations;
    report.oracle = sweep_oracle(stream, spec.scheme, breakpoint_grid(stream, spec.scheme));
  }
  emit_json(to_json(report), a.out, out);
  return kOk;
}

Thresholds thresholds_for(Scheme scheme, std::optional<double> value,
                          std::optional<double> delta) {
  Thresholds t;
  if (!value) throw UsageError("--threshold is required");
  switch (scheme) {
    case Scheme::LC: t.duration = value; break;
    case Scheme::LPR: t.rate = value; break;
    case Scheme::PDU: t.distance_diff = value; break;
    case Scheme::MPR: t.mean_rate = value; break;
    case Scheme::PRV: t.rate_variance = value; break;
    case Scheme::LPR_PDU:
      if (!delta) throw UsageError("lpr-pdu needs --delta-threshold");
      t.rate = value;
      t.distance_diff = delta;
      return t;
  }
  if (delta) throw UsageError("--delta-threshold only applies to lpr-pdu");
  return t;
}

int run_eval(const EvalArgs& a, const Globals& g, std::ostream& out,
             std::ostream& err) {
  if (a.grid) {
    if (!a.scheme.empty() || !a.config.empty() || a.threshold || a.delta_threshold) {
      throw UsageError("--grid takes no scheme or thresholds");
    }
    std::map<std::string, LabeledTrace> by_attack;
    for (const auto& path : a.traces) {
      LabeledTrace trace = load_trace(path, err);
      if (!trace.tool) throw DataError(path + ": sidecar has no tool name");
      const std::string tool = *trace.tool;
      if (!by_attack.emplace(tool, std::move(trace)).second) {
        throw DataError("two traces for attack '" + tool + "'");
      }
    }
    const auto reports = run_grid(by_attack, suee1_thresholds(), g.strikes);
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    emit_json(arr, a.out, out);
    return kOk;
  }

  SchemeConfig cfg;
  if (!a.config.empty()) {
    if (!a.scheme.empty() || a.threshold || a.delta_threshold) {
      throw UsageError("--config excludes --scheme and thresholds");
    }
    cfg = scheme_config_from_json(read_json_file(a.config));
    if (g.strikes_given) cfg.strikes_required = g.strikes;
    if (g.handshake_given) cfg.include_handshake = g.include_handshake;
  } else {
    if (a.scheme.empty()) throw UsageError("eval needs --scheme, --config or --grid");
    cfg.scheme = parse_scheme(a.scheme);
    cfg.thresholds = thresholds_for(cfg.scheme, a.threshold, a.delta_threshold);
    cfg.include_handshake = g.include_handshake;
    cfg.strikes_required = g.strikes;
  }
  cfg.validate();

  Json arr = Json::array();
  for (const auto& path : a.traces) {
    arr.push_back(to_json(run_experiment(load_trace(path, err), cfg)));
  }
  emit_json(arr.size() == 1 ? arr.front() : arr, a.out, out);
  return kOk;
}

int run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path config_path(a.config);
  const SimulationConfig cfg =
      simulation_config_from_json(read_json_file(config_path), config_path.parent_path());
  const LabeledTrace trace = load_trace(a.trace, err);
  const SimulationReport report = run_pipeline(trace, cfg.controller, cfg.server);
  emit_json(to_json(report), a.out, out);
  return kOk;
}

int run_report(const ReportArgs& a, std::ostream& out) {
  std::vector<EvalReport> reports;
  for (const auto& path : a.inputs) {
    const Json j = read_json_file(path);
    if (j.is_array()) {
      for (const auto& item : j) reports.push_back(eval_report_from_json(item));
    } else {
      reports.push_back(eval_report_from_json(j));
    }
  }
  emit_text(a.csv ? render_csv(reports) : render_table(reports), a.out, out);
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slow DDoS detection toolkit", "slowdos"};
  app.require_subcommand(1);

  const CLI::IsMember kSchemeNames({"lc", "lpr", "pdu", "lpr-pdu", "lpr_pdu", "mpr", "prv"});

  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  auto* strikes_opt = app.add_option("--strikes", g.strikes, "Suspicious packets before a client is classified")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* handshake_opt = app.add_flag("--handshake,!--no-handshake", g.include_handshake,
               "Count TCP handshake packets in the metrics (default on)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize a labeled attack trace");
  s->fallthrough();
  s->add_option("--tool", synth.tool, "Attack tool")
      ->check(CLI::IsMember({"slowloris", "slowhttptest", "slowloris-ng"}));
  s->add_option("--clients", synth.clients, "Attacking clients")->check(CLI::PositiveNumber);
  s->add_option("--duration", synth.duration, "Attack duration in seconds")
      ->check(CLI::PositiveNumber);
  s->add_option("--out", synth.out, "Output pcap")->required();
  s->add_option("--profile", synth.profile, "Attack profile JSON")->check(CLI::ExistingFile);
  s->add_option("--benign-clients", synth.benign_clients, "Benign clients to merge in (0: none)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--offset", synth.offset, "Attack start within the benign trace, seconds")
      ->check(CLI::NonNegativeNumber);
  s->add_flag("--full-payload", synth.full_payload, "Capture zero-filled payload bytes");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a scheme threshold on a labeled trace");
  t->fallthrough();
  t->add_option("--trace", train.trace, "Labeled pcap")->required()->check(CLI::ExistingFile);
  t->add_option("--scheme", train.scheme, "Detection scheme")->required()->check(kSchemeNames);
  t->add_option("--max-iters", train.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--tol", train.tol)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--out", train.out, "Report path (default stdout)");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a scheme configuration");
  e->fallthrough();
  e->add_option("--trace", eval.traces, "Labeled pcap (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--scheme", eval.scheme, "Detection scheme")->check(kSchemeNames);
  e->add_option("--threshold", eval.threshold, "Scheme threshold (rate threshold for lpr-pdu)");
  e->add_option("--delta-threshold", eval.delta_threshold, "Distance threshold for lpr-pdu");
  e->add_option("--config", eval.config, "Scheme config JSON")->check(CLI::ExistingFile);
  e->add_flag("--grid,--reference-grid", eval.grid,
              "Evaluate every reference threshold row for each trace's attack");
  e->add_option("--out", eval.out, "Report path (default stdout)");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Replay a trace through the mitigation pipeline");
  m->fallthrough();
  m->add_option("--trace", sim.trace)->required()->check(CLI::ExistingFile);
  m->add_option("--config", sim.config, "Simulation config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  m->add_option("--out", sim.out, "Report path (default stdout)");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Render evaluation reports as a table");
  r->add_option("--in", rep.inputs, "Report JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_flag("--csv", rep.csv);
  r->add_option("--out", rep.out, "Output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n";
    const CLI::App* scope = &app;
    for (const auto* sub : app.get_subcommands()) scope = sub;
    err << scope->help();
    return kUsage;
  }

  g.strikes_given = strikes_opt->count() > 0;
  g.handshake_given = handshake_opt->count() > 0;

  try {
    if (s->parsed()) return run_synth(synth, g, out);
    if (t->parsed()) return run_train(train, g, out, err);
    if (e->parsed()) return run_eval(eval, g, out, err);
    if (m->parsed()) return run_simulate(sim, out, err);
    if (r->parsed()) return run_report(rep, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const std::runtime_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace slowdos::cli

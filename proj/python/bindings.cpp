#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slowdos/attack_synth.hpp"
#include "slowdos/json_io.hpp"
#include "slowdos/trace_io.hpp"

namespace py = pybind11;
using namespace slowdos;

namespace {

// Structured values cross the boundary as JSON text; the Python package
// decodes them.
std::string py_synth(const std::string& tool, int clients, double duration, int benign_clients,
                  std::uint64_t seed, const std::string& out, bool headers_only) {
  AttackProfile attack = default_profile(parse_tool(tool));
  attack.clients = clients;
  attack.duration = duration;
  attack.rng_seed = seed;
  attack.validate();
  LabeledTrace trace = synth_attack(attack);
  if (benign_clients > 0) {
    BenignProfile benign;
    benign.clients = benign_clients;
    benign.duration = duration;
    benign.rng_seed = seed + 1;
    benign.target = attack.target;
    benign.validate();
    trace = merge_traces(synth_benign(benign), trace, 0.0);
  }
  write_trace(trace, out, WriteOptions{.headers_only = headers_only});
  Json j{{"packets", trace.packets.size()},
         {"attackers", trace.attacker_ips.size()},
         {"benign", trace.benign_ips().size()}};
  return j.dump();
}

std::string py_read_trace(const std::string& path) {
  const PcapReadResult r = load_labeled_trace(path);
  Json attackers = Json::array();
  for (const Ipv4& ip : r.trace.attacker_ips) attackers.push_back(ip.str());
  Json j{{"packets", r.trace.packets.size()},
         {"dropped", r.dropped},
         {"clients", r.trace.client_ips().size()},
         {"attacker_ips", attackers}};
  return j.dump();
}

std::string py_evaluate(const std::string& path, const std::string& config) {
  const PcapReadResult r = load_labeled_trace(path);
  return to_json(run_experiment(r.trace, scheme_config_from_json(Json::parse(config)))).dump();
}

std::string py_train(const std::string& path, const std::string& scheme, bool include_handshake) {
  const PcapReadResult r = load_labeled_trace(path);
  TrainingSpec spec;
  spec.scheme = parse_scheme(scheme);
  spec.include_handshake = include_handshake;
  const MetricStream stream = training_stream(r.trace, spec);
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
  } else {
    const TrainingResult t = bisect_threshold(stream, spec);
    Thresholds& th = report.thresholds;
    switch (spec.scheme) {
      case Scheme::LC: th.duration = t.threshold; break;
      case Scheme::LPR: th.rate = t.threshold; break;
      case Scheme::PDU: th.distance_diff = t.threshold; break;
      case Scheme::MPR: th.mean_rate = t.threshold; break;
      case Scheme::PRV: th.rate_variance = t.threshold; break;
      case Scheme::LPR_PDU: break;
    }
    report.bacc = t.bacc;
    report.iterations = t.iterations;
  }
  return to_json(report).dump();
}

std::string py_simulate(const std::string& path, const std::string& config) {
  const PcapReadResult r = load_labeled_trace(path);
  const SimulationConfig cfg = simulation_config_from_json(Json::parse(config));
  return to_json(run_pipeline(r.trace, cfg.controller, cfg.server)).dump();
}

}  // namespace

PYBIND11_MODULE(_slowdos, m) {
  m.doc() = "Slow DDoS detection and mitigation core";
  m.def("balanced_accuracy",
        [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
          return balanced_accuracy({tp, fp, fn, tn});
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
  m.def("_synth", &py_synth);
  m.def("_read_trace", &py_read_trace);
  m.def("_evaluate", &py_evaluate);
  m.def("_train", &py_train);
  m.def("_simulate", &py_simulate);
}

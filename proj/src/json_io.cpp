#include "slowdos/json_io.hpp"

#include <fstream>

#include "slowdos/errors.hpp"

namespace slowdos {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

Endpoint endpoint_from(const Json& j, Endpoint fallback) {
  Endpoint e = fallback;
  if (j.contains("target_ip")) e.ip = Ipv4::parse(j.at("target_ip").get<std::string>());
  if (j.contains("target_port")) e.port = j.at("target_port").get<std::uint16_t>();
  return e;
}

/// Wraps nlohmann exceptions into FormatError with context.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << value.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json to_json(const Thresholds& t) {
  Json j = Json::object();
  if (t.duration) j["d"] = *t.duration;
  if (t.rate) j["p"] = *t.rate;
  if (t.distance_diff) j["delta"] = *t.distance_diff;
  if (t.mean_rate) j["pbar"] = *t.mean_rate;
  if (t.rate_variance) j["var"] = *t.rate_variance;
  return j;
}

Thresholds thresholds_from_json(const Json& j) {
  return guarded("thresholds", [&] {
    if (!j.is_object()) throw FormatError("thresholds must be an object");
    Thresholds t;
    for (const auto& [key, value] : j.items()) {
      const double v = value.get<double>();
      if (key == "d") t.duration = v;
      else if (key == "p") t.rate = v;
      else if (key == "delta") t.distance_diff = v;
      else if (key == "pbar") t.mean_rate = v;
      else if (key == "var") t.rate_variance = v;
      else throw FormatError("unknown threshold key '" + key + "'");
    }
    return t;
  });
}

Json to_json(const SchemeConfig& cfg) {
  Json j;
  j["scheme"] = std::string(scheme_name(cfg.scheme));
  j["thresholds"] = to_json(cfg.thresholds);
  j["include_handshake"] = cfg.include_handshake;
  j["strikes"] = cfg.strikes_required;
  return j;
}

SchemeConfig scheme_config_from_json(const Json& j) {
  return guarded("scheme config", [&] {
    SchemeConfig cfg;
    cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
    cfg.thresholds = thresholds_from_json(j.at("thresholds"));
    cfg.include_handshake = get_or(j, "include_handshake", true);
    cfg.strikes_required = get_or(j, "strikes", 1);
    cfg.validate();
    return cfg;
  });
}

Json to_json(const EvalReport& r) {
  Json j;
  j["scheme"] = std::string(scheme_name(r.config.scheme));
  j["handshake"] = r.config.include_handshake;
  j["dataset"] = r.dataset;
  j["attack"] = r.attack;
  j["tp"] = r.confusion.tp;
  j["fp"] = r.confusion.fp;
  j["fn"] = r.confusion.fn;
  j["tn"] = r.confusion.tn;
  j["bacc"] = r.bacc;
  j["det_mean_s"] = opt(r.detection.mean);
  j["det_std_s"] = opt(r.detection.stddev);
  j["thresholds"] = to_json(r.config.thresholds);
  j["strikes"] = r.config.strikes_required;
  Json events = Json::array();
  for (const auto& e : r.events) {
    events.push_back({{"ip", e.client_ip.str()},
                      {"t_detect", to_seconds(e.detection_ts)},
                      {"t_first", to_seconds(e.first_seen_ts)}});
  }
  j["events"] = std::move(events);
  return j;
}

EvalReport eval_report_from_json(const Json& j) {
  return guarded("eval report", [&] {
    EvalReport r;
    r.config.scheme = parse_scheme(j.at("scheme").get<std::string>());
    r.config.include_handshake = j.at("handshake").get<bool>();
    if (j.contains("thresholds")) r.config.thresholds = thresholds_from_json(j.at("thresholds"));
    r.config.strikes_required = get_or(j, "strikes", 1);
    r.dataset = get_or<std::string>(j, "dataset", "");
    r.attack = get_or<std::string>(j, "attack", "");
    r.confusion = {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
                   j.at("fn").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>()};
    r.bacc = j.at("bacc").get<double>();
    if (j.contains("det_mean_s") && !j.at("det_mean_s").is_null()) r.detection.mean = j.at("det_mean_s").get<double>();
    if (j.contains("det_std_s") && !j.at("det_std_s").is_null()) r.detection.stddev = j.at("det_std_s").get<double>();
    if (j.contains("events")) {
      for (const auto& e : j.at("events")) {
        r.events.push_back({Ipv4::parse(e.at("ip").get<std::string>()), r.config.scheme,
                            from_seconds(e.at("t_detect").get<double>()),
                            from_seconds(e.at("t_first").get<double>())});
      }
    }
    return r;
  });
}

Json to_json(const AttackProfile& p) {
  Json j;
  j["tool"] = std::string(tool_name(p.tool));
  j["clients"] = p.clients;
  j["sockets_per_client"] = p.sockets_per_client;
  j["interval"] = p.interval;
  j["jitter"] = p.jitter;
  j["content_length"] = p.content_length;
  j["body_chunk"] = p.body_chunk;
  j["burst_per_char"] = p.burst_per_char;
  j["attacker_block"] = p.attacker_block.str();
  j["start_ts"] = p.start_ts;
  j["duration"] = p.duration;
  j["rng_seed"] = p.rng_seed;
  j["target_ip"] = p.target.ip.str();
  j["target_port"] = p.target.port;
  return j;
}

AttackProfile attack_profile_from_json(const Json& j) {
  return guarded("attack profile", [&] {
    AttackProfile p = default_profile(parse_tool(j.at("tool").get<std::string>()));
    p.clients = get_or(j, "clients", p.clients);
    p.sockets_per_client = get_or(j, "sockets_per_client", p.sockets_per_client);
    p.interval = get_or(j, "interval", p.interval);
    p.jitter = get_or(j, "jitter", p.jitter);
    p.content_length = get_or(j, "content_length", p.content_length);
    p.body_chunk = get_or(j, "body_chunk", p.body_chunk);
    p.burst_per_char = get_or(j, "burst_per_char", p.burst_per_char);
    if (j.contains("attacker_block")) p.attacker_block = Cidr::parse(j.at("attacker_block").get<std::string>());
    p.start_ts = get_or(j, "start_ts", p.start_ts);
    p.duration = get_or(j, "duration", p.duration);
    p.rng_seed = get_or(j, "rng_seed", p.rng_seed);
    p.target = endpoint_from(j, p.target);
    p.validate();
    return p;
  });
}

SimulationConfig simulation_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  return guarded("simulation config", [&] {
    SimulationConfig cfg;
    if (j.contains("server")) {
      const auto& s = j.at("server");
      cfg.server.pool_size = get_or(s, "pool_size", cfg.server.pool_size);
      cfg.server.request_timeout_s = get_or(s, "request_timeout", cfg.server.request_timeout_s);
    }
    const auto& c = j.at("controller");
    cfg.controller.probe_interval_s = get_or(c, "probe_interval", cfg.controller.probe_interval_s);
    const auto& scheme = c.at("scheme");
    if (scheme.is_string()) {
      cfg.controller.scheme = scheme_config_from_json(read_json_file(base_dir / scheme.get<std::string>()));
    } else {
      cfg.controller.scheme = scheme_config_from_json(scheme);
    }
    return cfg;
  });
}

Json to_json(const SimulationConfig& cfg) {
  Json j;
  j["server"] = {{"pool_size", cfg.server.pool_size}, {"request_timeout", cfg.server.request_timeout_s}};
  j["controller"] = {{"probe_interval", cfg.controller.probe_interval_s},
                     {"scheme", to_json(cfg.controller.scheme)}};
  return j;
}

Json to_json(const SimulationReport& r) {
  Json j;
  j["downtime_s"] = r.downtime_s;
  j["time_to_last_block_s"] = opt(r.time_to_last_block_s);
  j["first_unreachable_s"] = opt(r.first_unreachable_s);
  j["blocked_attackers"] = r.blocked_attackers;
  j["blocked_benign"] = r.blocked_benign;
  j["refused_connections"] = r.refused_connections;
  j["dropped_packets"] = r.dropped_packets;
  j["episodes"] = r.episodes;
  j["reachable_at_end"] = r.reachable_at_end;
  j["final_phase"] = std::string(phase_name(r.final_phase));
  Json actions = Json::array();
  for (const auto& a : r.actions) {
    Json entry{{"t", to_seconds(a.ts)}, {"action", a.kind}};
    if (a.kind == "block" || a.kind == "rst") entry["ip"] = a.ip.str();
    if (a.kind == "rst") entry["port"] = a.port;
    actions.push_back(std::move(entry));
  }
  j["actions"] = std::move(actions);
  return j;
}

Json to_json(const TrainingReport& r) {
  Json j;
  j["scheme"] = std::string(scheme_name(r.scheme));
  j["include_handshake"] = r.include_handshake;
  j["thresholds"] = to_json(r.thresholds);
  j["bacc"] = r.bacc;
  j["iterations"] = r.iterations;
  if (r.scheme == Scheme::LPR_PDU) j["rounds"] = r.rounds;
  auto oracle_json = [](const OracleResult& o) {
    return Json{{"threshold", o.threshold}, {"bacc", o.bacc}, {"evaluated", o.evaluated}};
  };
  Json oracle = Json::object();
  if (r.oracle) oracle[r.scheme == Scheme::LPR_PDU ? "p" : "threshold"] = oracle_json(*r.oracle);
  if (r.oracle_distance) oracle["delta"] = oracle_json(*r.oracle_distance);
  j["oracle"] = std::move(oracle);
  return j;
}

}  // namespace slowdos

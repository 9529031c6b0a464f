#include <gtest/gtest.h>

#include <fstream>

#include "builders.hpp"
#include "slowdos/errors.hpp"
#include "slowdos/json_io.hpp"

using namespace slowdos;
using namespace slowdos::testing;

TEST(JsonIo, SchemeConfigRoundTrip) {
  const SchemeConfig cfg{Scheme::LPR_PDU, {.rate = 0.079935, .distance_diff = 1.4e-5}, false, 2};
  const Json j = to_json(cfg);
  EXPECT_EQ(j.dump(), R"({"scheme":"lpr-pdu","thresholds":{"p":0.079935,"delta":1.4e-05},"include_handshake":false,"strikes":2})");
  EXPECT_EQ(scheme_config_from_json(j), cfg);
}

TEST(JsonIo, SchemeConfigDefaultsAndErrors) {
  const SchemeConfig cfg = scheme_config_from_json(Json::parse(R"({"scheme":"lc","thresholds":{"d":2.1e-5}})"));
  EXPECT_TRUE(cfg.include_handshake);
  EXPECT_EQ(cfg.strikes_required, 1);
  EXPECT_THROW(scheme_config_from_json(Json::parse(R"({"scheme":"lc","thresholds":{"x":1}})")), FormatError);
  EXPECT_THROW(scheme_config_from_json(Json::parse(R"({"scheme":"lc","thresholds":{"p":1}})")), ConfigError);
  EXPECT_THROW(scheme_config_from_json(Json::parse(R"({"thresholds":{}})")), FormatError);
  EXPECT_THROW(scheme_config_from_json(Json::parse(R"({"scheme":"lpr","thresholds":{"p":"fast"}})")), FormatError);
}

TEST(JsonIo, EvalReportRoundTrip) {
  EvalReport r;
  r.config = {Scheme::LPR, {.rate = 0.079935}, false, 1};
  r.dataset = "synthetic";
  r.attack = "slowloris";
  r.confusion = {50, 3, 0, 497};
  r.bacc = 0.997;
  r.detection = {90.0, 0.0};
  r.events = {{Ipv4(128, 10, 0, 1), Scheme::LPR, from_seconds(90.5), from_seconds(0.5)}};
  const EvalReport back = eval_report_from_json(to_json(r));
  EXPECT_EQ(back.config, r.config);
  EXPECT_EQ(back.confusion, r.confusion);
  EXPECT_EQ(back.bacc, r.bacc);
  EXPECT_EQ(back.detection.mean, r.detection.mean);
  EXPECT_EQ(back.events, r.events);
  EXPECT_EQ(back.attack, "slowloris");
}

TEST(JsonIo, AttackProfileRoundTrip) {
  AttackProfile p = default_profile(AttackTool::SlowlorisNg);
  p.clients = 7;
  p.rng_seed = 42;
  const AttackProfile back = attack_profile_from_json(to_json(p));
  EXPECT_EQ(back.tool, p.tool);
  EXPECT_EQ(back.clients, 7);
  EXPECT_EQ(back.jitter, 5.0);
  EXPECT_EQ(back.rng_seed, 42u);
  EXPECT_EQ(back.target, p.target);

  const AttackProfile partial = attack_profile_from_json(Json::parse(R"({"tool":"slowhttptest","clients":3})"));
  EXPECT_EQ(partial.interval, 30.0);
  EXPECT_EQ(partial.clients, 3);
  EXPECT_THROW(attack_profile_from_json(Json::parse(R"({"tool":"slowloris","clients":0})")), ConfigError);
}

TEST(JsonIo, SimulationConfigWithSchemeReference) {
  const auto dir = scratch_dir("json_io");
  write_json_file(dir / "scheme.json",
                  to_json(SchemeConfig{Scheme::LPR, {.rate = 0.08}, false, 1}));
  const Json j = Json::parse(R"({"server":{"pool_size":50},"controller":{"probe_interval":0.5,"scheme":"scheme.json"}})");
  const SimulationConfig cfg = simulation_config_from_json(j, dir);
  EXPECT_EQ(cfg.server.pool_size, 50);
  EXPECT_EQ(cfg.server.request_timeout_s, 300.0);
  EXPECT_EQ(cfg.controller.probe_interval_s, 0.5);
  EXPECT_EQ(cfg.controller.scheme.thresholds.rate, 0.08);

  const SimulationConfig inline_cfg = simulation_config_from_json(to_json(cfg));
  EXPECT_EQ(inline_cfg.controller.scheme, cfg.controller.scheme);
  EXPECT_THROW(simulation_config_from_json(Json::parse(R"({"server":{}})")), FormatError);
}

TEST(JsonIo, FileErrors) {
  const auto dir = scratch_dir("json_io_errors");
  EXPECT_THROW(read_json_file(dir / "missing.json"), IoError);
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(read_json_file(dir / "bad.json"), FormatError);
}

TEST(JsonIo, TrainingReportShape) {
  TrainingReport r;
  r.scheme = Scheme::LPR_PDU;
  r.include_handshake = false;
  r.thresholds = {.rate = 0.07, .distance_diff = 1e-6};
  r.bacc = 1.0;
  r.rounds = 2;
  r.oracle = OracleResult{0.07, 0.98, 10};
  r.oracle_distance = OracleResult{1e-6, 0.97, 12};
  const Json j = to_json(r);
  EXPECT_EQ(j.at("rounds"), 2);
  EXPECT_EQ(j.at("oracle").at("p").at("bacc"), 0.98);
  EXPECT_EQ(j.at("oracle").at("delta").at("evaluated"), 12);
}

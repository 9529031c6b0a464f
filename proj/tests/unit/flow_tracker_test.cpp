#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "builders.hpp"
#include "slowdos/flow_tracker.hpp"
#include "slowdos/running_stats.hpp"

using namespace slowdos;
using namespace slowdos::testing;

namespace {

const Ipv4 kClient(192, 168, 1, 10);

std::vector<MetricSnapshot> feed(FlowTracker& tracker, const std::vector<PacketRecord>& pkts) {
  std::vector<MetricSnapshot> out;
  for (const auto& p : pkts) {
    if (auto s = tracker.ingest(p)) out.push_back(*s);
  }
  return out;
}

struct TwoPass {
  double mean;
  double variance;
};

TwoPass two_pass(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / xs.size();
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, sq / xs.size()};
}

}  // namespace

TEST(FlowTracker, RateAfterSecondPacket) {
  FlowTracker tracker(kTarget, {false});
  const auto snaps = feed(tracker, data_at(kClient, 40000, {0.0, 15.0}));
  ASSERT_EQ(snaps.size(), 2u);
  EXPECT_FALSE(snaps[0].rate);
  ASSERT_TRUE(snaps[1].rate);
  EXPECT_DOUBLE_EQ(*snaps[1].rate, 2.0 / 15.0);
}

TEST(FlowTracker, DistancesAreConsecutiveGaps) {
  FlowTracker tracker(kTarget, {true});
  feed(tracker, data_at(kClient, 40000, {0.0, 10.0, 25.0}));
  const ConnectionState* st = tracker.find({kClient, 40000, kTarget.ip, kTarget.port});
  ASSERT_NE(st, nullptr);
  EXPECT_EQ(st->prev_distance, from_seconds(10.0));
  EXPECT_EQ(st->last_distance, from_seconds(15.0));
  EXPECT_EQ(st->pkt_count, 3u);
}

TEST(FlowTracker, HandshakeExclusion) {
  const std::vector<PacketRecord> pkts = {
      to_server(kClient, 40000, 0.0, tcp::kSyn, 0),
      to_client(kClient, 40000, 0.02, tcp::kSyn | tcp::kAck),
      to_server(kClient, 40000, 0.05, tcp::kAck, 0),
      to_server(kClient, 40000, 0.1),
      to_server(kClient, 40000, 15.1),
  };
  const FlowKey key{kClient, 40000, kTarget.ip, kTarget.port};

  FlowTracker without(kTarget, {false});
  const auto a = feed(without, pkts);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(without.find(key)->first_ts, from_seconds(0.1));
  EXPECT_NEAR(*a.back().rate, 2.0 / 15.0, 1e-12);

  FlowTracker with(kTarget, {true});
  const auto b = feed(with, pkts);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(with.find(key)->first_ts, 0);
  EXPECT_NEAR(*b.back().rate, 4.0 / 15.1, 1e-12);
}

TEST(FlowTracker, OnlyFirstPureAckIsHandshake) {
  FlowTracker tracker(kTarget, {false});
  const auto snaps = feed(tracker, {
      to_server(kClient, 40000, 0.0, tcp::kSyn, 0),
      to_server(kClient, 40000, 0.05, tcp::kAck, 0),
      to_server(kClient, 40000, 1.0, tcp::kAck, 0),
  });
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(snaps[0].ts, from_seconds(1.0));
}

TEST(FlowTracker, SinglePacketOnlyHasDuration) {
  ConnectionState st;
  st.first_ts = from_seconds(3.0);
  st.pkt_count = 1;
  const MetricSnapshot s = connection_metrics(st, from_seconds(10.0));
  EXPECT_DOUBLE_EQ(s.duration, 7.0);
  EXPECT_FALSE(s.rate);
  EXPECT_FALSE(s.distance_diff);
  EXPECT_FALSE(s.mean_rate);
  EXPECT_FALSE(s.rate_variance);
}

TEST(FlowTracker, EquidistantPacketsGiveZeroDistanceDiff) {
  FlowTracker tracker(kTarget, {true});
  const auto snaps = feed(tracker, data_at(kClient, 40000, {0.3, 15.3, 30.3, 45.3, 60.3}));
  for (std::size_t i = 2; i < snaps.size(); ++i) {
    ASSERT_TRUE(snaps[i].distance_diff);
    EXPECT_EQ(*snaps[i].distance_diff, 0.0);
  }
}

TEST(FlowTracker, MeanAndVarianceOfRates) {
  FlowTracker tracker(kTarget, {true});
  const auto snaps = feed(tracker, data_at(kClient, 40000, {0.0, 15.0, 30.0}));
  const MetricSnapshot& s = snaps.back();
  const TwoPass ref = two_pass({2.0 / 15.0, 0.1});
  EXPECT_NEAR(*s.mean_rate, 0.116667, 1e-6);
  EXPECT_NEAR(*s.mean_rate, ref.mean, 1e-15);
  EXPECT_NEAR(*s.rate_variance, 0.000278, 1e-6);
  EXPECT_NEAR(*s.rate_variance, ref.variance, 1e-15);
}

TEST(FlowTracker, ServerPacketsFeedNoMetrics) {
  FlowTracker tracker(kTarget, {true});
  feed(tracker, data_at(kClient, 40000, {0.0}));
  EXPECT_FALSE(tracker.ingest(to_client(kClient, 40000, 5.0)));
  const ConnectionState* st = tracker.find({kClient, 40000, kTarget.ip, kTarget.port});
  EXPECT_EQ(st->pkt_count, 1u);
  EXPECT_EQ(st->last_ts, from_seconds(5.0));
}

TEST(FlowTracker, SweepReportsOpenConnections) {
  FlowTracker tracker(kTarget, {true});
  EXPECT_TRUE(tracker.sweep_idle(from_seconds(1.0)).empty());

  feed(tracker, data_at(kClient, 40000, {0.0, 1.0}));
  auto swept = tracker.sweep_idle(from_seconds(600.0));
  ASSERT_EQ(swept.size(), 1u);
  EXPECT_DOUBLE_EQ(swept[0].duration, 600.0);
  EXPECT_TRUE(swept[0].from_sweep);
  EXPECT_FALSE(swept[0].rate);
}

TEST(FlowTracker, SweepSkipsClosedConnections) {
  FlowTracker tracker(kTarget, {true});
  for (std::uint16_t port = 40000; port < 40004; ++port) {
    feed(tracker, data_at(kClient, port, {0.0}));
  }
  tracker.ingest(to_server(kClient, 40001, 2.0, tcp::kFin | tcp::kAck, 0));
  EXPECT_EQ(tracker.sweep_idle(from_seconds(10.0)).size(), 3u);
  EXPECT_EQ(tracker.open_count(), 3u);

  tracker.ingest(to_client(kClient, 40002, 3.0, tcp::kRst));
  EXPECT_EQ(tracker.sweep_idle(from_seconds(11.0)).size(), 2u);
}

TEST(FlowTracker, ClosingPacketIsNotAMetric) {
  FlowTracker tracker(kTarget, {true});
  feed(tracker, data_at(kClient, 40000, {0.0}));
  EXPECT_FALSE(tracker.ingest(to_server(kClient, 40000, 1.0, tcp::kFin | tcp::kAck, 0)));
  EXPECT_FALSE(tracker.ingest(to_server(kClient, 40000, 2.0)));
}

TEST(FlowTracker, SynAfterCloseStartsNewConnection) {
  FlowTracker tracker(kTarget, {true});
  feed(tracker, data_at(kClient, 40000, {0.0, 5.0}));
  tracker.ingest(to_server(kClient, 40000, 6.0, tcp::kFin | tcp::kAck, 0));
  auto s = tracker.ingest(to_server(kClient, 40000, 100.0, tcp::kSyn, 0));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->pkt_count, 1u);
  EXPECT_DOUBLE_EQ(s->duration, 0.0);
}

TEST(FlowTracker, ConnectionsAreKeyedByFourTuple) {
  FlowTracker tracker(kTarget, {true});
  feed(tracker, data_at(kClient, 40000, {0.0, 1.0}));
  feed(tracker, data_at(kClient, 40001, {0.5}));
  EXPECT_EQ(tracker.connections().size(), 2u);
  EXPECT_EQ(tracker.find({kClient, 40001, kTarget.ip, kTarget.port})->pkt_count, 1u);
}

TEST(RunningStats, MatchesTwoPassOnRandomStreams) {
  std::mt19937_64 gen(11);
  std::lognormal_distribution<double> value(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    RunningStats rs;
    std::vector<double> xs(2 + gen() % 300);
    for (double& x : xs) {
      x = value(gen);
      rs.add(x);
    }
    const TwoPass ref = two_pass(xs);
    EXPECT_NEAR(*rs.mean(), ref.mean, 1e-12 * std::abs(ref.mean));
    EXPECT_NEAR(*rs.variance(), ref.variance, 1e-9 * ref.variance);
  }
}

TEST(RunningStats, NeedsTwoSamplesForVariance) {
  RunningStats rs;
  EXPECT_FALSE(rs.mean());
  rs.add(3.0);
  EXPECT_EQ(rs.mean(), 3.0);
  EXPECT_FALSE(rs.variance());
  rs.add(5.0);
  EXPECT_EQ(rs.variance(), 1.0);
}

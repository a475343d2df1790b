#include "hive/netlist.hpp"
#include "hive/rank.hpp"
#include "hive/sim.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hive;
using namespace hive::testing;

namespace {

// One 1-bit signal per requested change count; "x" marks an all-unknown signal.
Trace counted_trace(const std::vector<std::string>& spec) {
  Trace t;
  for (size_t i = 0; i < spec.size(); ++i) {
    size_t v = t.add_var("top.s" + std::to_string(i), 1);
    SignalHistory& h = t.histories[v];
    h.has_initial = true;
    if (spec[i] == "x") {
      h.record(0, LogicValue::all_x(1));
      continue;
    }
    int n = std::stoi(spec[i]);
    for (int k = 0; k <= n; ++k) h.record(k, LogicValue(BitVec(1, k % 2)));
  }
  t.end_time = 20;
  return t;
}

}  // namespace

TEST(Ranking, OrdersByCountThenNameWithUnknownLast) {
  Trace t = counted_trace({"3", "x", "0", "3", "1"});
  RankedSignals r = signal_ranking(t, 5);
  std::vector<std::string> names;
  for (auto& s : r.signals) names.push_back(s.name);
  EXPECT_EQ(names, (std::vector<std::string>{"top.s2", "top.s4", "top.s0", "top.s3", "top.s1"}));
  EXPECT_TRUE(r.signals.back().unknown);
}

TEST(Buckets, BoundariesAroundTau) {
  const uint32_t tau = 5;
  Trace t = counted_trace({"0", "1", "2", std::to_string(tau), std::to_string(tau + 1), "x"});
  RankedSignals r = signal_ranking(t, tau);
  std::map<std::string, Bucket> b;
  for (auto& s : r.signals) b[s.name] = bucket_of(s, tau);
  EXPECT_EQ(b["top.s0"], Bucket::Once);
  EXPECT_EQ(b["top.s1"], Bucket::Once);
  EXPECT_EQ(b["top.s2"], Bucket::UpToTau);
  EXPECT_EQ(b["top.s3"], Bucket::UpToTau);
  EXPECT_EQ(b["top.s4"], Bucket::AboveTau);
  EXPECT_EQ(b["top.s5"], Bucket::Unknown);
  BucketStats st = bucketize(r, tau);
  EXPECT_EQ(st.total, 6u);
  EXPECT_EQ(st.counts, (std::array<size_t, 4>{2, 2, 1, 1}));
  double sum = 0;
  for (double p : st.percent) sum += p;
  EXPECT_NEAR(sum, 100.0, 1e-9);
}

TEST(Buckets, AllUnknownTraceFillsOnlyTheUnknownBucket) {
  Trace t = counted_trace({"x", "x", "x"});
  BucketStats st = bucketize(signal_ranking(t, 5), 5);
  EXPECT_EQ(st.counts, (std::array<size_t, 4>{0, 0, 0, 3}));
  EXPECT_DOUBLE_EQ(st.percent[3], 100.0);
}

// Buckets are a partition and agree with the oracle label for random counts.
TEST(BucketsProperty, PartitionAgreesWithOracle) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 100; ++round) {
    uint32_t tau = 1 + rng() % 8;
    std::vector<std::string> spec;
    for (int i = 0, n = 1 + rng() % 12; i < n; ++i) spec.push_back(rng() % 6 == 0 ? "x" : std::to_string(rng() % 12));
    Trace t = counted_trace(spec);
    RankedSignals r = signal_ranking(t, tau);
    BucketStats st = bucketize(r, tau);
    size_t total = 0;
    for (size_t c : st.counts) total += c;
    ASSERT_EQ(total, r.signals.size());
    auto oracle = recount_vcd(write_vcd(t));
    for (auto& s : r.signals) {
      static const std::map<Bucket, std::string> label{{Bucket::Once, "once"}, {Bucket::UpToTau, "le_tau"},
                                                       {Bucket::AboveTau, "gt_tau"}, {Bucket::Unknown, "unknown"}};
      ASSERT_EQ(label.at(bucket_of(s, tau)), bucket_label(oracle.at(s.name), tau)) << s.name << " tau " << tau;
    }
  }
}

TEST(RankReport, RoundTrips) {
  FlatDesign f = flatten(parse_hnl_file(fixture("tlc_soc/soc.hnl")));
  Scenario sc = load_scenario(fixture("tlc_soc/scenarios/s3.json"));
  RankedSignals r = signal_ranking(run_scenario(with_scenario_images(f, sc), sc), 5);
  std::string text = write_rank_report(r);
  RankedSignals back = read_rank_report(text);
  EXPECT_EQ(write_rank_report(back), text);
  ASSERT_EQ(back.signals.size(), r.signals.size());
  EXPECT_EQ(back.tau, 5u);
}

TEST(RankReport, SocRankingMatchesRecount) {
  FlatDesign f = flatten(parse_hnl_file(fixture("tlc_soc/soc.hnl")));
  for (const char* s : {"s1", "s2", "s3", "s4"}) {
    Scenario sc = load_scenario(fixture(std::string("tlc_soc/scenarios/") + s + ".json"));
    Trace t = run_scenario(with_scenario_images(f, sc), sc);
    auto oracle = recount_vcd(write_vcd(t));
    for (auto& sig : signal_ranking(t, 5).signals) {
      EXPECT_EQ(sig.count, oracle.at(sig.name).count) << s << " " << sig.name;
      EXPECT_EQ(sig.unknown, oracle.at(sig.name).unknown) << s << " " << sig.name;
    }
  }
}

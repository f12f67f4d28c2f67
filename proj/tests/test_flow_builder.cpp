#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "diaspora/flow_builder.hpp"
#include "diaspora/ingest.hpp"
#include "diaspora/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace diaspora;

namespace {

using Counts = std::map<Edge, std::int64_t>;

std::vector<NodeId> random_set(std::mt19937_64& rng, int universe, int max_size) {
  std::set<NodeId> s;
  const int n = 1 + static_cast<int>(rng() % max_size);
  while (static_cast<int>(s.size()) < n) s.insert("t" + std::to_string(rng() % universe));
  return {s.begin(), s.end()};
}

}  // namespace

// The four illustrated cases and the two-to-two cross case.
TEST(Transitions, WorkedCases) {
  EXPECT_EQ(count_transitions({"A"}, {"B"}), (Counts{{{"A", "B"}, 1}}));
  EXPECT_EQ(count_transitions({"A", "B"}, {"A"}), (Counts{{{"A", "A"}, 1}}));
  EXPECT_EQ(count_transitions({"A", "B"}, {"A", "B"}), (Counts{{{"A", "A"}, 1}, {{"B", "B"}, 1}}));
  EXPECT_EQ(count_transitions({"A", "B", "C"}, {"A", "B", "D"}),
            (Counts{{{"A", "A"}, 1}, {{"B", "B"}, 1}, {{"A", "D"}, 1}, {{"B", "D"}, 1}, {{"C", "D"}, 1}}));
  EXPECT_EQ(count_transitions({"A", "B"}, {"C", "D"}),
            (Counts{{{"A", "C"}, 1}, {{"A", "D"}, 1}, {{"B", "C"}, 1}, {{"B", "D"}, 1}}));
}

TEST(Transitions, EmptySetsRejected) {
  EXPECT_THROW(count_transitions({}, {"A"}), Error);
  EXPECT_THROW(count_transitions({"A"}, {}), Error);
}

TEST(Transitions, UniformWeightSplitsArrivals) {
  const auto w = transition_weights({"A", "B", "C"}, {"A", "D"}, AppearingWeight::uniform);
  EXPECT_DOUBLE_EQ(w.at({"A", "A"}), 1.0);
  EXPECT_DOUBLE_EQ(w.at({"A", "D"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(w.at({"C", "D"}), 1.0 / 3.0);
  EXPECT_EQ(w.size(), 4u);
}

TEST(TransitionsProperty, ClosedFormOracleAndRelabel) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_set(rng, 12, 8);
    const auto t = random_set(rng, 12, 8);
    const auto got = count_transitions(s, t);
    EXPECT_EQ(got, oracle::transitions(s, t));
    std::vector<NodeId> same, fresh;
    std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(same));
    std::set_difference(t.begin(), t.end(), s.begin(), s.end(), std::back_inserter(fresh));
    std::int64_t total = 0;
    for (const auto& [e, c] : got) total += c;
    EXPECT_EQ(total, static_cast<std::int64_t>(same.size() + s.size() * fresh.size()));

    // Relabeling nodes relabels edges.
    auto rename = [](const std::vector<NodeId>& v) {
      std::vector<NodeId> out;
      for (const auto& x : v) out.push_back("z_" + x);
      return out;
    };
    Counts renamed;
    for (const auto& [e, c] : got) renamed[{"z_" + e.first, "z_" + e.second}] = c;
    EXPECT_EQ(count_transitions(rename(s), rename(t)), renamed);
  }
}

namespace {

ActivityProfile profile(const std::string& a, int snap, std::map<TopicId, std::uint32_t> topics) {
  return {a, snap, std::move(topics), {}};
}

}  // namespace

TEST(Dominant, ArgmaxKeepsTies) {
  EXPECT_EQ(dominant_topics(profile("a", 1910, {{"A", 2}, {"B", 2}, {"C", 1}})).nodes, (std::vector<NodeId>{"A", "B"}));
  EXPECT_EQ(dominant_topics(profile("a", 1910, {{"A", 5}})).nodes, (std::vector<NodeId>{"A"}));
  EXPECT_EQ(dominant_topics(profile("a", 1910, {{"A", 1}, {"B", 1}, {"C", 1}})).nodes,
            (std::vector<NodeId>{"A", "B", "C"}));
  const auto d = dominant_topics(profile("a", 1910, {{"T1", 3}, {"T2", 3}, {"T3", 1}}));
  EXPECT_EQ(d.nodes, (std::vector<NodeId>{"T1", "T2"}));
}

TEST(Dominant, AreaModes) {
  const auto table = testutil::table_from("J\tT1\nJ\tT2\nJ\tT3\n", "T1\tA1\nT2\tA2\nT3\tA2\n");
  ActivityProfile p{"a", 1910, {{"T1", 3}, {"T2", 1}, {"T3", 1}}, {{"A1", 3}, {"A2", 4}}};
  EXPECT_EQ(dominant_set(p, Level::area, table, AreaMode::mapped).nodes, (std::vector<NodeId>{"A1"}));
  EXPECT_EQ(dominant_set(p, Level::area, table, AreaMode::argmax).nodes, (std::vector<NodeId>{"A2"}));
}

TEST(Build, TwoSnapshotsOneNetwork) {
  const SnapshotGrid g{1910, 1919, 5};
  const std::vector<DominantSet> sets{{"a", 1910, {"T1"}}, {"a", 1915, {"T2"}}, {"b", 1910, {"T1"}},
                                       {"b", 1915, {"T1"}}};
  const auto nets = build_flow_networks(sets, g, Level::topic);
  ASSERT_EQ(nets.size(), 1u);
  EXPECT_EQ(nets[0].from_snapshot, 1910);
  EXPECT_EQ(nets[0].to_snapshot, 1915);
  EXPECT_EQ(nets[0].weights, (std::map<Edge, double>{{{"T1", "T1"}, 1.0}, {{"T1", "T2"}, 1.0}}));
}

TEST(Build, GapsAndDisjointAuthorsContributeNothing) {
  const SnapshotGrid g{1910, 1924, 5};
  const std::vector<DominantSet> sets{{"a", 1910, {"T1"}}, {"a", 1920, {"T2"}}, {"b", 1910, {"T1"}},
                                       {"c", 1915, {"T1"}}};
  const auto nets = build_flow_networks(sets, g, Level::topic);
  ASSERT_EQ(nets.size(), 2u);
  EXPECT_TRUE(nets[0].empty());
  EXPECT_TRUE(nets[1].empty());
}

TEST(Build, FullGridHasTwentyNetworks) {
  EXPECT_EQ(build_flow_networks({}, SnapshotGrid{}, Level::topic).size(), 20u);
}

TEST(Decompose, AreaFlows) {
  FlowNetwork net{Level::area, 1910, 1915, {}};
  net.weights = {{{"A", "A"}, 8}, {{"B", "A"}, 2}, {{"A", "B"}, 1}, {{"B", "B"}, 5}};
  EXPECT_EQ(decompose_area_flows(net, "A"), (AreaFlows{8, 2, 1}));
  EXPECT_EQ(decompose_area_flows(net, "Z"), (AreaFlows{0, 0, 0}));
  const auto table = testutil::table_from("J\tT1\n", "T1\tA\n");
  EXPECT_THROW(decompose_area_flows(net, "Z", table), Error);
  net.level = Level::topic;
  EXPECT_THROW(decompose_area_flows(net, "A"), Error);
}

TEST(NetworkFile, RoundTrip) {
  FlowNetwork net{Level::topic, 1950, 1955, {{{"T1", "T2"}, 3}, {{"T2", "T2"}, 0.5}}};
  std::stringstream ss;
  write_network(ss, net);
  EXPECT_EQ(read_network(ss, Level::topic), net);
}

TEST(BuildProperty, MatchesOracleAndGeneratorAtBothLevels) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    synth::SyntheticSpec spec;
    spec.seed = seed;
    spec.n_authors = 40;
    const auto c = synth::generate(spec);
    const auto table = c.table();
    IngestOptions iopts;
    iopts.max_papers_per_year = 0;
    const auto profs = ingest_records(string_opener(synth::records_tsv(c)), "r", table, c.grid, iopts).profiles;
    const auto oprofs = oracle::profiles(c.records, table, c.grid, 0);
    for (auto level : {Level::topic, Level::area}) {
      FlowOptions fopts;
      fopts.threads = 1 + static_cast<unsigned>(seed % 4);
      const auto nets = build_flow_networks(dominant_sets(profs, level, table), c.grid, level, fopts);
      const auto want = oracle::flows(oprofs, table, c.grid, level);
      EXPECT_EQ(nets, want);
      EXPECT_EQ(nets, level == Level::topic ? c.topic_truth : c.area_truth);
    }
  }
}

// The total weight of a snapshot pair is the sum of each author's contribution.
TEST(BuildProperty, AdditiveOverAuthors) {
  std::mt19937_64 rng(3);
  const SnapshotGrid g{1910, 1919, 5};
  for (int round = 0; round < 100; ++round) {
    std::vector<DominantSet> sets;
    std::int64_t expected = 0;
    for (int a = 0; a < 10; ++a) {
      const auto s = random_set(rng, 6, 4), t = random_set(rng, 6, 4);
      sets.push_back({"a" + std::to_string(a), 1910, s});
      sets.push_back({"a" + std::to_string(a), 1915, t});
      for (const auto& [e, c] : oracle::transitions(s, t)) expected += c;
    }
    const auto nets = build_flow_networks(sets, g, Level::topic);
    EXPECT_EQ(nets[0].total(), static_cast<double>(expected));
  }
}

TEST(BuildProperty, UniformWeightGivesEachArrivalOneUnit) {
  std::mt19937_64 rng(11);
  const SnapshotGrid g{1910, 1919, 5};
  FlowOptions opts;
  opts.appearing = AppearingWeight::uniform;
  for (int round = 0; round < 50; ++round) {
    std::vector<DominantSet> sets;
    double expected = 0;
    for (int a = 0; a < 8; ++a) {
      const auto s = random_set(rng, 6, 4), t = random_set(rng, 6, 4);
      sets.push_back({"a" + std::to_string(a), 1910, s});
      sets.push_back({"a" + std::to_string(a), 1915, t});
      expected += static_cast<double>(t.size());  // self edges or split arrivals, one unit each
    }
    EXPECT_NEAR(build_flow_networks(sets, g, Level::topic, opts)[0].total(), expected, 1e-9);
    opts.threads = 1 + static_cast<unsigned>(round % 3);
    EXPECT_EQ(build_flow_networks(sets, g, Level::topic, opts), build_flow_networks(sets, g, Level::topic, {AppearingWeight::uniform, 1}));
  }
}

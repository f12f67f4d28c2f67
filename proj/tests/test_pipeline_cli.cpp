#include <gtest/gtest.h>

#include <algorithm>

#include "diaspora/pipeline.hpp"
#include "nlohmann/json.hpp"
#include "test_util.hpp"

using namespace diaspora;
namespace fs = std::filesystem;
using testutil::slurp;
using testutil::write;

namespace {

PipelineConfig fixture(const std::string& name, const std::string& records) {
  const auto dir = testutil::scratch(name);
  write(dir / "jt.tsv", "J1\tT1\nJ2\tT2\nJ3\tT3\n");
  write(dir / "ta.tsv", "T1\tA1\nT2\tA1\nT3\tA2\n");
  write(dir / "records.tsv", records);
  PipelineConfig cfg;
  cfg.records = dir / "records.tsv";
  cfg.journal_topics = dir / "jt.tsv";
  cfg.topic_areas = dir / "ta.tsv";
  cfg.out_dir = dir / "out";
  cfg.grid = {1910, 1919, 5};
  return cfg;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::size_t files_in(const fs::path& dir) {
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

}  // namespace

TEST(CmdIngest, ThreeRecordFixture) {
  auto cfg = fixture("ingest3", "a\tp1\tJ1\t1910\nb\tp2\tJ2\t1912\nc\tp3\tJ3\t1916\n");
  const auto out = cmd_ingest(cfg);
  EXPECT_EQ(line_count(slurp(cfg.profiles_path())), 3u);
  EXPECT_EQ(out.stats.records_read, 3u);
  const auto stats = nlohmann::json::parse(slurp(cfg.out_dir / "ingest_stats.json"));
  EXPECT_EQ(stats["records_kept"], 3);
}

TEST(CmdIngest, EmptyRecordsAndExclusion) {
  auto empty = fixture("ingest_empty", "");
  EXPECT_EQ(cmd_ingest(empty).stats.records_read, 0u);
  EXPECT_EQ(slurp(empty.profiles_path()), "");

  std::string recs;
  for (int i = 0; i < 18; ++i) recs += "busy\tp" + std::to_string(i) + "\tJ1\t1911\n";
  auto cfg = fixture("ingest_busy", recs);
  EXPECT_EQ(cmd_ingest(cfg).stats.authors_excluded, 1u);
  cfg.max_papers_per_year = 0;
  EXPECT_EQ(cmd_ingest(cfg).stats.authors_excluded, 0u);
}

TEST(CmdIngest, MissingRecordsFile) {
  auto cfg = fixture("ingest_missing", "");
  cfg.records = cfg.out_dir / "nope.tsv";
  try {
    cmd_ingest(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_input);
  }
}

TEST(CmdFlows, FileLayout) {
  auto cfg = fixture("flows2", "a\tp1\tJ1\t1910\na\tp2\tJ2\t1916\n");
  cmd_ingest(cfg);
  const auto files = cmd_flows(cfg);
  EXPECT_EQ(files.size(), 2u);  // one per level
  EXPECT_EQ(files_in(cfg.flows_dir(Level::topic)), 1u);
  EXPECT_EQ(slurp(cfg.flows_dir(Level::topic) / "1910_1915.tsv"),
            std::string(kNetworkHeader) + "\n1910\t1915\tT1\tT2\t1\n");
  EXPECT_EQ(slurp(cfg.flows_dir(Level::area) / "1910_1915.tsv"),
            std::string(kNetworkHeader) + "\n1910\t1915\tA1\tA1\t1\n");
}

TEST(CmdFlows, DisjointAuthorsGiveHeaderOnlyFile) {
  auto cfg = fixture("flows_disjoint", "a\tp1\tJ1\t1910\nb\tp2\tJ2\t1916\n");
  cmd_ingest(cfg);
  cmd_flows(cfg);
  EXPECT_EQ(slurp(cfg.flows_dir(Level::topic) / "1910_1915.tsv"), std::string(kNetworkHeader) + "\n");
  cmd_metrics(cfg);
  EXPECT_EQ(line_count(slurp(cfg.metrics_dir() / "delta.tsv")), 1u);
  EXPECT_EQ(line_count(slurp(cfg.metrics_dir() / "indices.tsv")), 1u);
}

TEST(CmdFlows, FullCenturyGrid) {
  auto cfg = fixture("flows_century", "a\tp1\tJ1\t1910\na\tp2\tJ2\t2014\n");
  cfg.grid = SnapshotGrid{};
  cfg.level = LevelSelection::topic;
  cmd_ingest(cfg);
  EXPECT_EQ(cmd_flows(cfg).size(), 20u);
  EXPECT_EQ(files_in(cfg.flows_dir(Level::topic)), 20u);
  EXPECT_TRUE(fs::exists(cfg.flows_dir(Level::topic) / "2005_2010.tsv"));
}

TEST(CmdMetrics, MatchesLibraryAndReportsPairsUsed) {
  auto cfg = fixture("metrics", "");
  cfg.grid = {1910, 1924, 5};
  // x moves T1 -> T2 twice, y joins T2 from T3 in the second transition.
  write(cfg.records,
        "x\tp1\tJ1\t1910\nx\tp2\tJ2\t1915\nz\tq1\tJ1\t1910\nz\tq2\tJ2\t1915\n"
        "x\tp3\tJ2\t1920\nz\tq3\tJ2\t1920\ny\tr1\tJ1\t1915\ny\tr2\tJ3\t1915\ny\tr3\tJ2\t1920\n");
  cmd_ingest(cfg);
  cmd_flows(cfg);
  cmd_metrics(cfg);
  const auto nets = load_networks(cfg, Level::topic);
  std::ostringstream want;
  write_attractiveness(want, attractiveness_table(nets, cfg.policy, load_table(cfg)));
  const auto got = slurp(cfg.metrics_dir() / "delta.tsv");
  EXPECT_EQ(got, want.str());
  EXPECT_EQ(got.substr(0, got.find('\n')), "snapshot\ttopic\tdelta\tpairs_used");
  EXPECT_NE(got.find("1920\tT2\t-0.25\t1\n"), std::string::npos) << got;
  EXPECT_TRUE(fs::exists(cfg.metrics_dir() / "multidisciplinarity.tsv"));
}

TEST(CmdViz, RendersAndRejectsMissingNetwork) {
  auto cfg = fixture("viz", "a\tp1\tJ1\t1910\na\tp2\tJ3\t1916\n");
  cmd_ingest(cfg);
  cmd_flows(cfg);
  const auto svg = cmd_viz(cfg, 1910, Level::topic);
  const auto first = slurp(svg);
  EXPECT_NE(first.find("<path"), std::string::npos);
  cmd_viz(cfg, 1910, Level::topic);
  EXPECT_EQ(slurp(svg), first);
  try {
    cmd_viz(cfg, 1950, Level::topic);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_input);
  }
}

TEST(CmdSynth, DeterministicAndConsistent) {
  synth::SyntheticSpec spec;
  spec.seed = 17;
  const auto a = testutil::scratch("synth_a"), b = testutil::scratch("synth_b");
  cmd_synth(spec, a);
  cmd_synth(spec, b);
  for (const auto* f : {"records.tsv", "journal_topics.tsv", "topic_areas.tsv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;

  PipelineConfig cfg;
  cfg.records = a / "records.tsv";
  cfg.journal_topics = a / "journal_topics.tsv";
  cfg.topic_areas = a / "topic_areas.tsv";
  cfg.out_dir = a / "out";
  cfg.grid = spec.grid();
  cmd_ingest(cfg);
  for (const auto& f : cmd_flows(cfg)) {
    const auto level = f.parent_path().filename();
    EXPECT_EQ(slurp(f), slurp(a / "answers" / level / f.filename())) << f;
  }
}

TEST(CmdSynth, NoMobilityOnlySelfTransitions) {
  synth::SyntheticSpec spec;
  spec.mobility = 0.0;
  const auto c = synth::generate(spec);
  std::size_t edges = 0;
  for (const auto& net : c.topic_truth)
    for (const auto& [e, w] : net.weights) {
      EXPECT_EQ(e.first, e.second);
      ++edges;
    }
  EXPECT_GT(edges, 0u);
}

#ifdef DIASPORA_CLI

TEST(Cli, ExitCodesAndDiagnostics) {
  auto cfg = fixture("cli", "a\tp1\tJ1\t1910\na\tp2\tJ2\t1916\n");
  const std::string common = " --journal-topics " + cfg.journal_topics.string() + " --topic-areas " +
                             cfg.topic_areas.string() + " --out " + cfg.out_dir.string() +
                             " --start-year 1910 --end-year 1919";
  EXPECT_EQ(testutil::run_cli("ingest --records " + cfg.records.string() + common).code, 0);
  EXPECT_EQ(testutil::run_cli("flows" + common).code, 0);
  EXPECT_EQ(testutil::run_cli("metrics" + common).code, 0);
  EXPECT_EQ(testutil::run_cli("viz --from 1910" + common).code, 0);
  EXPECT_TRUE(fs::exists(cfg.out_dir / "viz" / "topic_1910_1915.svg"));

  EXPECT_EQ(testutil::run_cli("").code, 1);
  EXPECT_EQ(testutil::run_cli("ingest --bogus").code, 1);
  EXPECT_EQ(testutil::run_cli("metrics --baseline-policy nope" + common).code, 1);

  write(cfg.records, "a\tp1\tJ1\n");
  const auto bad = testutil::run_cli("ingest --records " + cfg.records.string() + common);
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(line_count(bad.err), 1u) << bad.err;
  EXPECT_EQ(bad.err.rfind("diaspora: ", 0), 0u) << bad.err;
  EXPECT_NE(bad.err.find(":1:"), std::string::npos) << bad.err;

  const auto missing = testutil::run_cli("viz --from 1950" + common);
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(line_count(missing.err), 1u);
}

TEST(Cli, ConfigFile) {
  auto cfg = fixture("cli_config", "a\tp1\tJ1\t1910\na\tp2\tJ2\t1916\n");
  const auto conf = cfg.out_dir.parent_path() / "run.ini";
  write(conf, "records=" + cfg.records.string() + "\njournal-topics=" + cfg.journal_topics.string() +
                  "\ntopic-areas=" + cfg.topic_areas.string() + "\nout=" + cfg.out_dir.string() +
                  "\nstart-year=1910\nend-year=1919\nlevel=topic\n");
  EXPECT_EQ(testutil::run_cli("report --config " + conf.string()).code, 0);
  EXPECT_TRUE(fs::exists(cfg.out_dir / "summary.json"));
  EXPECT_TRUE(fs::exists(cfg.out_dir / "flows" / "topic" / "1910_1915.tsv"));
  EXPECT_FALSE(fs::exists(cfg.out_dir / "flows" / "area"));
}

#endif

// diaspora: command-line driver for the flow pipeline.
//
// Exit codes: 0 success, 1 usage, 2 input format, 3 internal invariant.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "diaspora/diaspora.hpp"

namespace {

int exit_code_for(diaspora::Errc code) {
  using diaspora::Errc;
  switch (code) {
    case Errc::invalid_config:
    case Errc::invalid_spec:
      return 1;
    case Errc::internal:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal flow networks of authors across research topics and areas"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value file with any of the long options");

  diaspora::PipelineConfig cfg;
  std::string out_dir = "out";
  std::string records, journal_topics, topic_areas, profiles, viz_config;
  std::string level = "both", policy = "strict", appearing = "unit", area_mode = "mapped", cut_order = "after-filter";
  std::optional<double> cut_quantile;
  unsigned threads = std::max(1U, std::thread::hardware_concurrency());
  std::uint64_t seed = 1;

  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--records", records, "records file (TSV or newline-delimited JSON)");
  app.add_option("--journal-topics", journal_topics, "journal<TAB>topic file");
  app.add_option("--topic-areas", topic_areas, "topic<TAB>area file");
  app.add_option("--profiles", profiles, "profiles file (default <out>/profiles.tsv)");
  app.add_option("--viz-config", viz_config, "key=value visualization settings");
  app.add_option("--start-year", cfg.grid.start_year)->capture_default_str();
  app.add_option("--end-year", cfg.grid.end_year)->capture_default_str();
  app.add_option("--width", cfg.grid.width, "snapshot width in years")->capture_default_str();
  app.add_option("--max-papers-per-year", cfg.max_papers_per_year, "author exclusion cap, 0 disables")
      ->capture_default_str();
  app.add_option("--cut-quantile", cut_quantile, "derive the cap from this quantile of yearly paper counts");
  app.add_option("--cut-order", cut_order, "after-filter|before-filter")->capture_default_str();
  app.add_option("--level", level, "topic|area|both")->capture_default_str();
  app.add_option("--baseline-policy", policy, "strict|active|smooth:<k>")->capture_default_str();
  app.add_option("--appearing-weight", appearing, "unit|uniform")->capture_default_str();
  app.add_option("--area-mode", area_mode, "mapped|argmax")->capture_default_str();
  app.add_option("--multidisciplinarity-quantile", cfg.multidisciplinarity_q)->capture_default_str();
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for synth")->capture_default_str();

  app.add_subcommand("ingest", "records -> <out>/profiles.tsv");
  app.add_subcommand("flows", "profiles -> <out>/flows/<level>/<from>_<to>.tsv");
  app.add_subcommand("metrics", "flows and profiles -> <out>/metrics/*.tsv");
  auto* viz = app.add_subcommand("viz", "one network -> <out>/viz/<level>_<from>_<to>.svg");
  int viz_from = 0;
  std::string viz_level = "topic";
  viz->add_option("--from", viz_from, "snapshot the network departs from")->required();
  viz->add_option("--viz-level", viz_level, "topic|area")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "seeded synthetic corpus with answer files");
  diaspora::synth::SyntheticSpec spec;
  synth->add_option("--authors", spec.n_authors)->capture_default_str();
  synth->add_option("--topics", spec.n_topics)->capture_default_str();
  synth->add_option("--areas", spec.n_areas)->capture_default_str();
  synth->add_option("--snapshots", spec.snapshots)->capture_default_str();
  synth->add_option("--mobility", spec.mobility)->capture_default_str();
  synth->add_option("--skew", spec.skew)->capture_default_str();
  synth->add_option("--presence", spec.presence)->capture_default_str();
  synth->add_option("--noise", spec.noise)->capture_default_str();
  synth->add_option("--duplicate-rate", spec.duplicate_rate)->capture_default_str();
  synth->add_option("--unclassified-rate", spec.unclassified_rate)->capture_default_str();

  app.add_subcommand("report", "ingest, flows, metrics and every viz, then <out>/summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    cfg.out_dir = out_dir;
    cfg.records = records;
    cfg.journal_topics = journal_topics;
    cfg.topic_areas = topic_areas;
    if (!profiles.empty()) cfg.profiles = profiles;
    if (!viz_config.empty()) cfg.viz_config = viz_config;
    cfg.cut_quantile = cut_quantile;
    cfg.cut_order = diaspora::parse_cut_order(cut_order);
    cfg.level = diaspora::parse_level_selection(level);
    cfg.policy = diaspora::BaselinePolicy::parse(policy);
    cfg.appearing = diaspora::parse_appearing_weight(appearing);
    cfg.area_mode = diaspora::parse_area_mode(area_mode);
    cfg.threads = threads;
    cfg.seed = seed;

    const auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    if (name == "ingest") {
      const auto outcome = diaspora::cmd_ingest(cfg);
      auto j = outcome.stats.to_json();
      std::cerr << j.dump() << '\n';
    } else if (name == "flows") {
      const auto files = diaspora::cmd_flows(cfg);
      std::cerr << "wrote " << files.size() << " network files\n";
    } else if (name == "metrics") {
      diaspora::cmd_metrics(cfg);
    } else if (name == "viz") {
      const auto lvl = diaspora::parse_level_selection(viz_level);
      if (lvl == diaspora::LevelSelection::both) diaspora::fail(diaspora::Errc::invalid_config, "--viz-level must be topic or area");
      const auto path = diaspora::cmd_viz(cfg, viz_from,
                                          lvl == diaspora::LevelSelection::topic ? diaspora::Level::topic
                                                                                 : diaspora::Level::area);
      std::cerr << "wrote " << path.string() << '\n';
    } else if (name == "synth") {
      spec.seed = seed;
      spec.start_year = cfg.grid.start_year;
      spec.width = cfg.grid.width;
      diaspora::cmd_synth(spec, cfg.out_dir);
    } else if (name == "report") {
      const auto summary = diaspora::cmd_report(cfg);
      std::cerr << summary["ingest"].dump() << '\n';
    }
  } catch (const diaspora::Error& e) {
    std::cerr << "diaspora: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "diaspora: internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

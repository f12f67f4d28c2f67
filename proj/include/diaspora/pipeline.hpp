#pragma once

// Pipeline stages with on-disk intermediate artifacts:
//
//   <out>/profiles.tsv, <out>/ingest_stats.json          ingest
//   <out>/flows/{topic,area}/<from>_<to>.tsv              flows
//   <out>/metrics/*.tsv                                     metrics
//   <out>/viz/<level>_<from>_<to>.svg                      viz
//
// Every stage reads only files written by earlier stages plus the
// classification tables, so each can be rerun and diffed on its own.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "diaspora/bundleviz.hpp"
#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/flow_builder.hpp"
#include "diaspora/ingest.hpp"
#include "diaspora/metrics.hpp"
#include "diaspora/synth.hpp"
#include "diaspora/text.hpp"

namespace diaspora {

enum class LevelSelection { topic, area, both };

inline LevelSelection parse_level_selection(std::string_view s) {
  if (s == "topic") return LevelSelection::topic;
  if (s == "area") return LevelSelection::area;
  if (s == "both") return LevelSelection::both;
  fail(Errc::invalid_config, "level must be topic, area or both");
}

inline AppearingWeight parse_appearing_weight(std::string_view s) {
  if (s == "unit") return AppearingWeight::unit;
  if (s == "uniform") return AppearingWeight::uniform;
  fail(Errc::invalid_config, "appearing weight must be unit or uniform");
}

inline AreaMode parse_area_mode(std::string_view s) {
  if (s == "mapped") return AreaMode::mapped;
  if (s == "argmax") return AreaMode::argmax;
  fail(Errc::invalid_config, "area mode must be mapped or argmax");
}

inline CutOrder parse_cut_order(std::string_view s) {
  if (s == "after-filter") return CutOrder::after_journal_filter;
  if (s == "before-filter") return CutOrder::before_journal_filter;
  fail(Errc::invalid_config, "cut order must be after-filter or before-filter");
}

struct PipelineConfig {
  std::filesystem::path records;
  std::filesystem::path journal_topics;
  std::filesystem::path topic_areas;
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> profiles;  // defaults to <out>/profiles.tsv
  std::optional<std::filesystem::path> viz_config;
  SnapshotGrid grid;
  std::uint32_t max_papers_per_year = 17;
  std::optional<double> cut_quantile;  // derive the cap from the corpus instead
  CutOrder cut_order = CutOrder::after_journal_filter;
  LevelSelection level = LevelSelection::both;
  BaselinePolicy policy;
  AppearingWeight appearing = AppearingWeight::unit;
  AreaMode area_mode = AreaMode::mapped;
  double multidisciplinarity_q = 0.99;
  unsigned threads = 1;
  std::uint64_t seed = 1;

  void validate() const {
    grid.validate();
    if (!(grid.start_year < grid.end_year)) fail(Errc::invalid_config, "start year must precede end year");
    if (cut_quantile && !(*cut_quantile > 0.0 && *cut_quantile < 1.0))
      fail(Errc::invalid_config, "cut quantile must lie in (0, 1)");
    if (threads < 1) fail(Errc::invalid_config, "threads must be >= 1");
  }

  std::filesystem::path profiles_path() const { return profiles.value_or(out_dir / "profiles.tsv"); }
  std::filesystem::path flows_dir(Level l) const { return out_dir / "flows" / std::string(level_name(l)); }
  std::filesystem::path metrics_dir() const { return out_dir / "metrics"; }
  std::filesystem::path viz_dir() const { return out_dir / "viz"; }

  std::vector<Level> levels() const {
    switch (level) {
      case LevelSelection::topic: return {Level::topic};
      case LevelSelection::area: return {Level::area};
      case LevelSelection::both: return {Level::topic, Level::area};
    }
    return {};
  }

  bool wants(Level l) const {
    if (level == LevelSelection::both) return true;
    return l == Level::topic ? level == LevelSelection::topic : level == LevelSelection::area;
  }
};

inline ClassificationTable load_table(const PipelineConfig& cfg) {
  if (cfg.journal_topics.empty() || cfg.topic_areas.empty())
    fail(Errc::invalid_config, "--journal-topics and --topic-areas are required");
  return load_classification(cfg.journal_topics, cfg.topic_areas);
}

inline std::string network_file_name(Snapshot from, Snapshot to) {
  return std::to_string(from) + "_" + std::to_string(to) + ".tsv";
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  auto out = text::open_output(p);
  out << s;
  out.flush();
  if (!out) fail(Errc::io_error, "failed writing " + p.string());
}

template <typename Writer>
void write_with(const std::filesystem::path& p, Writer&& w) {
  auto out = text::open_output(p);
  w(out);
  out.flush();
  if (!out) fail(Errc::io_error, "failed writing " + p.string());
}

inline std::vector<ActivityProfile> load_profiles(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) fail(Errc::missing_input, "profiles file " + p.string() + " does not exist");
  auto in = text::open_input(p);
  return read_profiles(in, p.string());
}

}  // namespace detail

struct IngestOutcome {
  IngestStats stats;
  std::uint32_t threshold = 0;
  std::size_t profiles = 0;
};

inline IngestOutcome cmd_ingest(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.records.empty()) fail(Errc::invalid_config, "--records is required");
  if (!std::filesystem::exists(cfg.records)) fail(Errc::missing_input, "records file " + cfg.records.string() + " does not exist");
  const auto table = load_table(cfg);
  IngestOptions opts;
  opts.max_papers_per_year = cfg.max_papers_per_year;
  opts.cut_order = cfg.cut_order;
  opts.threads = cfg.threads;
  if (cfg.cut_quantile) {
    const auto* filter = cfg.cut_order == CutOrder::after_journal_filter ? &table : nullptr;
    opts.max_papers_per_year = compute_yearly_paper_quantile(cfg.records, *cfg.cut_quantile, filter);
  }
  auto result = ingest_records(cfg.records, table, cfg.grid, opts);
  detail::write_with(cfg.profiles_path(), [&](std::ostream& o) { write_profiles(o, result.profiles); });
  auto stats = result.stats.to_json();
  stats["max_papers_per_year"] = opts.max_papers_per_year;
  detail::write_text(cfg.out_dir / "ingest_stats.json", stats.dump(2) + "\n");
  return {result.stats, opts.max_papers_per_year, result.profiles.size()};
}

inline std::vector<std::filesystem::path> cmd_flows(const PipelineConfig& cfg) {
  cfg.validate();
  const auto table = load_table(cfg);
  const auto profiles = detail::load_profiles(cfg.profiles_path());
  std::vector<std::filesystem::path> written;
  FlowOptions opts{cfg.appearing, cfg.threads};
  for (auto level : cfg.levels()) {
    const auto sets = dominant_sets(profiles, level, table, cfg.area_mode);
    const auto nets = build_flow_networks(sets, cfg.grid, level, opts);
    const auto dir = cfg.flows_dir(level);
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    for (const auto& net : nets) {
      const auto path = dir / network_file_name(net.from_snapshot, net.to_snapshot);
      detail::write_with(path, [&](std::ostream& o) { write_network(o, net); });
      written.push_back(path);
    }
  }
  return written;
}

/// Networks of one level for every consecutive grid pair, read back from disk.
inline std::vector<FlowNetwork> load_networks(const PipelineConfig& cfg, Level level) {
  const auto labels = cfg.grid.labels();
  std::vector<FlowNetwork> nets;
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    const auto path = cfg.flows_dir(level) / network_file_name(labels[i], labels[i + 1]);
    if (!std::filesystem::exists(path)) fail(Errc::missing_input, "network file " + path.string() + " does not exist");
    auto in = text::open_input(path);
    nets.push_back(read_network(in, level, path.string(), std::pair{labels[i], labels[i + 1]}));
  }
  return nets;
}

inline void cmd_metrics(const PipelineConfig& cfg) {
  cfg.validate();
  const auto table = load_table(cfg);
  const auto dir = cfg.metrics_dir();

  if (cfg.wants(Level::topic)) {
    const auto nets = load_networks(cfg, Level::topic);
    std::vector<AttractivenessRow> rows;
    std::map<Snapshot, TopAttractor> tops;
    if (nets.size() >= 2) {
      rows = attractiveness_table(nets, cfg.policy, table);
      tops = most_attractive_topics(nets, cfg.policy, table);
    }
    detail::write_with(dir / "delta.tsv", [&](std::ostream& o) { write_attractiveness(o, rows); });
    detail::write_with(dir / "most_attractive.tsv", [&](std::ostream& o) { write_most_attractive(o, tops); });
  }

  if (cfg.wants(Level::area)) {
    const auto nets = load_networks(cfg, Level::area);
    std::vector<AreaIndices> all;
    std::vector<AreaIndices> emitted;
    for (const auto& net : nets) {
      auto idx = migration_indices(net, &table);
      if (!net.empty()) emitted.insert(emitted.end(), idx.begin(), idx.end());
      all.insert(all.end(), idx.begin(), idx.end());
    }
    std::map<AreaId, MedianIndices> medians;
    if (!all.empty()) medians = median_sink_source(all);
    std::erase_if(medians, [](const auto& kv) { return kv.second.rho_samples == 0 && kv.second.sigma_samples == 0; });
    detail::write_with(dir / "indices.tsv", [&](std::ostream& o) { write_indices(o, emitted); });
    detail::write_with(dir / "area_flows.tsv", [&](std::ostream& o) { write_area_flows(o, emitted); });
    detail::write_with(dir / "medians.tsv", [&](std::ostream& o) { write_medians(o, medians); });
  }

  const auto profiles = detail::load_profiles(cfg.profiles_path());
  const auto dists = multidisciplinarity(profiles, cfg.multidisciplinarity_q);
  detail::write_with(dir / "multidisciplinarity.tsv", [&](std::ostream& o) { write_histogram(o, dists); });
  detail::write_with(dir / "author_volume.tsv", [&](std::ostream& o) { write_volumes(o, dists); });
}

inline viz::VizConfig load_viz_config(const PipelineConfig& cfg) {
  return cfg.viz_config ? viz::VizConfig::load(*cfg.viz_config) : viz::VizConfig{};
}

/// Renders the network leaving snapshot `from` at `level`.
inline std::filesystem::path cmd_viz(const PipelineConfig& cfg, Snapshot from, Level level) {
  cfg.validate();
  const auto table = load_table(cfg);
  const auto vcfg = load_viz_config(cfg);
  const Snapshot to = cfg.grid.next(from);
  const auto path = cfg.flows_dir(level) / network_file_name(from, to);
  if (!std::filesystem::exists(path)) fail(Errc::missing_input, "network file " + path.string() + " does not exist");
  auto in = text::open_input(path);
  const auto net = read_network(in, level, path.string(), std::pair{from, to});
  const auto out = cfg.viz_dir() / (std::string(level_name(level)) + "_" + std::to_string(from) + "_" +
                                    std::to_string(to) + ".svg");
  viz::render_svg(net, &table, vcfg, out);
  return out;
}

inline void cmd_synth(const synth::SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  synth::write_corpus(synth::generate(spec), out_dir);
}

/// All stages in order, then `<out>/summary.json`.
inline nlohmann::ordered_json cmd_report(const PipelineConfig& cfg) {
  const auto ingest = cmd_ingest(cfg);
  const auto flows = cmd_flows(cfg);
  cmd_metrics(cfg);
  const auto labels = cfg.grid.labels();
  std::size_t svgs = 0;
  for (auto level : cfg.levels())
    for (std::size_t i = 0; i + 1 < labels.size(); ++i, ++svgs) cmd_viz(cfg, labels[i], level);

  nlohmann::ordered_json summary;
  summary["ingest"] = ingest.stats.to_json();
  summary["max_papers_per_year"] = ingest.threshold;
  summary["profiles"] = ingest.profiles;
  summary["snapshots"] = labels.size();
  summary["network_files"] = flows.size();
  summary["svg_files"] = svgs;
  summary["baseline_policy"] = cfg.policy.name();
  summary["appearing_weight"] = cfg.appearing == AppearingWeight::unit ? "unit" : "uniform";
  summary["area_mode"] = cfg.area_mode == AreaMode::mapped ? "mapped" : "argmax";
  if (cfg.wants(Level::topic)) {
    const auto table = load_table(cfg);
    const auto nets = load_networks(cfg, Level::topic);
    auto& tops = summary["most_attractive"] = nlohmann::ordered_json::array();
    if (nets.size() >= 2)
      for (const auto& [snap, top] : most_attractive_topics(nets, cfg.policy, table))
        tops.push_back({{"snapshot", snap}, {"topic", top.topic}, {"delta", top.delta}, {"ties", top.ties.size()}});
  }
  detail::write_text(cfg.out_dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

}  // namespace diaspora

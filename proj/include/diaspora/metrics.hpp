#pragma once

// Attractiveness, migration indices and multidisciplinarity computed from
// flow networks and activity profiles.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/flow_builder.hpp"
#include "diaspora/ingest.hpp"
#include "diaspora/text.hpp"

namespace diaspora {

/// Treatment of source topics whose baseline incoming flow is zero.
struct BaselinePolicy {
  enum class Kind { strict, active, smooth };

  Kind kind = Kind::strict;
  double k = 0.0;  // smoothing constant, `smooth` only

  static BaselinePolicy strict() { return {Kind::strict, 0.0}; }
  static BaselinePolicy active() { return {Kind::active, 0.0}; }
  static BaselinePolicy smooth(double k) { return {Kind::smooth, k}; }

  /// Accepts `strict`, `active` or `smooth:<k>` with k >= 0.
  static BaselinePolicy parse(std::string_view s) {
    if (s == "strict") return strict();
    if (s == "active") return active();
    if (s.rfind("smooth:", 0) == 0) {
      const auto k = text::parse_double(s.substr(7));
      if (k && *k >= 0.0) return smooth(*k);
    }
    fail(Errc::invalid_config, "baseline policy must be strict, active or smooth:<k>, got '" + std::string(s) + "'");
  }

  std::string name() const {
    switch (kind) {
      case Kind::strict: return "strict";
      case Kind::active: return "active";
      case Kind::smooth: return "smooth:" + text::format_number(k);
    }
    return "strict";
  }
};

struct AttractivenessSeries {
  TopicId topic;
  std::map<Snapshot, double> points;           // keyed by arrival snapshot
  std::map<Snapshot, std::size_t> pairs_used;  // sources with a nonzero baseline
};

namespace detail {

using Incoming = std::map<NodeId, std::map<NodeId, double>>;  // target -> source -> weight

inline Incoming incoming_index(const FlowNetwork& net) {
  Incoming in;
  for (const auto& [e, w] : net.weights)
    if (e.first != e.second) in[e.second][e.first] = w;
  return in;
}

struct DeltaValue {
  double delta = 0.0;
  std::size_t pairs_used = 0;
};

inline DeltaValue delta_from(const Incoming& baseline, const Incoming& current, const TopicId& t,
                             const BaselinePolicy& policy, std::size_t topic_count) {
  static const std::map<NodeId, double> none;
  auto bit = baseline.find(t);
  auto cit = current.find(t);
  const auto& base = bit == baseline.end() ? none : bit->second;
  const auto& cur = cit == current.end() ? none : cit->second;
  auto lookup = [](const std::map<NodeId, double>& m, const NodeId& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };

  DeltaValue out;
  double sum = 0.0;
  for (const auto& [source, b] : base) {
    ++out.pairs_used;
    const double denom = policy.kind == BaselinePolicy::Kind::smooth ? b + policy.k : b;
    sum += (lookup(cur, source) - b) / denom;
  }
  if (policy.kind == BaselinePolicy::Kind::smooth && policy.k > 0.0) {
    // Sources with no baseline become defined once smoothed.
    for (const auto& [source, c] : cur)
      if (!base.contains(source)) sum += c / policy.k;
  }
  double denominator = 0.0;
  if (policy.kind == BaselinePolicy::Kind::active)
    denominator = static_cast<double>(out.pairs_used);
  else
    denominator = topic_count > 1 ? static_cast<double>(topic_count - 1) : 0.0;
  out.delta = denominator > 0.0 ? sum / denominator : 0.0;
  return out;
}

inline void require_topic_level(const std::vector<FlowNetwork>& nets) {
  for (const auto& n : nets)
    if (n.level != Level::topic) fail(Errc::level_mismatch, "attractiveness needs topic-level networks");
}

/// Indices i >= 1 whose network directly follows network i-1.
inline std::vector<std::size_t> baseline_pairs(const std::vector<FlowNetwork>& nets) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < nets.size(); ++i)
    if (nets[i - 1].to_snapshot == nets[i].from_snapshot) out.push_back(i);
  if (out.empty()) fail(Errc::no_baseline, "attractiveness needs two consecutive networks");
  return out;
}

}  // namespace detail

/// Mean relative change of the flows entering `topic` from each other topic,
/// between the network arriving one snapshot earlier and the current one.
inline AttractivenessSeries attractiveness(const std::vector<FlowNetwork>& nets, const TopicId& topic,
                                           const BaselinePolicy& policy, const ClassificationTable& table) {
  if (!table.has_topic(topic)) fail(Errc::unknown_topic, "topic " + topic + " is not classified");
  detail::require_topic_level(nets);
  AttractivenessSeries series{topic, {}, {}};
  for (auto i : detail::baseline_pairs(nets)) {
    const auto v = detail::delta_from(detail::incoming_index(nets[i - 1]), detail::incoming_index(nets[i]), topic,
                                      policy, table.topic_count());
    series.points[nets[i].to_snapshot] = v.delta;
    series.pairs_used[nets[i].to_snapshot] = v.pairs_used;
  }
  return series;
}

struct AttractivenessRow {
  Snapshot snapshot = 0;
  TopicId topic;
  double delta = 0.0;
  std::size_t pairs_used = 0;
};

/// Every classified topic at every snapshot that has a baseline and some
/// cross-topic flow in either network, sorted by (snapshot, topic).
inline std::vector<AttractivenessRow> attractiveness_table(const std::vector<FlowNetwork>& nets,
                                                           const BaselinePolicy& policy,
                                                           const ClassificationTable& table) {
  detail::require_topic_level(nets);
  std::vector<AttractivenessRow> rows;
  for (auto i : detail::baseline_pairs(nets)) {
    const auto base = detail::incoming_index(nets[i - 1]);
    const auto cur = detail::incoming_index(nets[i]);
    if (base.empty() && cur.empty()) continue;  // no cross-topic flow at all
    for (const auto& [t, area] : table.topic_area()) {
      const auto v = detail::delta_from(base, cur, t, policy, table.topic_count());
      rows.push_back({nets[i].to_snapshot, t, v.delta, v.pairs_used});
    }
  }
  return rows;
}

struct TopAttractor {
  TopicId topic;               // lexicographically first among the ties
  double delta = 0.0;
  std::vector<TopicId> ties;   // every topic reaching the maximum, sorted
};

inline std::map<Snapshot, TopAttractor> most_attractive_topics(const std::vector<FlowNetwork>& nets,
                                                               const BaselinePolicy& policy,
                                                               const ClassificationTable& table) {
  std::map<Snapshot, TopAttractor> out;
  for (const auto& row : attractiveness_table(nets, policy, table)) {
    auto [it, inserted] = out.try_emplace(row.snapshot);
    auto& top = it->second;
    if (inserted || row.delta > top.delta) {
      top = {row.topic, row.delta, {row.topic}};
    } else if (row.delta == top.delta) {
      top.ties.push_back(row.topic);  // rows arrive in topic order
    }
  }
  return out;
}

struct AreaIndices {
  AreaId area;
  Snapshot snapshot = 0;  // arrival snapshot
  AreaFlows flows;
  double iota = 0.0;
  double epsilon = 0.0;
  double rho = 0.0;
  double sigma = 0.0;
  bool rho_defined = false;    // total cross inflow is positive
  bool sigma_defined = false;  // total cross outflow is positive
};

namespace detail {

inline double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace detail

/// Immigration, emigration, sink and source indices of every area, sorted by
/// area. Areas come from the network and, when given, the table.
inline std::vector<AreaIndices> migration_indices(const FlowNetwork& net, const ClassificationTable* table = nullptr) {
  if (net.level != Level::area) fail(Errc::level_mismatch, "migration indices need an area-level network");
  std::set<AreaId> areas = net.nodes();
  if (table != nullptr) areas.insert(table->areas().begin(), table->areas().end());

  std::vector<AreaIndices> out;
  double total_to = 0.0;
  double total_from = 0.0;
  for (const auto& a : areas) {
    AreaIndices idx;
    idx.area = a;
    idx.snapshot = net.to_snapshot;
    idx.flows = decompose_area_flows(net, a);
    total_to += idx.flows.to;
    total_from += idx.flows.from;
    out.push_back(std::move(idx));
  }
  for (auto& idx : out) {
    const auto& f = idx.flows;
    idx.iota = detail::ratio(f.to, f.intra + f.to);
    idx.epsilon = detail::ratio(f.from, f.intra + f.from);
    idx.rho = detail::ratio(f.to, total_to);
    idx.sigma = detail::ratio(f.from, total_from);
    idx.rho_defined = total_to > 0.0;
    idx.sigma_defined = total_from > 0.0;
  }
  return out;
}

struct MedianIndices {
  double rho = 0.0;
  double sigma = 0.0;
  std::size_t rho_samples = 0;
  std::size_t sigma_samples = 0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Median sink and source index per area over the snapshots where each is defined.
inline std::map<AreaId, MedianIndices> median_sink_source(const std::vector<AreaIndices>& series) {
  if (series.empty()) fail(Errc::empty_series, "no migration indices to summarize");
  std::map<AreaId, std::pair<std::vector<double>, std::vector<double>>> samples;
  for (const auto& s : series) {
    auto& [rho, sigma] = samples[s.area];
    if (s.rho_defined) rho.push_back(s.rho);
    if (s.sigma_defined) sigma.push_back(s.sigma);
  }
  std::map<AreaId, MedianIndices> out;
  for (auto& [area, v] : samples)
    out[area] = {detail::median(v.first), detail::median(v.second), v.first.size(), v.second.size()};
  return out;
}

struct MultidisciplinarityDistribution {
  Snapshot snapshot = 0;
  std::map<std::size_t, std::size_t> histogram;  // number of areas -> authors
  std::size_t author_volume = 0;
  std::size_t quantile_cutoff = 0;
};

/// Distribution of the number of distinct areas each author published in,
/// per snapshot, using the author's full area set.
inline std::map<Snapshot, MultidisciplinarityDistribution> multidisciplinarity(
    const std::vector<ActivityProfile>& profiles, double q = 0.99) {
  if (!(q > 0.0 && q <= 1.0)) fail(Errc::invalid_config, "quantile must lie in (0, 1]");
  std::map<Snapshot, MultidisciplinarityDistribution> out;
  for (const auto& p : profiles) {
    if (p.area_counts.empty()) continue;
    auto& d = out[p.snapshot];
    d.snapshot = p.snapshot;
    ++d.histogram[p.area_counts.size()];
    ++d.author_volume;
  }
  for (auto& [snap, d] : out) {
    std::size_t cum = 0;
    for (const auto& [k, c] : d.histogram) {
      cum += c;
      if (static_cast<double>(cum) / static_cast<double>(d.author_volume) >= q - 1e-12) {
        d.quantile_cutoff = k;
        break;
      }
    }
  }
  return out;
}

// Metric files. Numbers use 12 significant digits; rows are sorted.

inline void write_attractiveness(std::ostream& out, const std::vector<AttractivenessRow>& rows) {
  out << "snapshot\ttopic\tdelta\tpairs_used\n";
  for (const auto& r : rows)
    out << r.snapshot << '\t' << r.topic << '\t' << text::format_number(r.delta) << '\t' << r.pairs_used << '\n';
}

inline void write_most_attractive(std::ostream& out, const std::map<Snapshot, TopAttractor>& tops) {
  out << "snapshot\ttopic\tdelta\tties\n";
  for (const auto& [snap, top] : tops) {
    out << snap << '\t' << top.topic << '\t' << text::format_number(top.delta) << '\t';
    for (std::size_t i = 0; i < top.ties.size(); ++i) out << (i ? "," : "") << top.ties[i];
    out << '\n';
  }
}

inline void write_indices(std::ostream& out, const std::vector<AreaIndices>& rows) {
  out << "snapshot\tarea\tiota\tepsilon\trho\tsigma\n";
  for (const auto& r : rows)
    out << r.snapshot << '\t' << r.area << '\t' << text::format_number(r.iota) << '\t'
        << text::format_number(r.epsilon) << '\t' << text::format_number(r.rho) << '\t'
        << text::format_number(r.sigma) << '\n';
}

inline void write_area_flows(std::ostream& out, const std::vector<AreaIndices>& rows) {
  out << "snapshot\tarea\tintra\tto\tfrom\n";
  for (const auto& r : rows)
    out << r.snapshot << '\t' << r.area << '\t' << text::format_number(r.flows.intra) << '\t'
        << text::format_number(r.flows.to) << '\t' << text::format_number(r.flows.from) << '\n';
}

inline void write_medians(std::ostream& out, const std::map<AreaId, MedianIndices>& medians) {
  out << "area\tmedian_rho\tmedian_sigma\trho_snapshots\tsigma_snapshots\n";
  for (const auto& [a, m] : medians)
    out << a << '\t' << text::format_number(m.rho) << '\t' << text::format_number(m.sigma) << '\t'
        << m.rho_samples << '\t' << m.sigma_samples << '\n';
}

inline void write_histogram(std::ostream& out, const std::map<Snapshot, MultidisciplinarityDistribution>& dists) {
  out << "snapshot\tn_areas\tauthor_count\n";
  for (const auto& [snap, d] : dists)
    for (const auto& [k, c] : d.histogram) out << snap << '\t' << k << '\t' << c << '\n';
}

inline void write_volumes(std::ostream& out, const std::map<Snapshot, MultidisciplinarityDistribution>& dists) {
  out << "snapshot\tauthor_volume\tq_cutoff\n";
  for (const auto& [snap, d] : dists) out << snap << '\t' << d.author_volume << '\t' << d.quantile_cutoff << '\n';
}

}  // namespace diaspora

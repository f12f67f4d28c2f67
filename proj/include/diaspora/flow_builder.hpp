#pragma once

// Dominant activity sets and inter-snapshot transition counting.
//
// An author contributes to the network between consecutive snapshots only if
// active in both. For dominant sets S (earlier) and S' (later), each node of
// S' that was already in S receives one self-transition; each node new in S'
// receives one transition from every node of S. Nodes dropping out of S are
// sources for the new nodes and nothing else.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/ingest.hpp"
#include "diaspora/text.hpp"

namespace diaspora {

using NodeId = std::string;
using Edge = std::pair<NodeId, NodeId>;

/// How much an appearing node receives from each earlier node.
enum class AppearingWeight {
  unit,     // 1 from every source
  uniform,  // 1/|S| from every source, so each appearing node gains 1 in total
};

/// How the area-level dominant set is obtained.
enum class AreaMode {
  mapped,  // dominant topics mapped to their areas, deduplicated
  argmax,  // argmax over the per-area activity counts
};

struct DominantSet {
  std::string author_id;
  Snapshot snapshot = 0;
  std::vector<NodeId> nodes;  // sorted, unique, non-empty

  friend bool operator==(const DominantSet&, const DominantSet&) = default;
};

namespace detail {

template <typename Counts>
std::vector<NodeId> argmax_keys(const Counts& counts) {
  if (counts.empty()) fail(Errc::empty_set, "activity profile has no counts");
  std::uint32_t best = 0;
  for (const auto& [k, c] : counts) best = std::max<std::uint32_t>(best, c);
  std::vector<NodeId> out;
  for (const auto& [k, c] : counts)
    if (c == best) out.push_back(k);
  return out;  // map keys are already sorted
}

}  // namespace detail

/// Every topic reaching the profile's maximum count; ties are kept.
inline DominantSet dominant_topics(const ActivityProfile& profile) {
  return {profile.author_id, profile.snapshot, detail::argmax_keys(profile.topic_counts)};
}

inline std::vector<NodeId> map_to_areas(const std::vector<NodeId>& topics, const ClassificationTable& table) {
  std::set<NodeId> areas;
  for (const auto& t : topics) areas.insert(table.area_of(t));
  return {areas.begin(), areas.end()};
}

inline DominantSet dominant_set(const ActivityProfile& profile, Level level, const ClassificationTable& table,
                                AreaMode mode = AreaMode::mapped) {
  if (level == Level::topic) return dominant_topics(profile);
  if (mode == AreaMode::argmax) return {profile.author_id, profile.snapshot, detail::argmax_keys(profile.area_counts)};
  auto topics = dominant_topics(profile);
  return {profile.author_id, profile.snapshot, map_to_areas(topics.nodes, table)};
}

inline std::vector<DominantSet> dominant_sets(const std::vector<ActivityProfile>& profiles, Level level,
                                              const ClassificationTable& table, AreaMode mode = AreaMode::mapped) {
  std::vector<DominantSet> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(dominant_set(p, level, table, mode));
  return out;
}

/// Integer transition counts between two dominant sets.
inline std::map<Edge, std::int64_t> count_transitions(const std::vector<NodeId>& from,
                                                      const std::vector<NodeId>& to) {
  if (from.empty() || to.empty()) fail(Errc::empty_set, "transition between empty dominant sets");
  const std::set<NodeId> earlier(from.begin(), from.end());
  std::map<Edge, std::int64_t> out;
  for (const auto& target : std::set<NodeId>(to.begin(), to.end())) {
    if (earlier.contains(target)) {
      out[{target, target}] += 1;
    } else {
      for (const auto& source : earlier) out[{source, target}] += 1;
    }
  }
  return out;
}

/// Transitions with the configured weight for appearing nodes.
inline std::map<Edge, double> transition_weights(const std::vector<NodeId>& from, const std::vector<NodeId>& to,
                                                 AppearingWeight mode = AppearingWeight::unit) {
  const auto counts = count_transitions(from, to);
  const double share = mode == AppearingWeight::unit ? 1.0 : 1.0 / static_cast<double>(std::set(from.begin(), from.end()).size());
  std::map<Edge, double> out;
  for (const auto& [e, c] : counts) out[e] = e.first == e.second ? static_cast<double>(c) : static_cast<double>(c) * share;
  return out;
}

/// Weighted directed transitions between two consecutive snapshots.
struct FlowNetwork {
  Level level = Level::topic;
  Snapshot from_snapshot = 0;
  Snapshot to_snapshot = 0;
  std::map<Edge, double> weights;  // strictly positive entries only

  double weight(const NodeId& s, const NodeId& t) const {
    auto it = weights.find({s, t});
    return it == weights.end() ? 0.0 : it->second;
  }

  double total() const {
    double sum = 0.0;
    for (const auto& [e, w] : weights) sum += w;
    return sum;
  }

  std::set<NodeId> nodes() const {
    std::set<NodeId> out;
    for (const auto& [e, w] : weights) {
      out.insert(e.first);
      out.insert(e.second);
    }
    return out;
  }

  bool empty() const noexcept { return weights.empty(); }

  friend bool operator==(const FlowNetwork&, const FlowNetwork&) = default;
};

struct FlowOptions {
  AppearingWeight appearing = AppearingWeight::unit;
  unsigned threads = 1;
};

/// One network per consecutive pair of grid labels, in time order. Absent
/// authors contribute nothing, including across gaps.
inline std::vector<FlowNetwork> build_flow_networks(const std::vector<DominantSet>& sets, const SnapshotGrid& grid,
                                                    Level level, const FlowOptions& opts = {}) {
  grid.validate();
  const auto labels = grid.labels();

  // Group by author. Per-author transitions are independent; accumulation keeps
  // integer tallies keyed by |S| so the final weights are exact and
  // independent of merge order.
  std::map<std::string_view, std::map<Snapshot, const DominantSet*>> by_author;
  for (const auto& s : sets) {
    if (s.nodes.empty()) fail(Errc::empty_set, "dominant set of " + s.author_id + " is empty");
    by_author[s.author_id][s.snapshot] = &s;
  }
  std::vector<const std::map<Snapshot, const DominantSet*>*> authors;
  authors.reserve(by_author.size());
  for (const auto& [a, m] : by_author) authors.push_back(&m);

  using Tally = std::map<Snapshot, std::map<Edge, std::map<std::size_t, std::int64_t>>>;
  const unsigned workers = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(std::max<std::size_t>(1, authors.size()))));
  std::vector<Tally> partial(workers);
  detail::run_workers(workers, [&](unsigned w) {
    auto& tally = partial[w];
    for (std::size_t i = w; i < authors.size(); i += workers) {
      const auto& snaps = *authors[i];
      for (const auto& [snap, set] : snaps) {
        auto next = snaps.find(grid.next(snap));
        if (next == snaps.end()) continue;
        const std::size_t fan = set->nodes.size();
        for (const auto& [e, c] : count_transitions(set->nodes, next->second->nodes))
          tally[snap][e][e.first == e.second ? 0 : fan] += c;
      }
    }
  });

  Tally merged;
  for (auto& t : partial)
    for (auto& [snap, edges] : t)
      for (auto& [e, by_fan] : edges)
        for (auto& [fan, c] : by_fan) merged[snap][e][fan] += c;

  std::vector<FlowNetwork> out;
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    FlowNetwork net{level, labels[i], labels[i + 1], {}};
    auto it = merged.find(labels[i]);
    if (it != merged.end()) {
      for (const auto& [e, by_fan] : it->second) {
        double w = 0.0;
        for (const auto& [fan, c] : by_fan) {
          if (opts.appearing == AppearingWeight::unit || fan == 0)
            w += static_cast<double>(c);
          else
            w += static_cast<double>(c) / static_cast<double>(fan);
        }
        if (w > 0.0) net.weights.emplace(e, w);
      }
    }
    out.push_back(std::move(net));
  }
  return out;
}

struct AreaFlows {
  double intra = 0.0;
  double to = 0.0;    // arriving from other areas
  double from = 0.0;  // leaving for other areas

  friend bool operator==(const AreaFlows&, const AreaFlows&) = default;
};

/// Flows of area `a`, attributed to the arrival snapshot of `net`.
inline AreaFlows decompose_area_flows(const FlowNetwork& net, const AreaId& a) {
  if (net.level != Level::area) fail(Errc::level_mismatch, "area decomposition of a topic-level network");
  AreaFlows f;
  for (const auto& [e, w] : net.weights) {
    if (e.first == a && e.second == a)
      f.intra += w;
    else if (e.second == a)
      f.to += w;
    else if (e.first == a)
      f.from += w;
  }
  return f;
}

/// As above, rejecting areas the classification does not know.
inline AreaFlows decompose_area_flows(const FlowNetwork& net, const AreaId& a, const ClassificationTable& table) {
  if (!table.has_area(a)) fail(Errc::unknown_area, "area " + a + " is not classified");
  return decompose_area_flows(net, a);
}

// Network files: header row then `from<TAB>to<TAB>source<TAB>target<TAB>weight`,
// sorted by (source, target); one network per file.

inline constexpr std::string_view kNetworkHeader = "from_snapshot\tto_snapshot\tsource\ttarget\tweight";

inline void write_network(std::ostream& out, const FlowNetwork& net) {
  out << kNetworkHeader << '\n';
  for (const auto& [e, w] : net.weights)
    out << net.from_snapshot << '\t' << net.to_snapshot << '\t' << e.first << '\t' << e.second << '\t'
        << text::format_number(w) << '\n';
}

inline FlowNetwork read_network(std::istream& in, Level level, std::string_view name = "network",
                                std::optional<std::pair<Snapshot, Snapshot>> pair = std::nullopt) {
  FlowNetwork net;
  net.level = level;
  if (pair) std::tie(net.from_snapshot, net.to_snapshot) = *pair;
  bool have_pair = pair.has_value();
  std::string line;
  std::vector<std::string_view> cols;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::strip_cr(line);
    if (text::is_skippable(view) || view == kNetworkHeader) continue;
    text::split_tabs(view, cols);
    if (cols.size() != 5) fail_at(Errc::malformed_line, name, lineno, "expected 5 columns");
    const auto from = text::parse_int<int>(cols[0]);
    const auto to = text::parse_int<int>(cols[1]);
    const auto w = text::parse_double(cols[4]);
    if (!from || !to || !w || !(*w > 0.0)) fail_at(Errc::malformed_line, name, lineno, "bad network row");
    if (!have_pair) {
      net.from_snapshot = *from;
      net.to_snapshot = *to;
      have_pair = true;
    } else if (*from != net.from_snapshot || *to != net.to_snapshot) {
      fail_at(Errc::malformed_line, name, lineno, "rows from more than one snapshot pair");
    }
    net.weights[{std::string(cols[2]), std::string(cols[3])}] += *w;
  }
  return net;
}

}  // namespace diaspora

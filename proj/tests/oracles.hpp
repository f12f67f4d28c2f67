#pragma once

// Brute-force reference computations used only by tests. They work from raw
// records and plain containers and share no code path with the library
// beyond the data types.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "diaspora/classification.hpp"
#include "diaspora/flow_builder.hpp"
#include "diaspora/ingest.hpp"

namespace oracle {

using diaspora::ClassificationTable;
using diaspora::FlowNetwork;
using diaspora::PublicationRecord;
using diaspora::SnapshotGrid;

using Profile = std::tuple<std::string, int, std::map<std::string, std::uint32_t>, std::set<std::string>>;

/// Literal filter-then-count over an in-memory record list.
inline std::vector<Profile> profiles(const std::vector<PublicationRecord>& records, const ClassificationTable& table,
                                     const SnapshotGrid& grid, std::uint32_t cap) {
  // First occurrence wins for duplicated (author, paper).
  std::vector<PublicationRecord> kept;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    if (table.topics_of(r.journal_id) == nullptr) continue;
    if (r.year < grid.start_year || r.year > grid.end_year) continue;
    if (!seen.insert({r.author_id, r.paper_id}).second) continue;
    kept.push_back(r);
  }
  std::set<std::string> excluded;
  if (cap > 0) {
    std::map<std::pair<std::string, int>, std::uint32_t> per_year;
    for (const auto& r : kept)
      if (++per_year[{r.author_id, r.year}] > cap) excluded.insert(r.author_id);
  }
  std::map<std::pair<std::string, int>, Profile> out;
  for (const auto& r : kept) {
    if (excluded.contains(r.author_id)) continue;
    int snap = grid.start_year;
    while (snap + grid.width <= r.year) snap += grid.width;
    auto& p = out[{r.author_id, snap}];
    std::get<0>(p) = r.author_id;
    std::get<1>(p) = snap;
    for (const auto& t : table.topics_of_journal(r.journal_id)) {
      std::get<2>(p)[t] += 1;
      std::get<3>(p).insert(table.area_of(t));
    }
  }
  std::vector<Profile> v;
  for (auto& [k, p] : out) v.push_back(p);
  return v;
}

/// Pair (u, v) of S x S' is a transition iff v is new in S' or u == v.
inline std::map<diaspora::Edge, std::int64_t> transitions(const std::vector<std::string>& s,
                                                          const std::vector<std::string>& s_next) {
  std::map<diaspora::Edge, std::int64_t> out;
  const std::set<std::string> a(s.begin(), s.end()), b(s_next.begin(), s_next.end());
  for (const auto& u : a)
    for (const auto& v : b)
      if (!a.contains(v) || u == v) out[{u, v}] += 1;
  return out;
}

inline std::vector<std::string> argmax(const std::map<std::string, std::uint32_t>& counts) {
  std::uint32_t best = 0;
  for (const auto& [k, c] : counts)
    if (c > best) best = c;
  std::vector<std::string> out;
  for (const auto& [k, c] : counts)
    if (c == best) out.push_back(k);
  return out;
}

/// Networks recomputed author by author. Area level maps dominant topics.
inline std::vector<FlowNetwork> flows(const std::vector<Profile>& profs, const ClassificationTable& table,
                                      const SnapshotGrid& grid, diaspora::Level level) {
  std::map<std::pair<std::string, int>, std::vector<std::string>> dom;
  for (const auto& [author, snap, counts, areas] : profs) {
    auto top = argmax(counts);
    if (level == diaspora::Level::area) {
      std::set<std::string> mapped;
      for (const auto& t : top) mapped.insert(table.area_of(t));
      top.assign(mapped.begin(), mapped.end());
    }
    dom[{author, snap}] = top;
  }
  std::vector<FlowNetwork> nets;
  for (int s = grid.start_year; s + grid.width <= grid.end_year; s += grid.width) {
    FlowNetwork net{level, s, s + grid.width, {}};
    for (const auto& [key, set] : dom) {
      if (key.second != s) continue;
      auto it = dom.find({key.first, s + grid.width});
      if (it == dom.end()) continue;
      for (const auto& [e, c] : transitions(set, it->second)) net.weights[e] += static_cast<double>(c);
    }
    nets.push_back(net);
  }
  return nets;
}

/// Attractiveness as written: (1 / (N - 1)) * sum over t' != t of
/// (V(t) - V(t-1)) / V(t-1), skipping vanishing baselines.
inline double delta_strict(const FlowNetwork& before, const FlowNetwork& now, const std::string& t,
                           const ClassificationTable& table) {
  double sum = 0.0;
  for (const auto& other : table.topics()) {
    if (other == t) continue;
    const double base = before.weight(other, t);
    if (base == 0.0) continue;
    sum += (now.weight(other, t) - base) / base;
  }
  return sum / static_cast<double>(table.topic_count() - 1);
}

inline double delta_active(const FlowNetwork& before, const FlowNetwork& now, const std::string& t,
                           const ClassificationTable& table) {
  double sum = 0.0;
  int used = 0;
  for (const auto& other : table.topics()) {
    if (other == t) continue;
    const double base = before.weight(other, t);
    if (base == 0.0) continue;
    sum += (now.weight(other, t) - base) / base;
    ++used;
  }
  return used == 0 ? 0.0 : sum / used;
}

struct Indices {
  double iota, epsilon, rho, sigma;
};

/// Immigration, emigration, sink and source indices by direct summation.
inline std::map<std::string, Indices> indices(const FlowNetwork& net, const std::set<std::string>& areas) {
  auto v_intra = [&](const std::string& a) { return net.weight(a, a); };
  auto v_to = [&](const std::string& a) {
    double s = 0;
    for (const auto& b : areas)
      if (b != a) s += net.weight(b, a);
    return s;
  };
  auto v_from = [&](const std::string& a) {
    double s = 0;
    for (const auto& b : areas)
      if (b != a) s += net.weight(a, b);
    return s;
  };
  double all_to = 0, all_from = 0;
  for (const auto& a : areas) {
    all_to += v_to(a);
    all_from += v_from(a);
  }
  auto div = [](double n, double d) { return d == 0.0 ? 0.0 : n / d; };
  std::map<std::string, Indices> out;
  for (const auto& a : areas)
    out[a] = {div(v_to(a), v_intra(a) + v_to(a)), div(v_from(a), v_intra(a) + v_from(a)), div(v_to(a), all_to),
              div(v_from(a), all_from)};
  return out;
}

}  // namespace oracle

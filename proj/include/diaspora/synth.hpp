#pragma once

// Seeded synthetic corpora with known flows.
//
// The generator first samples each author's dominant topic set per snapshot,
// then emits papers that realize exactly those sets (dominant topics get c
// papers each, distractor topics fewer). The flows implied by the sampled sets
// are kept as the answer key, so pipeline output can be compared against it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/flow_builder.hpp"
#include "diaspora/ingest.hpp"
#include "diaspora/text.hpp"

namespace diaspora::synth {

struct SyntheticSpec {
  std::size_t n_authors = 50;
  std::size_t n_topics = 10;
  std::size_t n_areas = 3;
  std::size_t snapshots = 6;
  int start_year = 1910;
  int width = 5;
  double mobility = 0.3;    // chance the dominant set changes between snapshots
  double skew = 1.0;        // Zipf exponent of topic popularity
  double presence = 0.85;   // chance an author is active in a snapshot
  double noise = 0.5;       // chance of distractor papers in a snapshot
  double duplicate_rate = 0.05;
  double unclassified_rate = 0.05;
  double out_of_range_rate = 0.02;
  std::uint32_t max_set_size = 3;
  std::uint64_t seed = 1;

  void validate() const {
    auto bad = [](const std::string& why) { fail(Errc::invalid_spec, why); };
    if (n_authors < 1) bad("n_authors must be >= 1");
    if (!(n_topics >= n_areas && n_areas >= 1)) bad("need n_topics >= n_areas >= 1");
    if (snapshots < 1) bad("snapshots must be >= 1");
    if (width < 1) bad("width must be >= 1");
    if (max_set_size < 1) bad("max_set_size must be >= 1");
    for (double p : {mobility, presence, noise, duplicate_rate, unclassified_rate, out_of_range_rate})
      if (!(p >= 0.0 && p <= 1.0)) bad("probabilities must lie in [0, 1]");
    if (!(skew >= 0.0)) bad("skew must be >= 0");
  }

  SnapshotGrid grid() const {
    return {start_year, start_year + static_cast<int>(snapshots) * width - 1, width};
  }
};

struct SyntheticCorpus {
  SnapshotGrid grid;
  std::vector<PublicationRecord> records;
  std::vector<std::pair<JournalId, TopicId>> journal_topics;
  std::vector<std::pair<TopicId, AreaId>> topic_areas;
  std::map<std::pair<std::string, Snapshot>, std::vector<TopicId>> dominant;  // sampled sets
  std::vector<FlowNetwork> topic_truth;
  std::vector<FlowNetwork> area_truth;  // dominant topics mapped to areas

  ClassificationTable table() const {
    std::unordered_map<JournalId, std::vector<TopicId>> jt;
    for (const auto& [j, t] : journal_topics) jt[j].push_back(t);
    return ClassificationTable(std::move(jt), {topic_areas.begin(), topic_areas.end()});
  }
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Distributions are implementation-defined in <random>; these are not.
  std::size_t below(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

  std::size_t weighted(const std::vector<double>& cumulative) {
    const double x = unit() * cumulative.back();
    return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
  }

 private:
  std::mt19937_64 engine_;
};

inline std::string padded(char prefix, std::size_t i, std::size_t n) {
  const auto digits = std::to_string(std::max<std::size_t>(1, n - 1)).size();
  auto s = std::to_string(i);
  return std::string(1, prefix) + std::string(digits - std::min(digits, s.size()), '0') + s;
}

/// Ground-truth transitions: self edges on S ∩ S', every S -> (S' \ S) pair.
inline void add_truth(FlowNetwork& net, const std::vector<NodeId>& before, const std::vector<NodeId>& after) {
  std::vector<NodeId> kept, fresh;
  std::set_intersection(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(kept));
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(fresh));
  for (const auto& t : kept) net.weights[{t, t}] += 1.0;
  for (const auto& s : before)
    for (const auto& t : fresh) net.weights[{s, t}] += 1.0;
}

}  // namespace detail

inline SyntheticCorpus generate(const SyntheticSpec& spec) {
  spec.validate();
  detail::Rng rng(spec.seed);
  SyntheticCorpus corpus;
  corpus.grid = spec.grid();

  std::vector<TopicId> topics;
  std::vector<AreaId> areas;
  for (std::size_t a = 0; a < spec.n_areas; ++a) areas.push_back(detail::padded('A', a, spec.n_areas));
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    topics.push_back(detail::padded('T', t, spec.n_topics));
    corpus.topic_areas.emplace_back(topics.back(), areas[t % spec.n_areas]);
  }
  std::map<TopicId, AreaId> area_of(corpus.topic_areas.begin(), corpus.topic_areas.end());

  // One single-topic journal per topic, plus a two-topic journal per adjacent pair.
  auto single = [&](std::size_t t) { return "J" + topics[t]; };
  auto pair_journal = [&](std::size_t t) { return "JM" + topics[t]; };  // topics t and t+1
  for (std::size_t t = 0; t < spec.n_topics; ++t) corpus.journal_topics.emplace_back(single(t), topics[t]);
  if (spec.n_topics >= 2) {
    for (std::size_t t = 0; t < spec.n_topics; ++t) {
      const auto u = (t + 1) % spec.n_topics;
      if (u == t || (spec.n_topics == 2 && t == 1)) continue;
      corpus.journal_topics.emplace_back(pair_journal(t), topics[t]);
      corpus.journal_topics.emplace_back(pair_journal(t), topics[u]);
    }
  }
  const bool has_pair_journals = spec.n_topics >= 2;

  std::vector<double> cumulative;
  double acc = 0.0;
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    acc += 1.0 / std::pow(static_cast<double>(t + 1), spec.skew);
    cumulative.push_back(acc);
  }
  auto sample_set = [&](std::size_t size) {
    std::set<std::size_t> s;
    size = std::min(size, spec.n_topics);
    while (s.size() < size) s.insert(rng.weighted(cumulative));
    return s;
  };
  auto random_size = [&] { return 1 + rng.below(std::min<std::size_t>(spec.max_set_size, spec.n_topics)); };
  auto sample_outside = [&](const std::set<std::size_t>& s) -> std::optional<std::size_t> {
    if (s.size() >= spec.n_topics) return std::nullopt;
    for (;;) {
      const auto t = rng.weighted(cumulative);
      if (!s.contains(t)) return t;
    }
  };

  auto evolve = [&](std::set<std::size_t> s) {
    if (!rng.chance(spec.mobility)) return s;
    switch (rng.below(4)) {
      case 0: {  // move elsewhere entirely
        const auto fresh = sample_set(random_size());
        if (fresh != s) return fresh;
        break;
      }
      case 1:  // narrow down
        if (s.size() > 1) {
          auto it = s.begin();
          std::advance(it, static_cast<long>(rng.below(s.size())));
          s.erase(it);
          return s;
        }
        break;
      case 2:  // broaden
        if (s.size() < spec.max_set_size)
          if (auto t = sample_outside(s)) {
            s.insert(*t);
            return s;
          }
        break;
      default:  // swap one topic
        if (auto t = sample_outside(s)) {
          auto it = s.begin();
          std::advance(it, static_cast<long>(rng.below(s.size())));
          s.erase(it);
          s.insert(*t);
          return s;
        }
    }
    if (auto t = sample_outside(s)) {  // any change rather than none
      auto it = s.begin();
      std::advance(it, static_cast<long>(rng.below(s.size())));
      s.erase(it);
      s.insert(*t);
    }
    return s;
  };

  // Four authors realize the canonical transition cases when movement is allowed.
  const bool force_cases = spec.mobility > 0.0 && spec.n_topics >= 4 && spec.n_authors >= 4 && spec.snapshots >= 2;
  const std::vector<std::pair<std::set<std::size_t>, std::set<std::size_t>>> cases = {
      {{0}, {1}}, {{0, 1}, {0}}, {{0, 1}, {0, 1}}, {{0, 1, 2}, {0, 1, 3}}};

  const auto labels = corpus.grid.labels();
  std::vector<PublicationRecord> records;
  for (std::size_t a = 0; a < spec.n_authors; ++a) {
    const auto author = detail::padded('a', a, spec.n_authors);
    std::size_t paper_no = 0;
    std::optional<std::set<std::size_t>> current;
    for (std::size_t si = 0; si < labels.size(); ++si) {
      const Snapshot snap = labels[si];
      std::set<std::size_t> s;
      if (force_cases && a < 4 && si < 2) {
        s = si == 0 ? cases[a].first : cases[a].second;
      } else {
        if (!rng.chance(spec.presence)) continue;
        s = current ? evolve(*current) : sample_set(random_size());
      }
      current = s;

      std::vector<TopicId> names;
      for (auto t : s) names.push_back(topics[t]);
      corpus.dominant[{author, snap}] = names;

      auto emit = [&](const std::string& journal) {
        const int year = snap + static_cast<int>(rng.below(static_cast<std::size_t>(spec.width)));
        records.push_back({author, "P" + author + "_" + std::to_string(paper_no++), journal, year});
      };

      const std::uint32_t c = 2 + static_cast<std::uint32_t>(rng.below(2));
      std::map<std::size_t, std::uint32_t> credit;
      // Adjacent dominant pairs may share a multiplex journal paper.
      for (auto t : s) {
        const auto u = (t + 1) % spec.n_topics;
        if (has_pair_journals && u != t && s.contains(u) && !(spec.n_topics == 2 && t == 1) && rng.chance(0.5) &&
            credit[t] < c && credit[u] < c) {
          emit(pair_journal(t));
          ++credit[t];
          ++credit[u];
        }
      }
      for (auto t : s)
        while (credit[t] < c) {
          emit(single(t));
          ++credit[t];
        }
      if (rng.chance(spec.noise)) {
        const auto k = 1 + rng.below(2);
        for (std::size_t i = 0; i < k; ++i) {
          const auto t = sample_outside(s);
          if (!t) break;
          const auto u = (*t + 1) % spec.n_topics;
          const bool pair_ok = has_pair_journals && u != *t && !s.contains(u) && !(spec.n_topics == 2 && *t == 1);
          if (pair_ok && rng.chance(0.5) && credit[*t] + 1 < c && credit[u] + 1 < c) {
            emit(pair_journal(*t));
            ++credit[*t];
            ++credit[u];
          } else if (credit[*t] + 1 < c) {
            emit(single(*t));
            ++credit[*t];
          }
        }
      }
      if (rng.chance(spec.unclassified_rate)) emit("JX_unclassified");
      if (rng.chance(spec.out_of_range_rate))
        records.push_back({author, "P" + author + "_" + std::to_string(paper_no++), single(*s.begin()),
                           corpus.grid.start_year - 1});
    }
  }

  // Duplicated lines, then a seeded shuffle so order carries no information.
  const auto n = records.size();
  for (std::size_t i = 0; i < n; ++i)
    if (rng.chance(spec.duplicate_rate)) records.push_back(records[i]);
  for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rng.below(i)]);
  corpus.records = std::move(records);

  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    corpus.topic_truth.push_back({Level::topic, labels[i], labels[i + 1], {}});
    corpus.area_truth.push_back({Level::area, labels[i], labels[i + 1], {}});
  }
  for (auto it = corpus.dominant.begin(); it != corpus.dominant.end(); ++it) {
    const auto& [key, set] = *it;
    const auto next = corpus.dominant.find({key.first, corpus.grid.next(key.second)});
    if (next == corpus.dominant.end()) continue;
    const auto idx = static_cast<std::size_t>((key.second - corpus.grid.start_year) / corpus.grid.width);
    detail::add_truth(corpus.topic_truth[idx], set, next->second);
    auto to_areas = [&](const std::vector<TopicId>& ts) {
      std::set<AreaId> out;
      for (const auto& t : ts) out.insert(area_of.at(t));
      return std::vector<AreaId>(out.begin(), out.end());
    };
    detail::add_truth(corpus.area_truth[idx], to_areas(set), to_areas(next->second));
  }
  return corpus;
}

inline std::string records_tsv(const SyntheticCorpus& c) {
  std::string out = "# author_id\tpaper_id\tjournal_id\tyear\n";
  for (const auto& r : c.records)
    out += r.author_id + '\t' + r.paper_id + '\t' + r.journal_id + '\t' + std::to_string(r.year) + '\n';
  return out;
}

inline std::string journal_topics_tsv(const SyntheticCorpus& c) {
  std::string out;
  for (const auto& [j, t] : c.journal_topics) out += j + '\t' + t + '\n';
  return out;
}

inline std::string topic_areas_tsv(const SyntheticCorpus& c) {
  std::string out;
  for (const auto& [t, a] : c.topic_areas) out += t + '\t' + a + '\n';
  return out;
}

inline std::string network_file_name(const FlowNetwork& net) {
  return std::to_string(net.from_snapshot) + "_" + std::to_string(net.to_snapshot) + ".tsv";
}

/// records.tsv, journal_topics.tsv, topic_areas.tsv and answers/{topic,area}/<from>_<to>.tsv.
inline void write_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  auto put = [](const std::filesystem::path& p, const std::string& s) {
    auto out = text::open_output(p);
    out << s;
    if (!out) fail(Errc::io_error, "failed writing " + p.string());
  };
  put(dir / "records.tsv", records_tsv(c));
  put(dir / "journal_topics.tsv", journal_topics_tsv(c));
  put(dir / "topic_areas.tsv", topic_areas_tsv(c));
  for (const auto* nets : {&c.topic_truth, &c.area_truth}) {
    for (const auto& net : *nets) {
      auto out = text::open_output(dir / "answers" / std::string(level_name(net.level)) / network_file_name(net));
      write_network(out, net);
    }
  }
}

}  // namespace diaspora::synth

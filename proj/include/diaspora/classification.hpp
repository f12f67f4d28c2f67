#pragma once

// Journal -> topic (multiplex) and topic -> area classification tables.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diaspora/error.hpp"
#include "diaspora/text.hpp"

namespace diaspora {

using TopicId = std::string;
using AreaId = std::string;
using JournalId = std::string;

enum class Level { topic, area };

constexpr std::string_view level_name(Level l) { return l == Level::topic ? "topic" : "area"; }

/// Immutable after loading; concurrent readers need no synchronization.
class ClassificationTable {
 public:
  ClassificationTable() = default;

  /// Builds a validated table. Topics per journal keep first-occurrence order
  /// with duplicates removed.
  ClassificationTable(std::unordered_map<JournalId, std::vector<TopicId>> journal_topics,
                      std::map<TopicId, AreaId> topic_area)
      : journal_topics_(std::move(journal_topics)), topic_area_(std::move(topic_area)) {
    if (journal_topics_.empty() || topic_area_.empty()) fail(Errc::empty_table, "classification table is empty");
    for (auto& [journal, topics] : journal_topics_) {
      std::vector<TopicId> unique;
      for (auto& t : topics) {
        if (!topic_area_.contains(t))
          fail(Errc::unknown_topic, "journal " + journal + " references topic " + t + " with no area");
        if (std::find(unique.begin(), unique.end(), t) == unique.end()) unique.push_back(t);
      }
      if (unique.empty()) fail(Errc::empty_table, "journal " + journal + " has no topics");
      topics = std::move(unique);
    }
    for (const auto& [topic, area] : topic_area_) areas_.insert(area);
    build_journal_areas();
  }

  std::size_t topic_count() const noexcept { return topic_area_.size(); }
  std::size_t area_count() const noexcept { return areas_.size(); }
  std::size_t journal_count() const noexcept { return journal_topics_.size(); }

  bool has_journal(std::string_view j) const { return find_journal(j) != journal_topics_.end(); }
  bool has_topic(const TopicId& t) const { return topic_area_.contains(t); }
  bool has_area(const AreaId& a) const { return areas_.contains(a); }

  /// nullptr when the journal is not classified.
  const std::vector<TopicId>* topics_of(std::string_view j) const {
    auto it = find_journal(j);
    return it == journal_topics_.end() ? nullptr : &it->second;
  }

  const std::vector<TopicId>& topics_of_journal(std::string_view j) const {
    auto* t = topics_of(j);
    if (t == nullptr) fail(Errc::unknown_journal, "journal " + std::string(j) + " is not classified");
    return *t;
  }

  /// Union of the journal's topic areas in first-occurrence order.
  const std::vector<AreaId>& areas_of_journal(std::string_view j) const {
    auto it = journal_areas_.find(std::string(j));
    if (it == journal_areas_.end()) fail(Errc::unknown_journal, "journal " + std::string(j) + " is not classified");
    return it->second;
  }

  /// nullptr when the journal is not classified.
  const std::vector<AreaId>* areas_of(std::string_view j) const {
    auto it = journal_areas_.find(std::string(j));
    return it == journal_areas_.end() ? nullptr : &it->second;
  }

  const AreaId& area_of(const TopicId& t) const {
    auto it = topic_area_.find(t);
    if (it == topic_area_.end()) fail(Errc::unknown_topic, "topic " + t + " is not classified");
    return it->second;
  }

  const std::map<TopicId, AreaId>& topic_area() const noexcept { return topic_area_; }
  const std::unordered_map<JournalId, std::vector<TopicId>>& journal_topics() const noexcept {
    return journal_topics_;
  }
  const std::set<AreaId>& areas() const noexcept { return areas_; }

  std::vector<TopicId> topics() const {
    std::vector<TopicId> out;
    out.reserve(topic_area_.size());
    for (const auto& [t, a] : topic_area_) out.push_back(t);
    return out;
  }

  friend bool operator==(const ClassificationTable& a, const ClassificationTable& b) {
    return a.journal_topics_ == b.journal_topics_ && a.topic_area_ == b.topic_area_;
  }

 private:
  using JournalMap = std::unordered_map<JournalId, std::vector<TopicId>>;

  JournalMap::const_iterator find_journal(std::string_view j) const {
    return journal_topics_.find(std::string(j));
  }

  void build_journal_areas() {
    for (const auto& [journal, topics] : journal_topics_) {
      std::vector<AreaId> areas;
      for (const auto& t : topics) {
        const auto& a = topic_area_.at(t);
        if (std::find(areas.begin(), areas.end(), a) == areas.end()) areas.push_back(a);
      }
      journal_areas_.emplace(journal, std::move(areas));
    }
  }

  JournalMap journal_topics_;
  std::map<TopicId, AreaId> topic_area_;
  std::set<AreaId> areas_;
  std::unordered_map<JournalId, std::vector<AreaId>> journal_areas_;
};

namespace detail {

/// Reads a two-column TSV and hands each validated pair to `sink`.
template <typename Sink>
void read_pairs(std::istream& in, std::string_view name, Sink&& sink) {
  std::string line;
  std::vector<std::string_view> cols;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::strip_cr(line);
    if (text::is_skippable(view)) continue;
    text::split_tabs(view, cols);
    if (cols.size() != 2)
      fail_at(Errc::malformed_line, name, lineno, "expected 2 tab-separated columns, got " + std::to_string(cols.size()));
    for (auto c : cols)
      if (c.empty() || text::has_whitespace(c))
        fail_at(Errc::malformed_line, name, lineno, "identifiers must be non-empty and contain no whitespace");
    sink(cols[0], cols[1], lineno);
  }
}

}  // namespace detail

inline ClassificationTable load_classification(std::istream& journal_topic, std::istream& topic_area,
                                               std::string_view journal_name = "journal_topics",
                                               std::string_view area_name = "topic_areas") {
  std::map<TopicId, AreaId> areas;
  detail::read_pairs(topic_area, area_name, [&](std::string_view t, std::string_view a, std::size_t lineno) {
    auto [it, inserted] = areas.emplace(std::string(t), std::string(a));
    if (!inserted && it->second != a)
      fail_at(Errc::conflicting_area, area_name, lineno,
              "topic " + it->first + " already assigned to area " + it->second);
  });

  std::unordered_map<JournalId, std::vector<TopicId>> journals;
  detail::read_pairs(journal_topic, journal_name, [&](std::string_view j, std::string_view t, std::size_t lineno) {
    std::string topic(t);
    if (!areas.contains(topic))
      fail_at(Errc::unknown_topic, journal_name, lineno, "topic " + topic + " has no area");
    auto& list = journals[std::string(j)];
    if (std::find(list.begin(), list.end(), topic) == list.end()) list.push_back(std::move(topic));
  });

  if (journals.empty()) fail(Errc::empty_table, std::string(journal_name) + " has no journal entries");
  if (areas.empty()) fail(Errc::empty_table, std::string(area_name) + " has no topic entries");
  return ClassificationTable(std::move(journals), std::move(areas));
}

inline ClassificationTable load_classification(const std::filesystem::path& journal_topic_file,
                                               const std::filesystem::path& topic_area_file) {
  auto jt = text::open_input(journal_topic_file);
  auto ta = text::open_input(topic_area_file);
  return load_classification(jt, ta, journal_topic_file.string(), topic_area_file.string());
}

/// Fraction of journals by number of distinct topics (or areas) they carry.
inline std::map<std::size_t, double> multiplexity_histogram(const ClassificationTable& table, Level level) {
  if (table.journal_count() == 0) fail(Errc::empty_table, "multiplexity of an empty table");
  std::map<std::size_t, std::size_t> counts;
  for (const auto& [journal, topics] : table.journal_topics()) {
    const auto k = level == Level::topic ? topics.size() : table.areas_of_journal(journal).size();
    ++counts[k];
  }
  std::map<std::size_t, double> out;
  const double n = static_cast<double>(table.journal_count());
  for (const auto& [k, c] : counts) out[k] = static_cast<double>(c) / n;
  return out;
}

}  // namespace diaspora

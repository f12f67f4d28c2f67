#pragma once

// Two-pass streaming ingestion of authorship records into per-author,
// per-snapshot activity profiles.
//
// Pass one tallies distinct papers per (author, calendar year) and marks the
// authors that exceed the per-year cap. Pass two replays the records and
// accumulates topic and area activity for the surviving authors. Both passes
// shard work by author hash; shards see records in file order, so results do
// not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/text.hpp"

namespace diaspora {

using Snapshot = int;

/// Non-overlapping windows of `width` years labelled by their first year.
struct SnapshotGrid {
  int start_year = 1910;
  int end_year = 2014;
  int width = 5;

  void validate() const {
    if (width < 1) fail(Errc::invalid_config, "snapshot width must be >= 1");
    if (end_year < start_year) fail(Errc::invalid_config, "end year precedes start year");
  }

  bool contains(int year) const noexcept { return year >= start_year && year <= end_year; }

  /// Total over all integers; floor division keeps years before the start consistent.
  Snapshot label_of(int year) const noexcept {
    const int offset = year - start_year;
    int q = offset / width;
    if (offset % width != 0 && offset < 0) --q;
    return start_year + q * width;
  }

  std::vector<Snapshot> labels() const {
    std::vector<Snapshot> out;
    for (int s = label_of(start_year); s <= end_year; s += width) out.push_back(s);
    return out;
  }

  Snapshot next(Snapshot s) const noexcept { return s + width; }

  friend bool operator==(const SnapshotGrid&, const SnapshotGrid&) = default;
};

struct PublicationRecord {
  std::string author_id;
  std::string paper_id;
  std::string journal_id;
  int year = 0;
};

/// Activity of one author within one snapshot. Every paper of a multiplex
/// journal counts once per topic; area counts use the deduplicated area set.
struct ActivityProfile {
  std::string author_id;
  Snapshot snapshot = 0;
  std::map<TopicId, std::uint32_t> topic_counts;
  std::map<AreaId, std::uint32_t> area_counts;

  std::vector<AreaId> area_set() const {
    std::vector<AreaId> out;
    out.reserve(area_counts.size());
    for (const auto& [a, c] : area_counts) out.push_back(a);
    return out;
  }

  friend bool operator==(const ActivityProfile&, const ActivityProfile&) = default;
};

struct IngestStats {
  std::uint64_t records_read = 0;
  std::uint64_t records_kept = 0;
  std::uint64_t dropped_unclassified = 0;
  std::uint64_t dropped_year = 0;
  std::uint64_t dropped_duplicate = 0;
  std::uint64_t dropped_excluded = 0;
  std::uint64_t authors_excluded = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["records_read"] = records_read;
    j["records_kept"] = records_kept;
    j["dropped_unclassified"] = dropped_unclassified;
    j["dropped_year"] = dropped_year;
    j["dropped_duplicate"] = dropped_duplicate;
    j["dropped_excluded"] = dropped_excluded;
    j["authors_excluded"] = authors_excluded;
    return j;
  }

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Whether the per-year cap counts only classified journal papers (default)
/// or every parsed record.
enum class CutOrder { after_journal_filter, before_journal_filter };

struct IngestOptions {
  std::uint32_t max_papers_per_year = 17;  // 0 disables the cut
  CutOrder cut_order = CutOrder::after_journal_filter;
  unsigned threads = 1;
  std::size_t block_lines = 1 << 16;
};

struct IngestResult {
  std::vector<ActivityProfile> profiles;  // sorted by (author, snapshot)
  IngestStats stats;
};

/// Produces a fresh stream positioned at the start of the records.
using StreamOpener = std::function<std::unique_ptr<std::istream>()>;

namespace detail {

enum class RecordFormat { tsv, ndjson };

struct NumberedLine {
  std::size_t lineno = 0;
  std::string text;
};

/// Reads non-comment lines in blocks and remembers the detected format.
class RecordLineReader {
 public:
  explicit RecordLineReader(std::istream& in) : in_(in) {}

  bool next_block(std::vector<NumberedLine>& block, std::size_t max_lines) {
    block.clear();
    std::string line;
    while (block.size() < max_lines && std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::is_skippable(line)) continue;
      if (!format_) {
        const auto first = line.find_first_not_of(" \t");
        format_ = (first != std::string::npos && line[first] == '{') ? RecordFormat::ndjson : RecordFormat::tsv;
      }
      block.push_back({lineno_, std::move(line)});
    }
    return !block.empty();
  }

  RecordFormat format() const noexcept { return format_.value_or(RecordFormat::tsv); }

 private:
  std::istream& in_;
  std::size_t lineno_ = 0;
  std::optional<RecordFormat> format_;
};

struct ParsedRecord {
  PublicationRecord rec;
  std::size_t lineno = 0;
};

inline void check_token(std::string_view v, std::string_view field, std::string_view name, std::size_t lineno) {
  if (v.empty()) fail_at(Errc::malformed_record, name, lineno, "empty " + std::string(field));
  if (text::has_whitespace(v))
    fail_at(Errc::malformed_record, name, lineno, std::string(field) + " contains whitespace");
}

inline PublicationRecord parse_tsv_record(std::string_view line, std::string_view name, std::size_t lineno) {
  std::vector<std::string_view> cols;
  text::split_tabs(line, cols);
  if (cols.size() != 4)
    fail_at(Errc::malformed_record, name, lineno, "expected 4 tab-separated columns, got " + std::to_string(cols.size()));
  check_token(cols[0], "author_id", name, lineno);
  check_token(cols[1], "paper_id", name, lineno);
  check_token(cols[2], "journal_id", name, lineno);
  const auto year = text::parse_int<int>(cols[3]);
  if (!year) fail_at(Errc::malformed_record, name, lineno, "year is not an integer: '" + std::string(cols[3]) + "'");
  return {std::string(cols[0]), std::string(cols[1]), std::string(cols[2]), *year};
}

inline PublicationRecord parse_json_record(std::string_view line, std::string_view name, std::size_t lineno) {
  const auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail_at(Errc::malformed_record, name, lineno, "not a JSON object");
  auto field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      fail_at(Errc::malformed_record, name, lineno, std::string("missing string field ") + key);
    auto v = it->get<std::string>();
    check_token(v, key, name, lineno);
    return v;
  };
  PublicationRecord rec{field("author_id"), field("paper_id"), field("journal_id"), 0};
  auto it = j.find("year");
  if (it == j.end()) fail_at(Errc::malformed_record, name, lineno, "missing field year");
  if (it->is_number_integer()) {
    rec.year = it->get<int>();
  } else if (it->is_string()) {
    const auto y = text::parse_int<int>(it->get<std::string>());
    if (!y) fail_at(Errc::malformed_record, name, lineno, "year is not an integer");
    rec.year = *y;
  } else {
    fail_at(Errc::malformed_record, name, lineno, "year is not an integer");
  }
  return rec;
}

/// Runs `fn(worker_index)` on `workers` threads (inline when there is one).
template <typename Fn>
void run_workers(unsigned workers, Fn&& fn) {
  if (workers <= 1) {
    fn(0U);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        fn(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Parses a block in parallel contiguous slices. The error reported is the
/// one on the earliest line, independent of scheduling.
inline void parse_block(const std::vector<NumberedLine>& block, RecordFormat format, std::string_view name,
                        unsigned workers, std::vector<ParsedRecord>& out) {
  out.resize(block.size());
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(block.size())));
  std::vector<std::optional<Error>> errors(workers);
  const std::size_t per = (block.size() + workers - 1) / workers;
  run_workers(workers, [&](unsigned w) {
    const std::size_t lo = w * per;
    const std::size_t hi = std::min(block.size(), lo + per);
    try {
      for (std::size_t i = lo; i < hi; ++i) {
        const auto& l = block[i];
        out[i].lineno = l.lineno;
        out[i].rec = format == RecordFormat::ndjson ? parse_json_record(l.text, name, l.lineno)
                                                    : parse_tsv_record(l.text, name, l.lineno);
      }
    } catch (const Error& e) {
      errors[w] = e;
    }
  });
  for (auto& e : errors)
    if (e) throw *e;
}

struct PaperSlot {
  int year = 0;
  bool consumed = false;
};

struct AuthorState {
  std::unordered_map<std::string, PaperSlot> papers;
  bool excluded = false;
};

struct Shard {
  std::unordered_map<std::string, AuthorState> authors;
  std::map<std::pair<std::string, Snapshot>, ActivityProfile> profiles;
  IngestStats stats;
};

inline unsigned shard_of(std::string_view author, unsigned shards) {
  return static_cast<unsigned>(text::fnv1a(author) % shards);
}

/// Streams the records once, handing each parsed block to `consume(parsed, worker)`.
template <typename Consume>
void stream_records(const StreamOpener& open, std::string_view name, const IngestOptions& opts, Consume&& consume,
                    std::uint64_t* records_read = nullptr) {
  auto stream = open();
  if (!stream || !*stream) fail(Errc::missing_input, "cannot open " + std::string(name));
  RecordLineReader reader(*stream);
  std::vector<NumberedLine> block;
  std::vector<ParsedRecord> parsed;
  const unsigned workers = std::max(1U, opts.threads);
  while (reader.next_block(block, std::max<std::size_t>(1, opts.block_lines))) {
    parse_block(block, reader.format(), name, workers, parsed);
    if (records_read) *records_read += parsed.size();
    run_workers(workers, [&](unsigned w) { consume(parsed, w, workers); });
  }
}

}  // namespace detail

/// Full ingestion of a record stream. `open` is called twice, once per pass.
inline IngestResult ingest_records(const StreamOpener& open, std::string_view name, const ClassificationTable& table,
                                   const SnapshotGrid& grid, const IngestOptions& opts = {}) {
  grid.validate();
  const unsigned workers = std::max(1U, opts.threads);
  std::vector<detail::Shard> shards(workers);

  auto counts_toward_cut = [&](const PublicationRecord& r) {
    if (!grid.contains(r.year)) return false;
    return opts.cut_order == CutOrder::before_journal_filter || table.has_journal(r.journal_id);
  };

  // Pass 1: first occurrence of each (author, paper) fixes its year.
  detail::stream_records(open, name, opts, [&](const std::vector<detail::ParsedRecord>& parsed, unsigned w,
                                               unsigned n) {
    auto& shard = shards[w];
    for (const auto& p : parsed) {
      if (detail::shard_of(p.rec.author_id, n) != w || !counts_toward_cut(p.rec)) continue;
      shard.authors[p.rec.author_id].papers.try_emplace(p.rec.paper_id, detail::PaperSlot{p.rec.year, false});
    }
  });

  if (opts.max_papers_per_year > 0) {
    for (auto& shard : shards) {
      for (auto& [author, state] : shard.authors) {
        std::unordered_map<int, std::uint32_t> per_year;
        for (const auto& [paper, slot] : state.papers) {
          if (++per_year[slot.year] > opts.max_papers_per_year) {
            state.excluded = true;
            break;
          }
        }
        if (state.excluded) ++shard.stats.authors_excluded;
      }
    }
  }

  // Pass 2: accumulate activity.
  std::uint64_t records_read = 0;
  detail::stream_records(
      open, name, opts,
      [&](const std::vector<detail::ParsedRecord>& parsed, unsigned w, unsigned n) {
        auto& shard = shards[w];
        for (const auto& p : parsed) {
          const auto& r = p.rec;
          if (detail::shard_of(r.author_id, n) != w) continue;
          const auto* topics = table.topics_of(r.journal_id);
          if (topics == nullptr) {
            ++shard.stats.dropped_unclassified;
            continue;
          }
          if (!grid.contains(r.year)) {
            ++shard.stats.dropped_year;
            continue;
          }
          auto& state = shard.authors[r.author_id];
          auto [slot, fresh] = state.papers.try_emplace(r.paper_id, detail::PaperSlot{r.year, false});
          (void)fresh;
          if (slot->second.consumed) {
            ++shard.stats.dropped_duplicate;
            continue;
          }
          slot->second.consumed = true;
          if (state.excluded) {
            ++shard.stats.dropped_excluded;
            continue;
          }
          ++shard.stats.records_kept;
          const Snapshot snap = grid.label_of(r.year);
          auto [it, inserted] = shard.profiles.try_emplace({r.author_id, snap});
          auto& prof = it->second;
          if (inserted) {
            prof.author_id = r.author_id;
            prof.snapshot = snap;
          }
          for (const auto& t : *topics) ++prof.topic_counts[t];
          for (const auto& a : table.areas_of_journal(r.journal_id)) ++prof.area_counts[a];
        }
      },
      &records_read);

  IngestResult result;
  result.stats.records_read = records_read;
  std::size_t total = 0;
  for (const auto& s : shards) total += s.profiles.size();
  result.profiles.reserve(total);
  for (auto& s : shards) {
    result.stats.records_kept += s.stats.records_kept;
    result.stats.dropped_unclassified += s.stats.dropped_unclassified;
    result.stats.dropped_year += s.stats.dropped_year;
    result.stats.dropped_duplicate += s.stats.dropped_duplicate;
    result.stats.dropped_excluded += s.stats.dropped_excluded;
    result.stats.authors_excluded += s.stats.authors_excluded;
    for (auto& [key, prof] : s.profiles) result.profiles.push_back(std::move(prof));
    s = {};
  }
  std::sort(result.profiles.begin(), result.profiles.end(), [](const ActivityProfile& a, const ActivityProfile& b) {
    return std::tie(a.author_id, a.snapshot) < std::tie(b.author_id, b.snapshot);
  });
  return result;
}

inline StreamOpener file_opener(const std::filesystem::path& path) {
  return [path]() -> std::unique_ptr<std::istream> {
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) fail(Errc::missing_input, "cannot open " + path.string());
    return in;
  };
}

inline StreamOpener string_opener(std::string content) {
  auto shared = std::make_shared<const std::string>(std::move(content));
  return [shared]() -> std::unique_ptr<std::istream> { return std::make_unique<std::istringstream>(*shared); };
}

inline IngestResult ingest_records(const std::filesystem::path& records_file, const ClassificationTable& table,
                                   const SnapshotGrid& grid, const IngestOptions& opts = {}) {
  return ingest_records(file_opener(records_file), records_file.string(), table, grid, opts);
}

/// Smallest k such that at least a fraction q of the (author, year) distinct
/// paper counts are <= k. When `table` is given only classified journals count.
inline std::uint32_t compute_yearly_paper_quantile(const StreamOpener& open, std::string_view name, double q,
                                                   const ClassificationTable* table = nullptr) {
  if (!(q > 0.0 && q < 1.0)) fail(Errc::invalid_config, "quantile must lie in (0, 1)");
  std::unordered_map<std::string, std::unordered_map<std::string, int>> first_year;
  IngestOptions opts;
  detail::stream_records(open, name, opts, [&](const std::vector<detail::ParsedRecord>& parsed, unsigned, unsigned) {
    for (const auto& p : parsed) {
      if (table != nullptr && !table->has_journal(p.rec.journal_id)) continue;
      first_year[p.rec.author_id].try_emplace(p.rec.paper_id, p.rec.year);
    }
  });
  std::vector<std::uint32_t> counts;
  for (const auto& [author, papers] : first_year) {
    std::map<int, std::uint32_t> per_year;
    for (const auto& [paper, year] : papers) ++per_year[year];
    for (const auto& [year, c] : per_year) counts.push_back(c);
  }
  if (counts.empty()) fail(Errc::empty_input, "no records to build the yearly paper distribution");
  std::sort(counts.begin(), counts.end());
  const double n = static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i + 1 < counts.size() && counts[i + 1] == counts[i]) continue;
    if (static_cast<double>(i + 1) / n >= q - 1e-12) return counts[i];
  }
  return counts.back();
}

inline std::uint32_t compute_yearly_paper_quantile(const std::filesystem::path& records_file, double q,
                                                   const ClassificationTable* table = nullptr) {
  return compute_yearly_paper_quantile(file_opener(records_file), records_file.string(), q, table);
}

// Profile files: one line per profile, `author<TAB>snapshot<TAB>topic:count ...<TAB>area:count ...`.
// Identifiers carry no whitespace, so entries are space separated and the
// count follows the last colon.

namespace detail {

inline void write_counts(std::ostream& out, const std::map<std::string, std::uint32_t>& counts) {
  bool first = true;
  for (const auto& [id, c] : counts) {
    if (!first) out << ' ';
    first = false;
    out << id << ':' << c;
  }
}

inline std::map<std::string, std::uint32_t> parse_counts(std::string_view field, std::string_view name,
                                                         std::size_t lineno) {
  std::map<std::string, std::uint32_t> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    auto end = field.find(' ', start);
    if (end == std::string_view::npos) end = field.size();
    const auto entry = field.substr(start, end - start);
    const auto colon = entry.rfind(':');
    if (colon == std::string_view::npos || colon == 0)
      fail_at(Errc::malformed_line, name, lineno, "bad count entry '" + std::string(entry) + "'");
    const auto c = text::parse_int<std::uint32_t>(entry.substr(colon + 1));
    if (!c || *c == 0) fail_at(Errc::malformed_line, name, lineno, "bad count in '" + std::string(entry) + "'");
    out[std::string(entry.substr(0, colon))] = *c;
    start = end + 1;
  }
  return out;
}

}  // namespace detail

inline void write_profiles(std::ostream& out, const std::vector<ActivityProfile>& profiles) {
  for (const auto& p : profiles) {
    out << p.author_id << '\t' << p.snapshot << '\t';
    detail::write_counts(out, p.topic_counts);
    out << '\t';
    detail::write_counts(out, p.area_counts);
    out << '\n';
  }
}

inline std::vector<ActivityProfile> read_profiles(std::istream& in, std::string_view name = "profiles") {
  std::vector<ActivityProfile> out;
  std::string line;
  std::vector<std::string_view> cols;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::strip_cr(line);
    if (text::is_skippable(view)) continue;
    text::split_tabs(view, cols);
    if (cols.size() != 4) fail_at(Errc::malformed_line, name, lineno, "expected 4 columns");
    const auto snap = text::parse_int<int>(cols[1]);
    if (!snap) fail_at(Errc::malformed_line, name, lineno, "snapshot is not an integer");
    ActivityProfile p;
    p.author_id = std::string(cols[0]);
    p.snapshot = *snap;
    p.topic_counts = detail::parse_counts(cols[2], name, lineno);
    p.area_counts = detail::parse_counts(cols[3], name, lineno);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace diaspora

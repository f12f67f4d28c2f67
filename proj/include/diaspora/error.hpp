#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diaspora {

enum class Errc {
  malformed_line,
  unknown_topic,
  conflicting_area,
  empty_table,
  unknown_journal,
  malformed_record,
  empty_input,
  empty_set,
  unknown_area,
  level_mismatch,
  no_baseline,
  empty_series,
  empty_network,
  same_area,
  different_area,
  io_error,
  missing_input,
  invalid_spec,
  invalid_config,
  internal,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_line: return "MalformedLine";
    case Errc::unknown_topic: return "UnknownTopic";
    case Errc::conflicting_area: return "ConflictingArea";
    case Errc::empty_table: return "EmptyTable";
    case Errc::unknown_journal: return "UnknownJournal";
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::empty_input: return "EmptyInput";
    case Errc::empty_set: return "EmptySet";
    case Errc::unknown_area: return "UnknownArea";
    case Errc::level_mismatch: return "LevelMismatch";
    case Errc::no_baseline: return "NoBaseline";
    case Errc::empty_series: return "EmptySeries";
    case Errc::empty_network: return "EmptyNetwork";
    case Errc::same_area: return "SameArea";
    case Errc::different_area: return "DifferentArea";
    case Errc::io_error: return "IoError";
    case Errc::missing_input: return "MissingInput";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception. The message is a
/// single line, prefixed with `file:line:` when the failure maps to input.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + what);
}

[[noreturn]] inline void fail_at(Errc code, std::string_view file, std::size_t line,
                                 const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + std::string(file) + ":" +
                        std::to_string(line) + ": " + what);
}

}  // namespace diaspora

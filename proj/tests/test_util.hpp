#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "diaspora/classification.hpp"

namespace testutil {

inline diaspora::ClassificationTable table_from(const std::string& journal_topics, const std::string& topic_areas) {
  std::istringstream jt(journal_topics), ta(topic_areas);
  return diaspora::load_classification(jt, ta);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("diaspora_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = -1;
  std::string err;
};

#ifdef DIASPORA_CLI
/// Runs the CLI through the shell; stdout is discarded and stderr captured.
inline CliRun run_cli(const std::string& args) {
  const auto err = std::filesystem::temp_directory_path() / "diaspora_cli_stderr.txt";
  const std::string cmd = std::string("\"") + DIASPORA_CLI + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}
#endif

}  // namespace testutil

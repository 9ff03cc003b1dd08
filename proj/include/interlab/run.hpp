#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace interlab {

/// One configurable key, "section.key", with its default as text. Keys that
/// do not change results (output location, thread count) are left out of
/// the config hash.
struct ConfigKey {
  std::string name;
  std::string fallback;
  std::string help;
  bool hashed = true;
};

/// Flat key=value configuration with [section] headers. Every known key
/// always has a value, so the manifest lists the defaults that ran too.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<ConfigKey>& schema();
  /// key = value lines under [section] headers; `#` starts a comment.
  static RunConfig parse(std::string_view text);
  /// Inverse of to_json()["config"].
  static RunConfig from_json(const nlohmann::json& config);

  /// Unknown keys are usage errors.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool user_set(const std::string& key) const { return explicit_.count(key) > 0; }

  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t seed() const;

  /// Sorted key=value lines of the hashed keys.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
  nlohmann::ordered_json to_json() const;
  /// Config file text that parse() reads back to the same values.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

struct RunResult {
  std::filesystem::path directory;
  std::vector<std::string> artifacts;
  /// Verdict of compare-equivalence, empty otherwise.
  std::string verdict;
  int exit_code = 0;
};

/// $INTERLAB_OUT when set, otherwise ./interlab-out.
std::filesystem::path default_output_root();

/// Runs config "run.cmd" and writes <output>/<cmd>-<hash>/ with
/// manifest.json and the artifacts. Requires run.seed.
RunResult run(const RunConfig& config);

struct SuiteCase {
  std::string name;
  RunConfig config;
  std::string expected;
};

/// Z^3 (consistent), binary tree and two-sheet graph (inconsistent), with
/// pinned seeds.
std::vector<SuiteCase> suite_paper_cases();

/// Runs the three cases under <output>/suite-paper and writes suite.json.
/// exit_code is nonzero when a verdict differs from the expected one.
RunResult suite_paper(const std::filesystem::path& output, std::size_t jobs = 1);

}  // namespace interlab

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "interlab/error.hpp"
#include "interlab/run.hpp"

using namespace interlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("interlab-test-run-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const auto& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("config text parses sections and comments") {
  auto c = RunConfig::parse(
      "# leading comment\n"
      "[run]\n"
      "seed = 42   # trailing\n"
      "cmd=graph\n"
      "\n"
      "[graph]\n"
      "radius = 5\n"
      "[K]\n"
      "vertices = a b\n");
  CHECK(c.seed() == 42);
  CHECK(c.get("run.cmd") == "graph");
  CHECK(c.integer("graph.radius") == 5);
  CHECK(c.user_set("graph.radius"));
  CHECK_FALSE(c.user_set("graph.dim"));
  CHECK(c.get("graph.dim") == "3");
  CHECK(c.get("K.vertices") == "a b");

  CHECK(code_of([] { RunConfig::parse("[graph]\nnope = 1\n"); }) == ErrorCode::usage);
  CHECK(code_of([] { RunConfig::parse("[run]\nseed\n"); }) == ErrorCode::usage);
  CHECK(code_of([] { RunConfig::parse("[run\n"); }) == ErrorCode::usage);
}

TEST_CASE("config round trips through text and JSON") {
  RunConfig c;
  c.set("run.seed", "7");
  c.set("graph.family", "regular_tree");
  c.set("K.vertices", "r r.0");
  auto text = RunConfig::parse(c.to_text());
  CHECK(text.canonical() == c.canonical());
  auto j = RunConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(j.hash() == c.hash());
  CHECK(j.to_json() == c.to_json());
}

TEST_CASE("config hash ignores output and jobs only") {
  RunConfig a;
  a.set("run.seed", "1");
  RunConfig b = a;
  b.set("run.output", "/somewhere/else");
  b.set("run.jobs", "4");
  CHECK(a.hash() == b.hash());
  b.set("run.seed", "2");
  CHECK(a.hash() != b.hash());
  RunConfig c = a;
  c.set("graph.radius", "9");
  CHECK(a.hash() != c.hash());
  CHECK(a.hash_hex().size() == 16);
}

TEST_CASE("typed accessors reject malformed values") {
  RunConfig c;
  c.set("graph.radius", "4x");
  CHECK(code_of([&] { c.integer("graph.radius"); }) == ErrorCode::usage);
  c.set("rates.base", "fast");
  CHECK(code_of([&] { c.real("rates.base"); }) == ErrorCode::usage);
  CHECK(c.real("sampler.duration") == std::numeric_limits<double>::infinity());
  CHECK(code_of([&] { c.seed(); }) == ErrorCode::usage);
  c.set("run.seed", "-3");
  CHECK(code_of([&] { c.seed(); }) == ErrorCode::usage);
}

TEST_CASE("run requires a seed and a known command") {
  RunConfig c;
  c.set("run.cmd", "graph");
  c.set("run.output", scratch("noseed").string());
  CHECK(code_of([&] { run(c); }) == ErrorCode::usage);
  c.set("run.seed", "1");
  c.set("run.cmd", "dance");
  CHECK(code_of([&] { run(c); }) == ErrorCode::usage);
  c.set("run.cmd", "graph");
  c.set("graph.family", "moebius");
  CHECK_THROWS_AS(run(c), Error);
}

TEST_CASE("same config and seed give byte-identical artifacts") {
  RunConfig c;
  c.set("run.cmd", "sample-ri");
  c.set("run.seed", "99");
  c.set("graph.radius", "4");
  c.set("sampler.u_max", "3");
  c.set("sampler.replicas", "3");
  auto out1 = scratch("det1"), out2 = scratch("det2");
  c.set("run.output", out1.string());
  auto r1 = run(c);
  c.set("run.output", out2.string());
  c.set("run.jobs", "2");
  auto r2 = run(c);
  REQUIRE(r1.artifacts == r2.artifacts);
  for (const auto& a : r1.artifacts) {
    auto bytes = slurp(r1.directory / a);
    CHECK(bytes == slurp(r2.directory / a));
    CHECK(bytes.rfind("# config_hash=" + c.hash_hex() + "\n", 0) == 0);
  }
  auto manifest = nlohmann::json::parse(slurp(r1.directory / "manifest.json"));
  CHECK(manifest["config_hash"] == c.hash_hex());
  CHECK(manifest["seed"] == 99);
  CHECK(manifest["config"]["graph.radius"] == "4");
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest["versions"].contains("eigen"));

  c.set("run.seed", "100");
  c.set("run.output", out1.string());
  auto r3 = run(c);
  CHECK(r3.directory != r1.directory);
  CHECK(slurp(r3.directory / "trajectory.csv") != slurp(r1.directory / "trajectory.csv"));
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("re-running a manifest config regenerates the artifacts") {
  RunConfig c;
  c.set("run.cmd", "forest-wilson");
  c.set("run.seed", "5");
  c.set("graph.radius", "3");
  c.set("forest.samples", "50");
  c.set("run.output", scratch("manifest").string());
  auto r = run(c);
  auto before = slurp(r.directory / "wilson.csv");
  auto manifest = nlohmann::json::parse(slurp(r.directory / "manifest.json"));
  auto again = RunConfig::from_json(manifest["config"]);
  CHECK(again.hash() == c.hash());
  auto r2 = run(again);
  CHECK(r2.directory == r.directory);
  CHECK(slurp(r2.directory / "wilson.csv") == before);
  fs::remove_all(c.get("run.output"));
}

TEST_CASE("every pipeline writes its artifacts") {
  auto out = scratch("pipelines");
  std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"graph", {"edges.csv", "levels.csv"}},
      {"potential-equilibrium", {"equilibrium.csv", "summary.json"}},
      {"potential-entry-free", {"entry_free.csv", "summary.json"}},
      {"sample-ri", {"trajectory.csv", "counts.csv"}},
      {"sample-reflected", {"trajectory.csv"}},
      {"forest-marginals", {"marginals.csv"}},
      {"forest-wilson", {"wilson.csv"}},
      {"compare-equivalence", {"verdict.json", "gaps.csv"}},
  };
  for (const auto& [cmd, files] : expected) {
    CAPTURE(cmd);
    RunConfig c;
    c.set("run.cmd", cmd);
    c.set("run.seed", "3");
    c.set("run.output", out.string());
    c.set("graph.radius", "6");
    c.set("K.vertices", "0,0,0 1,0,0");
    c.set("forest.samples", "20");
    c.set("compare.first_level", "2");
    c.set("compare.entry_samples", "500");
    c.set("compare.bootstrap", "20");
    auto r = run(c);
    CHECK(r.artifacts == files);
    CHECK(fs::exists(r.directory / "manifest.json"));
    if (cmd == "compare-equivalence") {
      CHECK_FALSE(r.verdict.empty());
      auto v = nlohmann::json::parse(slurp(r.directory / "verdict.json"));
      CHECK(v["config_hash"] == c.hash_hex());
      CHECK(v["verdict"] == r.verdict);
    }
  }
  fs::remove_all(out);
}

TEST_CASE("K outside the window is a module error") {
  RunConfig c;
  c.set("run.cmd", "potential-equilibrium");
  c.set("run.seed", "1");
  c.set("graph.radius", "3");
  c.set("K.vertices", "9,9,9");
  c.set("run.output", scratch("badk").string());
  CHECK_THROWS_AS(run(c), Error);
  c.set("K.vertices", "");
  c.set("potential.levels", "7:9");
  CHECK(code_of([&] { run(c); }) == ErrorCode::usage);
}

TEST_CASE("suite cases are pinned") {
  auto cases = suite_paper_cases();
  REQUIRE(cases.size() == 3);
  CHECK(cases[0].expected == "consistent");
  CHECK(cases[1].expected == "inconsistent");
  CHECK(cases[2].expected == "inconsistent");
  for (const auto& c : cases) {
    CHECK_NOTHROW(c.config.seed());
    CHECK(c.config.get("run.cmd") == "compare-equivalence");
  }
  CHECK(suite_paper_cases()[1].config.hash() == cases[1].config.hash());
}

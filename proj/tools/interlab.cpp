#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "interlab/error.hpp"
#include "interlab/run.hpp"

namespace {

using interlab::ErrorCode;
using interlab::RunConfig;

struct Flag {
  const char* name;
  const char* key;
};

// flags shared by every pipeline
const std::vector<Flag> kCommon{
    {"--seed", "run.seed"},
    {"--output", "run.output"},
    {"--jobs", "run.jobs"},
    {"--family", "graph.family"},
    {"--dim", "graph.dim"},
    {"--radius", "graph.radius"},
    {"--branching", "graph.branching"},
    {"--fiber", "graph.fiber"},
    {"--fiber-conductance", "graph.fiber_conductance"},
    {"--ladder-ratio", "graph.ladder_ratio"},
    {"--graph", "graph.file"},
    {"--exhaustion", "graph.exhaustion"},
    {"--K-level", "K.level"},
    {"--rate-base", "rates.base"},
    {"--rate-growth", "rates.growth"},
    {"--tol", "solver.tol"},
    {"--max-iterations", "solver.max_iterations"},
    {"--max-steps", "budget.max_steps"},
};

struct Cli {
  std::map<std::string, std::string> values;
  std::vector<std::string> K;
  std::vector<std::string> sets;
  std::string config_file;
  std::string manifest_file;
  std::string expect;

  void bind(CLI::App* app, const std::vector<Flag>& flags) {
    for (const auto& f : flags) {
      std::string help;
      for (const auto& k : RunConfig::schema()) {
        if (k.name == f.key) help = k.help.empty() ? k.name : k.help + " [" + k.name + "]";
      }
      app->add_option(f.name, values[f.key], help);
    }
  }

  void common(CLI::App* app) {
    bind(app, kCommon);
    app->add_option("--K", K, "vertex names of K, separated by spaces or ';'");
    app->add_option("--config", config_file, "key = value config file");
    app->add_option("--expect", expect, "exit with 3 when the verdict differs");
    app->add_option("--set", sets, "override any config key, section.key=value");
  }

  RunConfig build(const std::string& cmd) const {
    RunConfig c;
    if (!manifest_file.empty()) {
      std::ifstream in(manifest_file);
      interlab::require(static_cast<bool>(in), ErrorCode::io, "cannot read " + manifest_file);
      nlohmann::json m;
      try {
        in >> m;
      } catch (const nlohmann::json::exception& e) {
        interlab::fail(ErrorCode::parse, manifest_file + ": " + e.what());
      }
      interlab::require(m.contains("config"), ErrorCode::parse, manifest_file + " has no config");
      c = RunConfig::from_json(m["config"]);
    } else if (!config_file.empty()) {
      std::ifstream in(config_file);
      interlab::require(static_cast<bool>(in), ErrorCode::io, "cannot read " + config_file);
      std::ostringstream text;
      text << in.rdbuf();
      c = RunConfig::parse(text.str());
    }
    if (!cmd.empty()) c.set("run.cmd", cmd);
    for (const auto& [key, value] : values) {
      if (!value.empty()) c.set(key, value);
    }
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      interlab::require(eq != std::string::npos, ErrorCode::usage,
                        "--set expects section.key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!K.empty()) {
      std::string joined;
      for (auto name : K) {
        for (char& ch : name) {
          if (ch == ';') ch = ' ';
        }
        joined += (joined.empty() ? "" : " ") + name;
      }
      c.set("K.vertices", joined);
    }
    return c;
  }
};

int report_error(const std::string& code, const std::string& message, int status) {
  nlohmann::ordered_json j{{"error", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interlab: random interlacements and reflected walks on exhaustions"};
  app.require_subcommand(1);
  Cli cli;
  std::string cmd;
  std::string suite_output;
  std::size_t suite_jobs = 1;

  auto* graph = app.add_subcommand("graph", "write the edge list and the level table");
  cli.common(graph);
  graph->callback([&] { cmd = "graph"; });

  auto* potential = app.add_subcommand("potential", "equilibrium measures and entry laws");
  potential->require_subcommand(1);
  auto* equilibrium = potential->add_subcommand("equilibrium", "e_K, capacity and resistances per level");
  auto* entry = potential->add_subcommand("entry-free", "free entry law seen from a probe");
  for (auto* s : {equilibrium, entry}) {
    cli.common(s);
    cli.bind(s, {{"--levels", "potential.levels"}});
  }
  cli.bind(entry, {{"--probe", "potential.probe"}});
  equilibrium->callback([&] { cmd = "potential-equilibrium"; });
  entry->callback([&] { cmd = "potential-entry-free"; });

  auto* sample = app.add_subcommand("sample", "interlacement and reflected-walk samples");
  sample->require_subcommand(1);
  auto* ri = sample->add_subcommand("ri", "random interlacement excursions hitting K");
  cli.common(ri);
  cli.bind(ri, {{"--umax", "sampler.u_max"},
                {"--replicas", "sampler.replicas"},
                {"--backward", "sampler.backward"}});
  ri->callback([&] { cmd = "sample-ri"; });
  auto* reflected = sample->add_subcommand("reflected", "truncated reflected walk on VG_n");
  cli.common(reflected);
  cli.bind(reflected, {{"--level", "sampler.level"},
                       {"--mode", "sampler.mode"},
                       {"--excursions", "sampler.excursions"},
                       {"--duration", "sampler.duration"},
                       {"--replicas", "sampler.replicas"}});
  reflected->callback([&] { cmd = "sample-reflected"; });

  auto* forest = app.add_subcommand("forest", "spanning forest marginals");
  forest->require_subcommand(1);
  auto* marginals = forest->add_subcommand("marginals", "exact panel marginals");
  auto* wilson = forest->add_subcommand("wilson", "Wilson sample frequencies on the panel");
  for (auto* s : {marginals, wilson}) {
    cli.common(s);
    cli.bind(s, {{"--kind", "forest.kind"},
                 {"--level", "forest.level"},
                 {"--panel", "forest.panel_file"},
                 {"--panel-size", "forest.panel"}});
  }
  cli.bind(wilson, {{"--samples", "forest.samples"}});
  marginals->callback([&] { cmd = "forest-marginals"; });
  wilson->callback([&] { cmd = "forest-wilson"; });

  auto* compare = app.add_subcommand("compare", "free versus wired comparison");
  compare->require_subcommand(1);
  auto* equivalence = compare->add_subcommand("equivalence", "verdict document over levels");
  cli.common(equivalence);
  cli.bind(equivalence, {{"--first-level", "compare.first_level"},
                         {"--max-level", "compare.last_level"},
                         {"--panel-size", "compare.panel"},
                         {"--entry-level", "compare.entry_level"},
                         {"--entry-samples", "compare.entry_samples"},
                         {"--bootstrap", "compare.bootstrap"}});
  equivalence->callback([&] { cmd = "compare-equivalence"; });

  auto* suite = app.add_subcommand("suite-paper", "Z^3, binary tree and two-sheet verdicts");
  suite->add_option("--output", suite_output, "output root");
  suite->add_option("--jobs", suite_jobs, "worker threads")->check(CLI::PositiveNumber);
  suite->callback([&] { cmd = "suite-paper"; });

  auto* run = app.add_subcommand("run", "run any pipeline from a config file, manifest or flags");
  cli.common(run);
  std::string run_cmd;
  run->add_option("--cmd", run_cmd, "pipeline name [run.cmd]");
  run->add_option("--manifest", cli.manifest_file, "re-run the config recorded in a manifest");
  run->callback([&] { cmd = "run"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    if (cmd == "suite-paper") {
      auto root = suite_output.empty() ? interlab::default_output_root()
                                       : std::filesystem::path(suite_output);
      auto r = interlab::suite_paper(root, suite_jobs);
      nlohmann::ordered_json out{{"directory", r.directory.string()}, {"result", r.verdict}};
      std::cout << out.dump() << "\n";
      return r.exit_code;
    }
    auto config = cli.build(cmd == "run" ? run_cmd : cmd);
    auto r = interlab::run(config);
    nlohmann::ordered_json out{{"directory", r.directory.string()},
                               {"config_hash", config.hash_hex()},
                               {"artifacts", r.artifacts}};
    if (!r.verdict.empty()) out["verdict"] = r.verdict;
    std::cout << out.dump() << "\n";
    if (!cli.expect.empty() && r.verdict != cli.expect) return 3;
    return r.exit_code;
  } catch (const interlab::Error& e) {
    return report_error(std::string(interlab::to_string(e.code())), e.what(),
                        e.code() == ErrorCode::usage ? 2 : 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
}

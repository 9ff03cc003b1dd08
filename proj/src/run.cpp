#include "interlab/run.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "interlab/compare.hpp"
#include "interlab/error.hpp"
#include "interlab/forests.hpp"
#include "interlab/graph.hpp"
#include "interlab/hash.hpp"
#include "interlab/parallel.hpp"
#include "interlab/potential.hpp"
#include "interlab/samplers.hpp"

namespace interlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<ConfigKey>& RunConfig::schema() {
  static const std::vector<ConfigKey> keys{
      {"run.cmd", "compare-equivalence",
       "graph | potential-equilibrium | potential-entry-free | sample-ri | sample-reflected | forest-marginals | forest-wilson | "
       "compare-equivalence"},
      {"run.seed", "", "mandatory RNG seed"},
      {"run.output", "", "output root; empty uses $INTERLAB_OUT or ./interlab-out", false},
      {"run.jobs", "1", "worker threads", false},
      {"graph.family", "zd_box", "zd_box | regular_tree | product | ladder | two_sheet"},
      {"graph.dim", "3", "lattice dimension"},
      {"graph.radius", "8", "window radius (tree depth)"},
      {"graph.branching", "2", "tree branching"},
      {"graph.fiber", "2", "product fiber size"},
      {"graph.fiber_conductance", "1", "product fiber conductance"},
      {"graph.ladder_ratio", "0.5", "ladder rung ratio"},
      {"graph.file", "", "edge list; overrides the family"},
      {"graph.exhaustion", "", "exhaustion file, required with graph.file"},
      {"K.vertices", "", "whitespace-separated vertex names"},
      {"K.level", "-1", "use K = VG_level when >= 0 and no names are given"},
      {"sampler.u_max", "1", "interlacement intensity"},
      {"sampler.replicas", "1", "independent samples"},
      {"sampler.backward", "h-transform", "h-transform | rejection"},
      {"sampler.level", "2", "reflection level n"},
      {"sampler.mode", "free-trace", "wired | free-trace"},
      {"sampler.excursions", "100", "excursions per reflected trace"},
      {"sampler.duration", "inf", "time horizon of a reflected trace"},
      {"rates.base", "1", "holding rate at the center"},
      {"rates.growth", "2", "rate growth per shell"},
      {"potential.levels", "", "level range a:b; empty is every level containing K"},
      {"potential.probe", "auto-rim", "probe vertex name, or auto-rim for a shell-n probe"},
      {"forest.kind", "wired", "free | wired"},
      {"forest.level", "-1", "-1 is window - 1"},
      {"forest.panel", "20", "central panel size"},
      {"forest.panel_file", "", "CSV of u,v vertex names replacing the central panel"},
      {"forest.samples", "1000", "Wilson samples"},
      {"compare.first_level", "4", ""},
      {"compare.last_level", "-1", "-1 is min(12, window - 1)"},
      {"compare.panel", "20", ""},
      {"compare.entry_level", "1", ""},
      {"compare.entry_samples", "20000", ""},
      {"compare.bootstrap", "200", ""},
      {"compare.tv", "0.05", ""},
      {"compare.resistance", "0.001", ""},
      {"compare.forest", "0.02", ""},
      {"compare.entry_tv", "0.05", ""},
      {"compare.shrink", "0.5", ""},
      {"compare.plateau", "0.2", ""},
      {"solver.tol", "1e-10", "relative CG residual"},
      {"solver.max_iterations", "0", "0 picks 2 * unknowns + 100"},
      {"budget.max_steps", "50000000", "walk step budget"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : schema()) values_[k.name] = k.fallback;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_hashed(const std::string& key) {
  for (const auto& k : RunConfig::schema()) {
    if (k.name == key) return k.hashed;
  }
  return false;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto hash = line.find('#');
    std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      require(body.back() == ']', ErrorCode::usage,
              "line " + std::to_string(number) + ": unterminated section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    auto eq = body.find('=');
    require(eq != std::string::npos, ErrorCode::usage,
            "line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    try {
      c.set(key, value);
    } catch (const Error& e) {
      fail(ErrorCode::usage, "line " + std::to_string(number) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& config) {
  RunConfig c;
  require(config.is_object(), ErrorCode::usage, "config must be a JSON object");
  for (const auto& [key, value] : config.items()) {
    require(value.is_string(), ErrorCode::usage, "config value of " + key + " must be a string");
    c.set(key, value.get<std::string>());
  }
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  require(values_.count(key) > 0, ErrorCode::usage, "unknown config key '" + key + "'");
  values_[key] = value;
  explicit_.insert(key);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::usage, "unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string& s = get(key);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size() && !std::isnan(v), ErrorCode::usage,
          key + " must be a number, got '" + s + "'");
  return v;
}

long RunConfig::integer(const std::string& key) const {
  const std::string& s = get(key);
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size(), ErrorCode::usage,
          key + " must be an integer, got '" + s + "'");
  return v;
}

std::uint64_t RunConfig::seed() const {
  const std::string& s = get("run.seed");
  require(!s.empty(), ErrorCode::usage, "a seed is mandatory (--seed)");
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size(), ErrorCode::usage,
          "seed must be a nonnegative integer, got '" + s + "'");
  return v;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (is_hashed(k)) out += k + "=" + v + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const {
  Fnv1a h;
  h.text(canonical());
  return h.value();
}

std::string RunConfig::hash_hex() const { return hex64(hash()); }

nlohmann::ordered_json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

std::string RunConfig::to_text() const {
  std::string out, section;
  for (const auto& [k, v] : values_) {
    auto dot = k.find('.');
    std::string s = k.substr(0, dot);
    if (s != section) {
      out += (out.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += k.substr(dot + 1) + " = " + v + "\n";
  }
  return out;
}

fs::path default_output_root() {
  if (const char* env = std::getenv("INTERLAB_OUT"); env != nullptr && *env != '\0') return env;
  return "interlab-out";
}

namespace {

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

struct Context {
  const RunConfig& config;
  Window window;
  SolverOptions solver;
  std::size_t jobs = 1;
  fs::path dir;
  std::vector<std::string> artifacts;
  std::string verdict;

  void write(const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + (dir / name).string());
    out << body;
    require(static_cast<bool>(out), ErrorCode::io, "write failed for " + (dir / name).string());
    artifacts.push_back(name);
  }

  void csv(const std::string& name, const std::string& header, const std::string& rows) {
    write(name, "# config_hash=" + config.hash_hex() + "\n" + header + "\n" + rows);
  }

  void json_file(const std::string& name, json body) {
    json doc;
    doc["config_hash"] = config.hash_hex();
    for (auto& [k, v] : body.items()) doc[k] = v;
    write(name, doc.dump(2) + "\n");
  }

  std::string name(Vertex x) const { return quoted(window.graph.name(x)); }
  int window_level() const { return window.exhaustion.window(); }

  int level_or(const std::string& key, int fallback) const {
    long n = config.integer(key);
    return n < 0 ? fallback : static_cast<int>(n);
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Window load_window(const RunConfig& c) {
  if (!c.get("graph.file").empty()) {
    require(!c.get("graph.exhaustion").empty(), ErrorCode::usage,
            "graph.file needs graph.exhaustion");
    Window w;
    w.graph = read_graph(read_file(c.get("graph.file")));
    w.exhaustion = read_exhaustion(read_file(c.get("graph.exhaustion")), w.graph);
    return w;
  }
  FamilyParams p;
  p.family = parse_family(c.get("graph.family"));
  p.dim = static_cast<int>(c.integer("graph.dim"));
  p.radius = static_cast<int>(c.integer("graph.radius"));
  p.branching = static_cast<int>(c.integer("graph.branching"));
  p.fiber = static_cast<int>(c.integer("graph.fiber"));
  p.fiber_conductance = c.real("graph.fiber_conductance");
  p.ladder_ratio = c.real("graph.ladder_ratio");
  return build_family(p);
}

std::vector<Vertex> resolve_K(const Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  std::istringstream in(ctx.config.get("K.vertices"));
  std::vector<std::string> names;
  for (std::string s; in >> s;) names.push_back(s);
  if (!names.empty()) return resolve_vertices(g, names);
  long level = ctx.config.integer("K.level");
  if (level >= 0) {
    require(level < ex.window(), ErrorCode::usage, "K.level must lie inside the window");
    auto l = ex.level(static_cast<int>(level));
    return {l.begin(), l.end()};
  }
  // the center and up to three of its neighbors, by name
  std::vector<Vertex> nbrs(g.neighbors(ex.center()).begin(), g.neighbors(ex.center()).end());
  std::sort(nbrs.begin(), nbrs.end(),
            [&](Vertex a, Vertex b) { return g.name(a) < g.name(b); });
  std::vector<Vertex> K{ex.center()};
  for (std::size_t i = 0; i < std::min<std::size_t>(3, nbrs.size()); ++i) K.push_back(nbrs[i]);
  return K;
}

std::vector<VertexPair> resolve_panel(const Context& ctx, int level, const std::string& key) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  std::vector<VertexPair> panel;
  const std::string& file = ctx.config.get("forest.panel_file");
  if (!file.empty()) {
    std::istringstream in(read_file(file));
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      std::vector<std::string> fields;
      std::string cur;
      bool quote = false;
      for (char ch : line) {
        if (ch == '"') {
          quote = !quote;
        } else if (ch == ',' && !quote) {
          fields.push_back(trim(cur));
          cur.clear();
        } else {
          cur += ch;
        }
      }
      fields.push_back(trim(cur));
      require(fields.size() >= 2, ErrorCode::parse,
              file + " line " + std::to_string(number) + ": expected u,v");
      if (fields[0] == "u" && fields[1] == "v") continue;
      panel.emplace_back(g.vertex(fields[0]), g.vertex(fields[1]));
    }
    return panel;
  }
  for (auto e : central_panel(g, ex, static_cast<std::size_t>(ctx.config.integer(key)))) {
    if (ex.contains(level, e.first) && ex.contains(level, e.second)) panel.push_back(e);
  }
  return panel;
}

RateSchedule rates_of(const Context& ctx) {
  return default_rate(ctx.window.exhaustion, ctx.config.real("rates.base"),
                      ctx.config.real("rates.growth"));
}

void cmd_graph(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  std::string edges;
  for (const auto& e : g.edges()) edges += ctx.name(e.u) + "," + ctx.name(e.v) + "," + num(e.c) + "\n";
  ctx.csv("edges.csv", "u,v,c", edges);
  std::string levels;
  for (int n = 0; n <= ex.window(); ++n) {
    levels += std::to_string(n) + "," + std::to_string(ex.level(n).size()) + "," +
              std::to_string(ex.boundary(g, n).size()) + "," +
              (n < ex.window() ? num(cut_conductance(g, ex, n)) : std::string("0")) + "\n";
  }
  ctx.csv("levels.csv", "level,vertices,boundary,cut_conductance", levels);
}

std::vector<int> potential_levels(const Context& ctx, std::span<const Vertex> K) {
  const auto& ex = ctx.window.exhaustion;
  int inner = 1;
  for (Vertex k : K) inner = std::max(inner, ex.shell(k));
  int lo = inner, hi = ex.window() - 1;
  const std::string& range = ctx.config.get("potential.levels");
  if (!range.empty()) {
    auto colon = range.find(':');
    auto parse = [&](const std::string& s) {
      int v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      require(ec == std::errc() && p == s.data() + s.size(), ErrorCode::usage,
              "potential.levels must look like 4:12, got '" + range + "'");
      return v;
    };
    lo = parse(trim(range.substr(0, colon)));
    hi = colon == std::string::npos ? lo : parse(trim(range.substr(colon + 1)));
    require(inner <= lo && lo <= hi && hi < ex.window(), ErrorCode::usage,
            "potential.levels must lie in " + std::to_string(inner) + ":" +
                std::to_string(ex.window() - 1));
  }
  std::vector<int> levels;
  for (int n = lo; n <= hi; ++n) levels.push_back(n);
  return levels;
}

void cmd_potential_equilibrium(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  auto K = resolve_K(ctx);
  auto levels = potential_levels(ctx, K);
  std::vector<std::string> rows(levels.size());
  std::vector<json> summary(levels.size());
  std::vector<double> capacity(levels.size());
  parallel_for(levels.size(), ctx.jobs, [&](std::size_t i) {
    int n = levels[i];
    auto q = wire(g, ex, n);
    std::vector<Vertex> kq;
    for (Vertex k : K) kq.push_back(q.from_base[k]);
    auto eq = equilibrium_measure(q, kq, ctx.solver);
    capacity[i] = eq.capacity;
    for (std::size_t j = 0; j < K.size(); ++j) {
      rows[i] += std::to_string(n) + "," + ctx.name(K[j]) + "," + num(eq.measure.at(kq[j])) + "," +
                 num(eq.normalized.at(kq[j])) + "\n";
    }
    json s{{"level", n},
           {"capacity", eq.capacity},
           {"iterations", eq.voltage.iterations},
           {"max_residual", eq.voltage.max_residual}};
    if (K.size() >= 2) {
      auto fw = free_window(g, ex, n);
      double rf = effective_resistance(fw.graph, fw.from_base[K[0]], fw.from_base[K[1]], ctx.solver);
      double rw = effective_resistance(q.graph, kq[0], kq[1], ctx.solver);
      s["resistance_free"] = rf;
      s["resistance_wired"] = rw;
      s["relative_gap"] = (rf - rw) / rf;
    }
    summary[i] = std::move(s);
  });
  std::string body;
  for (const auto& r : rows) body += r;
  ctx.csv("equilibrium.csv", "level,y,mass,normalized", body);
  auto limit = extrapolate_limit(capacity);
  ctx.json_file("summary.json", json{{"K", K.size()},
                                     {"levels", summary},
                                     {"capacity_limit", limit.value},
                                     {"capacity_extrapolated", limit.extrapolated}});
}

void cmd_potential_entry_free(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  auto K = resolve_K(ctx);
  auto levels = potential_levels(ctx, K);
  const std::string& probe_spec = ctx.config.get("potential.probe");
  std::optional<Vertex> fixed;
  if (probe_spec != "auto-rim") fixed = g.vertex(probe_spec);
  std::vector<std::string> rows(levels.size());
  std::vector<json> summary(levels.size());
  parallel_for(levels.size(), ctx.jobs, [&](std::size_t i) {
    int n = levels[i];
    Vertex probe = 0;
    if (fixed) {
      require(ex.contains(n, *fixed), ErrorCode::invalid_argument,
              "probe " + probe_spec + " lies outside level " + std::to_string(n));
      probe = *fixed;
    } else {
      // rim probe of VG_n: the shell-n vertex with the smallest name
      auto shell = ex.shell_members(n);
      probe = *std::min_element(shell.begin(), shell.end(),
                                [&](Vertex a, Vertex b) { return g.name(a) < g.name(b); });
    }
    auto free = entry_measure_free(g, ex, n, K, probe, ctx.solver);
    auto q = wire(g, ex, n);
    std::vector<Vertex> kq;
    for (Vertex k : K) kq.push_back(q.from_base[k]);
    auto eq = equilibrium_measure(q, kq, ctx.solver);
    Measure wired;
    for (std::size_t j = 0; j < K.size(); ++j) {
      wired.support.push_back(K[j]);
      wired.mass.push_back(eq.normalized.at(kq[j]));
    }
    for (Vertex k : K) {
      rows[i] += std::to_string(n) + "," + ctx.name(probe) + "," + ctx.name(k) + "," +
                 num(free.measure.at(k)) + "\n";
    }
    summary[i] = json{{"level", n},
                      {"probe", g.name(probe)},
                      {"degenerate", free.degenerate},
                      {"tv_to_normalized_equilibrium", tv_distance(free.measure, wired)}};
  });
  std::string body;
  for (const auto& r : rows) body += r;
  ctx.csv("entry_free.csv", "level,probe,y,mass", body);
  ctx.json_file("summary.json", json{{"K", K.size()}, {"levels", summary}});
}

void cmd_sample_ri(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  auto K = resolve_K(ctx);
  InterlacementSampler sampler(g, ex, K, ctx.solver);
  auto rates = rates_of(ctx);
  InterlacementOptions opts;
  const std::string& backward = ctx.config.get("sampler.backward");
  require(backward == "h-transform" || backward == "rejection", ErrorCode::usage,
          "sampler.backward must be h-transform or rejection");
  opts.rejection_backward = backward == "rejection";
  opts.max_steps = static_cast<std::size_t>(ctx.config.integer("budget.max_steps"));
  const double u = ctx.config.real("sampler.u_max");
  const auto replicas = static_cast<std::size_t>(ctx.config.integer("sampler.replicas"));
  const auto seed = ctx.config.seed();
  std::vector<std::string> rows(replicas), counts(replicas);
  parallel_for(replicas, ctx.jobs, [&](std::size_t r) {
    auto streams = SamplerStreams::from_seed(seed, r);
    auto s = sampler.sample(u, rates, streams, opts);
    std::string body;
    for (const auto& v : interlacement_order(s)) {
      body += std::to_string(r) + "," + std::to_string(v.excursion) + "," +
              num(s.excursions[v.excursion].label) + "," + std::to_string(v.step) + "," +
              ctx.name(v.vertex) + "," + num(v.hold) + "," + num(v.time) + "\n";
    }
    rows[r] = std::move(body);
    counts[r] = std::to_string(r) + "," + std::to_string(s.excursions.size()) + "," +
                num(u * sampler.capacity()) + "\n";
  });
  std::string all, summary;
  for (std::size_t r = 0; r < replicas; ++r) {
    all += rows[r];
    summary += counts[r];
  }
  ctx.csv("trajectory.csv", "replica,excursion,label,step,vertex,hold,T", all);
  ctx.csv("counts.csv", "replica,excursions,expected", summary);
}

void cmd_sample_reflected(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  const int n = static_cast<int>(ctx.config.integer("sampler.level"));
  ReflectedSampler sampler(g, ex, n, parse_entry_mode(ctx.config.get("sampler.mode")), ctx.solver);
  auto rates = rates_of(ctx);
  ReflectedOptions opts;
  opts.mode = sampler.mode();
  opts.max_excursions = static_cast<std::size_t>(ctx.config.integer("sampler.excursions"));
  opts.duration = ctx.config.real("sampler.duration");
  opts.max_steps = static_cast<std::size_t>(ctx.config.integer("budget.max_steps"));
  const auto replicas = static_cast<std::size_t>(ctx.config.integer("sampler.replicas"));
  const auto seed = ctx.config.seed();
  std::vector<std::string> rows(replicas);
  parallel_for(replicas, ctx.jobs, [&](std::size_t r) {
    auto streams = SamplerStreams::from_seed(seed, r);
    auto t = sampler.sample(rates, streams, opts);
    std::string body;
    long excursion = t.start == StartMode::from_vertex ? 0 : -1;
    long step = 0;
    double time = 0.0;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      if (t.steps[i] == kInf) {
        ++excursion;
        step = 0;
        continue;
      }
      body += std::to_string(r) + "," + std::to_string(excursion) + "," + std::to_string(step++) +
              "," + ctx.name(t.steps[i]) + "," + num(t.holds[i]) + "," + num(time) + "\n";
      time += t.holds[i];
    }
    rows[r] = std::move(body);
  });
  std::string all;
  for (const auto& r : rows) all += r;
  ctx.csv("trajectory.csv", "replica,excursion,step,vertex,hold,T", all);
}

void cmd_forest_marginals(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  auto kind = parse_boundary_kind(ctx.config.get("forest.kind"));
  const int n = ctx.level_or("forest.level", ex.window() - 1);
  auto panel = resolve_panel(ctx, n, "forest.panel");
  auto m = panel_marginals(g, ex, n, panel, kind, ctx.solver);
  std::string body;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    body += ctx.name(panel[i].first) + "," + ctx.name(panel[i].second) + "," +
            num(m.probability[i]) + "," + std::string(to_string(kind)) + "," +
            std::to_string(n) + "\n";
  }
  ctx.csv("marginals.csv", "u,v,probability,kind,level", body);
}

void cmd_forest_wilson(Context& ctx) {
  const auto& g = ctx.window.graph;
  const auto& ex = ctx.window.exhaustion;
  auto kind = parse_boundary_kind(ctx.config.get("forest.kind"));
  const int n = ctx.level_or("forest.level", ex.window() - 1);
  auto panel = resolve_panel(ctx, n, "forest.panel");
  const auto samples = static_cast<std::size_t>(ctx.config.integer("forest.samples"));
  require(samples > 0, ErrorCode::usage, "forest.samples must be positive");
  WeightedGraph local;
  std::vector<Vertex> from_base;
  Vertex root = 0;
  if (kind == BoundaryKind::wired) {
    auto q = wire(g, ex, n);
    local = std::move(q.graph);
    from_base = std::move(q.from_base);
    root = q.zed;
  } else {
    auto fw = free_window(g, ex, n);
    local = std::move(fw.graph);
    from_base = std::move(fw.from_base);
    root = from_base[ex.center()];
  }
  std::vector<std::vector<char>> hit(samples, std::vector<char>(panel.size(), 0));
  const auto seed = ctx.config.seed();
  parallel_for(samples, ctx.jobs, [&](std::size_t s) {
    auto rng = Rng::substream(seed, s);
    auto f = wilson(local, root, rng);
    for (std::size_t i = 0; i < panel.size(); ++i) {
      hit[s][i] = f.contains(from_base[panel[i].first], from_base[panel[i].second]);
    }
  });
  auto exact = panel_marginals(g, ex, n, panel, kind, ctx.solver);
  std::string body;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    double count = 0.0;
    for (const auto& h : hit) count += h[i];
    body += ctx.name(panel[i].first) + "," + ctx.name(panel[i].second) + "," +
            num(count / static_cast<double>(samples)) + "," + num(exact.probability[i]) + "," +
            std::string(to_string(kind)) + "," + std::to_string(n) + "," +
            std::to_string(samples) + "\n";
  }
  ctx.csv("wilson.csv", "u,v,frequency,exact,kind,level,samples", body);
}

void cmd_compare(Context& ctx) {
  const auto& c = ctx.config;
  Budgets b;
  b.first_level = static_cast<int>(c.integer("compare.first_level"));
  b.last_level = static_cast<int>(c.integer("compare.last_level"));
  b.panel = static_cast<std::size_t>(c.integer("compare.panel"));
  b.entry_level = static_cast<int>(c.integer("compare.entry_level"));
  b.entry_samples = static_cast<std::size_t>(c.integer("compare.entry_samples"));
  b.rate_base = c.real("rates.base");
  b.rate_growth = c.real("rates.growth");
  b.seed = c.seed();
  b.solver = ctx.solver;
  b.bootstrap = static_cast<std::size_t>(c.integer("compare.bootstrap"));
  b.jobs = ctx.jobs;
  b.max_steps = static_cast<std::size_t>(c.integer("budget.max_steps"));
  Thresholds th;
  th.tv = c.real("compare.tv");
  th.resistance = c.real("compare.resistance");
  th.forest = c.real("compare.forest");
  th.entry_tv = c.real("compare.entry_tv");
  th.shrink = c.real("compare.shrink");
  th.plateau = c.real("compare.plateau");
  std::string label = c.get("graph.file").empty() ? c.get("graph.family") : c.get("graph.file");
  auto report = equivalence_report(ctx.window.graph, ctx.window.exhaustion, resolve_K(ctx), b, th,
                                   label);
  ctx.verdict = report.verdict;
  ctx.json_file("verdict.json", report.to_json());
  std::string csv = report.appendix_csv();
  ctx.csv("gaps.csv", "level,diagnostic,value", csv.substr(csv.find('\n') + 1));
}

json versions() {
  return json{{"interlab", "0.3.0"},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"compiler", __VERSION__}};
}

}  // namespace

RunResult run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::string cmd = config.get("run.cmd");
  const auto seed = config.seed();
  using Handler = void (*)(Context&);
  static const std::map<std::string, Handler> handlers{
      {"graph", cmd_graph},
      {"potential-equilibrium", cmd_potential_equilibrium},
      {"potential-entry-free", cmd_potential_entry_free},
      {"sample-ri", cmd_sample_ri},
      {"sample-reflected", cmd_sample_reflected},
      {"forest-marginals", cmd_forest_marginals},
      {"forest-wilson", cmd_forest_wilson},
      {"compare-equivalence", cmd_compare},
  };
  auto handler = handlers.find(cmd);
  require(handler != handlers.end(), ErrorCode::usage, "unknown command '" + cmd + "'");
  const long jobs = config.integer("run.jobs");
  require(jobs >= 1, ErrorCode::usage, "run.jobs must be at least 1");

  Context ctx{config, load_window(config), {}, static_cast<std::size_t>(jobs), {}, {}, {}};
  ctx.solver.tol = config.real("solver.tol");
  ctx.solver.max_iterations = static_cast<int>(config.integer("solver.max_iterations"));
  fs::path root = config.get("run.output").empty() ? default_output_root() : fs::path(config.get("run.output"));
  ctx.dir = root / (cmd + "-" + config.hash_hex().substr(0, 12));
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  require(!ec, ErrorCode::io, "cannot create " + ctx.dir.string() + ": " + ec.message());

  handler->second(ctx);

  json artifacts = json::array();
  for (const auto& name : ctx.artifacts) {
    Fnv1a h;
    h.text(read_file((ctx.dir / name).string()));
    artifacts.push_back({{"name", name}, {"fnv1a", hex64(h.value())}});
  }
  json inputs = json::object();
  for (const char* key : {"graph.file", "graph.exhaustion", "forest.panel_file"}) {
    const std::string& path = config.get(key);
    if (path.empty()) continue;
    Fnv1a h;
    h.text(read_file(path));
    inputs[key] = hex64(h.value());
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest{{"tool", "interlab"},
                {"command", cmd},
                {"config_hash", config.hash_hex()},
                {"seed", seed},
                {"config", config.to_json()},
                {"versions", versions()},
                {"window_level", ctx.window_level()},
                {"wall_time_seconds", wall},
                {"inputs", inputs},
                {"artifacts", artifacts}};
  if (!ctx.verdict.empty()) manifest["verdict"] = ctx.verdict;
  {
    std::ofstream out(ctx.dir / "manifest.json", std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write manifest");
    out << manifest.dump(2) << "\n";
  }
  RunResult r;
  r.directory = ctx.dir;
  r.artifacts = ctx.artifacts;
  r.verdict = ctx.verdict;
  return r;
}

std::vector<SuiteCase> suite_paper_cases() {
  auto make = [](const std::string& name, const std::string& text, const std::string& expected) {
    auto c = RunConfig::parse(text);
    return SuiteCase{name, c, expected};
  };
  return {
      make("zd3",
           "[run]\ncmd = compare-equivalence\nseed = 1101\n"
           "[graph]\nfamily = zd_box\ndim = 3\nradius = 13\n"
           "[K]\nvertices = 0,0,0 1,0,0 0,1,0 0,0,1\n",
           "consistent"),
      make("binary_tree",
           "[run]\ncmd = compare-equivalence\nseed = 1102\n"
           "[graph]\nfamily = regular_tree\nbranching = 2\nradius = 13\n"
           "[K]\nvertices = r r.0 r.1\n",
           "inconsistent"),
      make("two_sheet",
           "[run]\ncmd = compare-equivalence\nseed = 1103\n"
           "[graph]\nfamily = two_sheet\ndim = 3\nradius = 13\n"
           "[K]\nvertices = 0,0,0|0 0,0,0|1\n",
           "inconsistent"),
  };
}

RunResult suite_paper(const fs::path& output, std::size_t jobs) {
  const fs::path root = output / "suite-paper";
  RunResult result;
  result.directory = root;
  json cases = json::array();
  for (auto& c : suite_paper_cases()) {
    c.config.set("run.output", (root / c.name).string());
    c.config.set("run.jobs", std::to_string(jobs));
    auto r = run(c.config);
    bool ok = r.verdict == c.expected;
    if (!ok) result.exit_code = 3;
    for (const auto& a : r.artifacts) {
      result.artifacts.push_back((fs::relative(r.directory, root) / a).generic_string());
    }
    cases.push_back({{"name", c.name},
                     {"expected", c.expected},
                     {"verdict", r.verdict},
                     {"as_expected", ok},
                     {"config_hash", c.config.hash_hex()},
                     {"directory", fs::relative(r.directory, root).generic_string()}});
  }
  json doc{{"suite", "suite-paper"}, {"cases", cases}, {"passed", result.exit_code == 0}};
  std::ofstream out(root / "suite.json", std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write suite.json");
  out << doc.dump(2) << "\n";
  result.artifacts.push_back("suite.json");
  result.verdict = result.exit_code == 0 ? "as expected" : "unexpected verdict";
  return result;
}

}  // namespace interlab

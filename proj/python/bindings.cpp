#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "interlab/compare.hpp"
#include "interlab/error.hpp"
#include "interlab/forests.hpp"
#include "interlab/graph.hpp"
#include "interlab/potential.hpp"
#include "interlab/run.hpp"
#include "interlab/samplers.hpp"

namespace py = pybind11;
using namespace interlab;

namespace {

std::vector<Vertex> names_to_ids(const WeightedGraph& g, const std::vector<std::string>& names) {
  return resolve_vertices(g, names);
}

std::vector<Vertex> local(const std::vector<Vertex>& from_base, const std::vector<Vertex>& base) {
  std::vector<Vertex> out;
  for (Vertex x : base) out.push_back(from_base[x]);
  return out;
}

py::object json_to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

RunConfig config_from(const py::dict& values) {
  RunConfig c;
  for (auto [k, v] : values) c.set(py::str(k), py::str(v));
  return c;
}

py::dict run_result(const RunResult& r) {
  py::dict d;
  d["directory"] = r.directory;
  d["artifacts"] = r.artifacts;
  d["verdict"] = r.verdict;
  d["exit_code"] = r.exit_code;
  return d;
}

}  // namespace

PYBIND11_MODULE(_interlab, m) {
  m.doc() = "Random interlacements, reflected walks and spanning forests on exhaustions";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string message = std::string(to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), message.c_str());
    }
  });

  py::class_<WeightedGraph>(m, "Graph")
      .def_property_readonly("num_vertices", &WeightedGraph::num_vertices)
      .def_property_readonly("num_edges", &WeightedGraph::num_edges)
      .def("name", &WeightedGraph::name)
      .def("vertex", [](const WeightedGraph& g, const std::string& n) { return g.vertex(n); })
      .def("neighbors", [](const WeightedGraph& g, Vertex x) {
        auto s = g.neighbors(x);
        return std::vector<Vertex>(s.begin(), s.end());
      })
      .def("edges", [](const WeightedGraph& g) {
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& e : g.edges()) out.emplace_back(g.name(e.u), g.name(e.v), e.c);
        return out;
      })
      .def("to_text", [](const WeightedGraph& g) { return write_graph(g); });

  py::class_<Window>(m, "Window")
      .def_readonly("graph", &Window::graph)
      .def_property_readonly("window", [](const Window& w) { return w.exhaustion.window(); })
      .def_property_readonly("center",
                             [](const Window& w) { return w.graph.name(w.exhaustion.center()); })
      .def("level", [](const Window& w, int n) {
        std::vector<std::string> out;
        for (Vertex x : w.exhaustion.level(n)) out.push_back(w.graph.name(x));
        return out;
      })
      .def("shell", [](const Window& w, const std::string& name) {
        return w.exhaustion.shell(w.graph.vertex(name));
      });

  m.def(
      "build_family",
      [](const std::string& family, int radius, int dim, int branching, int fiber,
         double fiber_conductance, double ladder_ratio) {
        FamilyParams p;
        p.family = parse_family(family);
        p.radius = radius;
        p.dim = dim;
        p.branching = branching;
        p.fiber = fiber;
        p.fiber_conductance = fiber_conductance;
        p.ladder_ratio = ladder_ratio;
        return build_family(p);
      },
      py::arg("family") = "zd_box", py::arg("radius") = 4, py::arg("dim") = 3,
      py::arg("branching") = 2, py::arg("fiber") = 2, py::arg("fiber_conductance") = 1.0,
      py::arg("ladder_ratio") = 0.5);

  m.def(
      "load_window",
      [](const std::string& graph_text, const std::string& exhaustion_text) {
        Window w;
        w.graph = read_graph(graph_text);
        w.exhaustion = read_exhaustion(exhaustion_text, w.graph);
        return w;
      },
      py::arg("graph_text"), py::arg("exhaustion_text"));

  m.def(
      "equilibrium",
      [](const Window& w, const std::vector<std::string>& K, int level) {
        auto q = wire(w.graph, w.exhaustion, level);
        auto kq = local(q.from_base, names_to_ids(w.graph, K));
        auto eq = equilibrium_measure(q, kq);
        py::dict mass, normalized;
        for (std::size_t i = 0; i < K.size(); ++i) {
          mass[py::str(K[i])] = eq.measure.at(kq[i]);
          normalized[py::str(K[i])] = eq.normalized.at(kq[i]);
        }
        py::dict out;
        out["capacity"] = eq.capacity;
        out["measure"] = mass;
        out["normalized"] = normalized;
        return out;
      },
      py::arg("window"), py::arg("K"), py::arg("level"));

  m.def(
      "entry_measure_free",
      [](const Window& w, int level, const std::vector<std::string>& K, const std::string& probe) {
        auto ids = names_to_ids(w.graph, K);
        auto e = entry_measure_free(w.graph, w.exhaustion, level, ids, w.graph.vertex(probe));
        py::dict out;
        for (std::size_t i = 0; i < K.size(); ++i) out[py::str(K[i])] = e.measure.at(ids[i]);
        return out;
      },
      py::arg("window"), py::arg("level"), py::arg("K"), py::arg("probe"));

  m.def(
      "effective_resistance",
      [](const Window& w, const std::string& a, const std::string& b, int level,
         const std::string& kind) {
        Vertex va = w.graph.vertex(a), vb = w.graph.vertex(b);
        if (parse_boundary_kind(kind) == BoundaryKind::wired) {
          auto q = wire(w.graph, w.exhaustion, level);
          return effective_resistance(q.graph, q.from_base[va], q.from_base[vb]);
        }
        auto f = free_window(w.graph, w.exhaustion, level);
        return effective_resistance(f.graph, f.from_base[va], f.from_base[vb]);
      },
      py::arg("window"), py::arg("a"), py::arg("b"), py::arg("level"), py::arg("kind") = "free");

  m.def(
      "sample_interlacement",
      [](const Window& w, const std::vector<std::string>& K, double u, std::uint64_t seed,
         std::uint64_t replica, double rate_base, double rate_growth) {
        InterlacementSampler sampler(w.graph, w.exhaustion, names_to_ids(w.graph, K));
        auto rates = default_rate(w.exhaustion, rate_base, rate_growth);
        auto streams = SamplerStreams::from_seed(seed, replica);
        auto s = sampler.sample(u, rates, streams);
        py::list out;
        for (const auto& e : s.excursions) {
          py::dict d;
          std::vector<std::string> path;
          for (Vertex x : e.path) path.push_back(w.graph.name(x));
          d["path"] = path;
          d["holds"] = e.holds;
          d["root"] = e.root;
          d["label"] = e.label;
          out.append(d);
        }
        return out;
      },
      py::arg("window"), py::arg("K"), py::arg("u"), py::arg("seed"), py::arg("replica") = 0,
      py::arg("rate_base") = 1.0, py::arg("rate_growth") = 2.0);

  m.def(
      "sample_reflected",
      [](const Window& w, int level, const std::string& mode, std::uint64_t seed,
         std::size_t excursions, double rate_base, double rate_growth) {
        ReflectedSampler sampler(w.graph, w.exhaustion, level, parse_entry_mode(mode));
        auto rates = default_rate(w.exhaustion, rate_base, rate_growth);
        ReflectedOptions opts;
        opts.mode = sampler.mode();
        opts.max_excursions = excursions;
        auto streams = SamplerStreams::from_seed(seed);
        auto t = sampler.sample(rates, streams, opts);
        py::list steps;
        for (Vertex x : t.steps) {
          if (x == kInf) {
            steps.append(py::none());
          } else {
            steps.append(w.graph.name(x));
          }
        }
        return py::make_tuple(steps, t.holds);
      },
      py::arg("window"), py::arg("level"), py::arg("mode") = "free-trace", py::arg("seed"),
      py::arg("excursions") = 100, py::arg("rate_base") = 1.0, py::arg("rate_growth") = 2.0);

  m.def(
      "wilson",
      [](const Window& w, int level, const std::string& kind, std::uint64_t seed) {
        WeightedGraph g;
        std::vector<Vertex> to_base;
        Vertex root = 0, zed = -1;
        if (parse_boundary_kind(kind) == BoundaryKind::wired) {
          auto q = wire(w.graph, w.exhaustion, level);
          root = zed = q.zed;
          g = std::move(q.graph);
          to_base = std::move(q.to_base);
        } else {
          auto f = free_window(w.graph, w.exhaustion, level);
          root = f.from_base[w.exhaustion.center()];
          g = std::move(f.graph);
          to_base = std::move(f.to_base);
        }
        auto rng = Rng::substream(seed, 0);
        auto forest = wilson(g, root, rng);
        std::vector<std::pair<std::string, std::string>> edges;
        for (Vertex x = 0; x < static_cast<Vertex>(g.num_vertices()); ++x) {
          Vertex p = forest.parent[x];
          if (p < 0 || x == zed || p == zed) continue;
          edges.emplace_back(w.graph.name(to_base[x]), w.graph.name(to_base[p]));
        }
        return edges;
      },
      py::arg("window"), py::arg("level"), py::arg("kind") = "wired", py::arg("seed"));

  m.def(
      "panel_marginals",
      [](const Window& w, int level, const std::string& kind, std::size_t panel_size) {
        std::vector<VertexPair> panel;
        for (auto e : central_panel(w.graph, w.exhaustion, panel_size)) {
          if (w.exhaustion.contains(level, e.first) && w.exhaustion.contains(level, e.second)) {
            panel.push_back(e);
          }
        }
        auto m = panel_marginals(w.graph, w.exhaustion, level, panel, parse_boundary_kind(kind));
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (std::size_t i = 0; i < panel.size(); ++i) {
          out.emplace_back(w.graph.name(panel[i].first), w.graph.name(panel[i].second),
                           m.probability[i]);
        }
        return out;
      },
      py::arg("window"), py::arg("level"), py::arg("kind") = "free", py::arg("panel_size") = 20);

  m.def(
      "equivalence_report",
      [](const Window& w, const std::vector<std::string>& K, int first_level, int last_level,
         std::uint64_t seed, std::size_t entry_samples, std::size_t jobs) {
        Budgets b;
        b.first_level = first_level;
        b.last_level = last_level;
        b.seed = seed;
        b.entry_samples = entry_samples;
        b.jobs = jobs;
        auto ids = names_to_ids(w.graph, K);
        nlohmann::ordered_json doc;
        {
          py::gil_scoped_release release;
          doc = equivalence_report(w.graph, w.exhaustion, ids, b).to_json();
        }
        return json_to_python(doc);
      },
      py::arg("window"), py::arg("K"), py::arg("first_level") = 4, py::arg("last_level") = -1,
      py::arg("seed"), py::arg("entry_samples") = 20000, py::arg("jobs") = 1);

  m.def(
      "config_hash",
      [](const py::dict& values) { return config_from(values).hash_hex(); }, py::arg("config"));

  m.def(
      "run", [](const py::dict& values) { return run_result(run(config_from(values))); },
      py::arg("config"));

  m.def(
      "run_text", [](const std::string& text) { return run_result(run(RunConfig::parse(text))); },
      py::arg("text"));

  m.def(
      "suite_paper",
      [](const std::filesystem::path& output, std::size_t jobs) {
        return run_result(suite_paper(output, jobs));
      },
      py::arg("output"), py::arg("jobs") = 1);
}

#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "interlab/graph.hpp"

namespace fixture {

using namespace interlab;

inline Window zd(int radius) {
  FamilyParams p;
  p.radius = radius;
  return build_family(p);
}

inline Window binary_tree(int depth) {
  FamilyParams p;
  p.family = Family::regular_tree;
  p.radius = depth;
  return build_family(p);
}

inline Window two_sheet(int radius) {
  FamilyParams p;
  p.family = Family::two_sheet;
  p.radius = radius;
  return build_family(p);
}

inline Vertex id(const WeightedGraph& g, const std::string& name) {
  auto v = g.find(name);
  if (!v) throw std::runtime_error("no vertex " + name);
  return *v;
}

inline std::vector<Vertex> ids(const WeightedGraph& g, std::initializer_list<const char*> names) {
  std::vector<Vertex> out;
  for (const char* n : names) out.push_back(id(g, n));
  return out;
}

using EdgeSpec = std::tuple<const char*, const char*, double>;

inline WeightedGraph graph(std::initializer_list<EdgeSpec> edges) {
  GraphBuilder b;
  for (auto [u, v, c] : edges) b.add_edge(u, v, c);
  return std::move(b).build();
}

}  // namespace fixture

#include <cctype>
#include <charconv>

#include "interlab/error.hpp"
#include "interlab/graph.hpp"

namespace interlab {

namespace {

std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  return line;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    ++line_no;
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

WeightedGraph read_graph(std::string_view text) {
  GraphBuilder b;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    auto fields = split_ws(strip_comment(raw));
    if (fields.empty()) return;
    auto where = "line " + std::to_string(line_no) + ": ";
    require(fields.size() == 3, ErrorCode::parse, where + "expected '<u> <v> <c>'");
    double c = 0.0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), c);
    require(ec == std::errc() && ptr == fields[2].data() + fields[2].size(), ErrorCode::parse,
            where + "bad conductance '" + std::string(fields[2]) + "'");
    try {
      b.add_edge(fields[0], fields[1], c);
    } catch (const Error& e) {
      fail(e.code(), where + e.what());
    }
  });
  return std::move(b).build();
}

std::string write_graph(const WeightedGraph& graph) {
  std::string out;
  for (const Edge& e : graph.edges()) {
    out += graph.name(e.u);
    out += ' ';
    out += graph.name(e.v);
    out += ' ';
    out += format_double(e.c);
    out += '\n';
  }
  return out;
}

Exhaustion read_exhaustion(std::string_view text, const WeightedGraph& graph) {
  std::vector<int> shell(graph.num_vertices(), -1);
  int level = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    auto fields = split_ws(strip_comment(raw));
    if (fields.empty()) return;
    std::size_t previous = 0;
    for (int s : shell) previous += (s >= 0);
    std::size_t listed_old = 0;
    for (auto name : fields) {
      auto v = graph.find(name);
      require(v.has_value(), ErrorCode::parse,
              "line " + std::to_string(line_no) + ": unknown vertex '" + std::string(name) + "'");
      require(shell[*v] != level, ErrorCode::parse,
              "line " + std::to_string(line_no) + ": vertex '" + std::string(name) +
                  "' listed twice");
      if (shell[*v] < 0) {
        shell[*v] = level;
      } else {
        ++listed_old;
      }
    }
    require(listed_old == previous, ErrorCode::invalid_argument,
            "line " + std::to_string(line_no) + ": level does not contain the previous level");
    ++level;
  });
  for (int s : shell) {
    require(s >= 0, ErrorCode::invalid_argument, "exhaustion does not cover the graph");
  }
  return Exhaustion(graph, std::move(shell));
}

std::string write_exhaustion(const WeightedGraph& graph, const Exhaustion& exhaustion) {
  std::string out;
  for (int n = 0; n <= exhaustion.window(); ++n) {
    bool first = true;
    for (Vertex x : exhaustion.level(n)) {
      if (!first) out += ' ';
      out += graph.name(x);
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace interlab

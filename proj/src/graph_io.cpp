#include "jtree/graph_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "jtree/errors.hpp"

namespace jtree {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw ValidationError(where + ": missing field \"" + name + "\"");
  }
  return *it;
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return v.get<int>();
}

double as_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(where + ": not finite");
  return x;
}

}  // namespace

JacobiGraph parse_graph_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("graph file: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("graph file: top level must be an object");

  const int p = as_int(field(doc, "vertices", "graph"), "vertices");
  if (p <= 0) throw ValidationError("vertices: must be positive");

  const json& bj = field(doc, "b", "graph");
  if (!bj.is_array()) throw ValidationError("b: expected an array");
  if (static_cast<int>(bj.size()) != p) {
    throw ValidationError("b: expected " + std::to_string(p) + " entries, got " +
                          std::to_string(bj.size()));
  }
  std::vector<double> b;
  for (std::size_t i = 0; i < bj.size(); ++i) {
    b.push_back(as_real(bj[i], "b[" + std::to_string(i) + "]"));
  }

  const json& ej = field(doc, "edges", "graph");
  if (!ej.is_array()) throw ValidationError("edges: expected an array");
  std::vector<std::pair<int, int>> edges;
  std::vector<double> a;
  for (std::size_t i = 0; i < ej.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!ej[i].is_object()) throw ValidationError(where + ": expected an object");
    const int u = as_int(field(ej[i], "u", where), where + ".u");
    const int v = as_int(field(ej[i], "v", where), where + ".v");
    const double ae = as_real(field(ej[i], "a", where), where + ".a");
    if (u < 0 || u >= p) throw ValidationError(where + ".u: vertex out of range");
    if (v < 0 || v >= p) throw ValidationError(where + ".v: vertex out of range");
    if (!(ae > 0.0)) throw ValidationError(where + ".a: coupling must be positive");
    edges.emplace_back(u, v);
    a.push_back(ae);
  }

  JacobiGraph jg = make_jacobi_graph(p, edges, a, std::move(b));
  require_valid(jg);
  return jg;
}

JacobiGraph read_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open graph file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_graph_json(ss.str());
}

nlohmann::json graph_to_json(const JacobiGraph& jg) {
  json edges = json::array();
  for (int e : jg.graph.edges()) {
    edges.push_back({{"u", jg.graph.source(e)},
                     {"v", jg.graph.target(e)},
                     {"a", jg.params.a[e]}});
  }
  return {{"vertices", jg.period()}, {"b", jg.params.b}, {"edges", edges}};
}

}  // namespace jtree

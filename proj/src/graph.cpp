#include "jtree/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "jtree/errors.hpp"

namespace jtree {

MultiGraph MultiGraph::from_edges(int num_vertices,
                                  std::span<const std::pair<int, int>> edges) {
  if (num_vertices < 0) throw std::invalid_argument("num_vertices must be >= 0");
  std::vector<HalfEdge> half;
  half.reserve(2 * edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (u < 0 || v < 0 || u >= num_vertices || v >= num_vertices) {
      throw std::out_of_range("edge " + std::to_string(i) +
                              " has an endpoint outside 0.." +
                              std::to_string(num_vertices - 1));
    }
    const int e = static_cast<int>(2 * i);
    half.push_back({e, e + 1, u, v});
    half.push_back({e + 1, e, v, u});
  }
  return from_half_edges(num_vertices, std::move(half));
}

MultiGraph MultiGraph::from_half_edges(int num_vertices,
                                       std::vector<HalfEdge> half_edges) {
  MultiGraph g;
  g.num_vertices_ = num_vertices;
  g.half_edges_ = std::move(half_edges);
  g.index();
  return g;
}

void MultiGraph::index() {
  out_star_.assign(num_vertices_, {});
  edges_.clear();
  const int h = num_half_edges();
  for (const auto& he : half_edges_) {
    if (he.source >= 0 && he.source < num_vertices_) {
      out_star_[he.source].push_back(he.id);
    }
    if (he.reversal >= 0 && he.reversal < h && he.id < he.reversal) {
      edges_.push_back(he.id);
    }
  }
}

bool MultiGraph::is_connected() const {
  if (num_vertices_ == 0) return false;
  std::vector<char> seen(num_vertices_, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int e : out_star_[v]) {
      const int w = half_edges_[e].target;
      if (w >= 0 && w < num_vertices_ && !seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == num_vertices_;
}

bool ValidationReport::has(Violation kind) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
  if (ok()) return "valid";
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].message;
  }
  return os.str();
}

ValidationReport validate(const MultiGraph& graph, const JacobiParams& params) {
  ValidationReport rep;
  auto add = [&](Violation k, int idx, std::string msg) {
    rep.issues.push_back({k, idx, std::move(msg)});
  };
  const int p = graph.num_vertices();
  const int h = graph.num_half_edges();
  if (p <= 0) {
    add(Violation::empty_graph, -1, "graph has no vertices");
    return rep;
  }
  if (static_cast<int>(params.b.size()) != p ||
      static_cast<int>(params.a.size()) != h) {
    add(Violation::parameter_size, -1,
        "parameter arrays do not match graph (b: " +
            std::to_string(params.b.size()) + " for " + std::to_string(p) +
            " vertices, a: " + std::to_string(params.a.size()) + " for " +
            std::to_string(h) + " half-edges)");
  }

  bool structure_ok = true;
  for (int e = 0; e < h; ++e) {
    const auto& he = graph.half_edge(e);
    if (he.id != e) {
      add(Violation::broken_reversal, e, "half-edge " + std::to_string(e) +
                                             " carries id " + std::to_string(he.id));
      structure_ok = false;
    }
    if (he.source < 0 || he.source >= p || he.target < 0 || he.target >= p) {
      add(Violation::bad_vertex_index, e,
          "half-edge " + std::to_string(e) + " has an endpoint out of range");
      structure_ok = false;
      continue;
    }
    if (he.reversal < 0 || he.reversal >= h || he.reversal == e ||
        graph.half_edge(he.reversal).reversal != e) {
      add(Violation::broken_reversal, e,
          "half-edge " + std::to_string(e) + " has no valid reversal partner");
      structure_ok = false;
      continue;
    }
    const auto& rev = graph.half_edge(he.reversal);
    if (rev.source != he.target || rev.target != he.source) {
      add(Violation::endpoint_mismatch, e,
          "half-edge " + std::to_string(e) +
              " and its reversal do not swap endpoints");
      structure_ok = false;
    }
  }

  if (structure_ok) {
    if (!graph.is_connected()) add(Violation::disconnected, -1, "graph is disconnected");
    for (int v = 0; v < p; ++v) {
      if (graph.degree(v) < 2) {
        add(Violation::leaf, v, "vertex " + std::to_string(v) + " has degree " +
                                    std::to_string(graph.degree(v)) +
                                    " (leaves are not supported)");
      }
    }
  }

  if (static_cast<int>(params.a.size()) == h) {
    for (int e = 0; e < h; ++e) {
      const double ae = params.a[e];
      if (!(ae > 0.0) || !std::isfinite(ae)) {
        add(Violation::nonpositive_coupling, e,
            "coupling on half-edge " + std::to_string(e) + " is not positive");
      }
      const int r = graph.half_edge(e).reversal;
      if (structure_ok && e < r && params.a[r] != ae) {
        add(Violation::asymmetric_coupling, e,
            "coupling differs between half-edges " + std::to_string(e) +
                " and " + std::to_string(r));
      }
    }
  }
  for (std::size_t v = 0; v < params.b.size(); ++v) {
    if (!std::isfinite(params.b[v])) {
      add(Violation::nonfinite_potential, static_cast<int>(v),
          "potential at vertex " + std::to_string(v) + " is not finite");
    }
  }
  return rep;
}

void require_valid(const JacobiGraph& jg) {
  const auto rep = validate(jg);
  if (!rep.ok()) throw ValidationError(rep.summary());
}

JacobiGraph make_jacobi_graph(int num_vertices,
                              std::span<const std::pair<int, int>> edges,
                              std::span<const double> couplings,
                              std::vector<double> potentials) {
  if (couplings.size() != edges.size()) {
    throw std::invalid_argument("one coupling per edge is required");
  }
  JacobiGraph jg;
  jg.graph = MultiGraph::from_edges(num_vertices, edges);
  jg.params.b = std::move(potentials);
  jg.params.a.resize(2 * edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    jg.params.a[2 * i] = couplings[i];
    jg.params.a[2 * i + 1] = couplings[i];
  }
  return jg;
}

namespace {

void require_positive(std::span<const double> a) {
  for (double x : a) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("couplings must be positive and finite");
    }
  }
}

}  // namespace

JacobiGraph build_cycle(int p, std::span<const double> a,
                        std::span<const double> b) {
  if (p < 1) throw std::invalid_argument("cycle length must be >= 1");
  if (static_cast<int>(a.size()) != p || static_cast<int>(b.size()) != p) {
    throw std::invalid_argument("cycle needs p couplings and p potentials");
  }
  require_positive(a);
  std::vector<std::pair<int, int>> edges;
  for (int j = 0; j < p; ++j) edges.emplace_back(j, (j + 1) % p);
  return make_jacobi_graph(p, edges, a, std::vector<double>(b.begin(), b.end()));
}

JacobiGraph build_theta(int k, double a, double b) {
  if (k < 2) throw std::invalid_argument("theta graph needs k >= 2 parallel edges");
  const double aa[] = {a};
  require_positive(aa);
  std::vector<std::pair<int, int>> edges(k, {0, 1});
  std::vector<double> couplings(k, a);
  return make_jacobi_graph(2, edges, couplings, {b, b});
}

JacobiGraph build_complete_bipartite(int m, int n, double a, double b) {
  if (m < 2 || n < 2) {
    throw std::invalid_argument("K_{m,n} needs m, n >= 2 to be leafless");
  }
  const double aa[] = {a};
  require_positive(aa);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < n; ++v) edges.emplace_back(u, m + v);
  std::vector<double> couplings(edges.size(), a);
  return make_jacobi_graph(m + n, edges, couplings, std::vector<double>(m + n, b));
}

std::pair<double, double> gershgorin_bounds(const JacobiGraph& jg) {
  double lo = 0.0, hi = 0.0;
  for (int v = 0; v < jg.period(); ++v) {
    double radius = 0.0;
    for (int e : jg.graph.out_star(v)) radius += std::abs(jg.params.a[e]);
    const double l = jg.params.b[v] - radius;
    const double r = jg.params.b[v] + radius;
    if (v == 0 || l < lo) lo = l;
    if (v == 0 || r > hi) hi = r;
  }
  return {lo, hi};
}

double norm_bound(const JacobiGraph& jg) {
  const auto [lo, hi] = gershgorin_bounds(jg);
  return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace jtree

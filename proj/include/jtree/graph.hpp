// Finite base multigraph with paired half-edges and Jacobi parameters.
//
// Vertices are 0..p-1. Edge pair i built by from_edges() owns half-edges
// 2i (u -> v) and 2i+1 (v -> u); the lower id is the pair's orientation.
// A self-loop at v is one pair whose two half-edges both run v -> v, and
// both sit in out_star(v).
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace jtree {

struct HalfEdge {
  int id = 0;
  int reversal = 0;
  int source = 0;
  int target = 0;
};

class MultiGraph {
 public:
  MultiGraph() = default;

  /// Builds the half-edge structure from endpoint pairs, in order.
  static MultiGraph from_edges(int num_vertices,
                               std::span<const std::pair<int, int>> edges);

  /// Takes half-edges verbatim. No structural checks; see validate().
  static MultiGraph from_half_edges(int num_vertices,
                                    std::vector<HalfEdge> half_edges);

  int num_vertices() const { return num_vertices_; }
  int num_half_edges() const { return static_cast<int>(half_edges_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const HalfEdge& half_edge(int e) const { return half_edges_[e]; }
  std::span<const HalfEdge> half_edges() const { return half_edges_; }
  std::span<const int> out_star(int v) const { return out_star_[v]; }
  int degree(int v) const { return static_cast<int>(out_star_[v].size()); }

  /// Oriented representative (lower id) of each edge pair.
  std::span<const int> edges() const { return edges_; }
  int reversal(int e) const { return half_edges_[e].reversal; }
  int source(int e) const { return half_edges_[e].source; }
  int target(int e) const { return half_edges_[e].target; }

  bool is_connected() const;

 private:
  void index();

  int num_vertices_ = 0;
  std::vector<HalfEdge> half_edges_;
  std::vector<std::vector<int>> out_star_;
  std::vector<int> edges_;
};

struct JacobiParams {
  std::vector<double> b;  // per vertex
  std::vector<double> a;  // per half-edge
};

struct JacobiGraph {
  MultiGraph graph;
  JacobiParams params;

  int period() const { return graph.num_vertices(); }
};

enum class Violation {
  empty_graph,
  parameter_size,
  broken_reversal,
  endpoint_mismatch,
  bad_vertex_index,
  disconnected,
  leaf,
  nonpositive_coupling,
  asymmetric_coupling,
  nonfinite_potential,
};

struct ValidationIssue {
  Violation kind;
  int index = -1;  // offending vertex or half-edge, -1 if global
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(Violation kind) const;
  std::string summary() const;
};

ValidationReport validate(const MultiGraph& graph, const JacobiParams& params);
inline ValidationReport validate(const JacobiGraph& jg) {
  return validate(jg.graph, jg.params);
}

/// Throws ValidationError carrying the report summary unless valid.
void require_valid(const JacobiGraph& jg);

/// Assembles a JacobiGraph from endpoint pairs with one coupling per pair.
JacobiGraph make_jacobi_graph(int num_vertices,
                              std::span<const std::pair<int, int>> edges,
                              std::span<const double> couplings,
                              std::vector<double> potentials);

// Test-family builders. All throw std::invalid_argument on bad input.

/// Cycle of length p (p=1: one self-loop, p=2: two parallel edges).
/// Edge j joins j and (j+1) mod p with coupling a[j].
JacobiGraph build_cycle(int p, std::span<const double> a,
                        std::span<const double> b);
/// Two vertices joined by k parallel edges; covers the k-regular tree.
JacobiGraph build_theta(int k, double a, double b);
/// K_{m,n}: vertices 0..m-1 on one side, m..m+n-1 on the other.
JacobiGraph build_complete_bipartite(int m, int n, double a, double b);

/// Gershgorin interval containing the spectrum of the lifted operator.
std::pair<double, double> gershgorin_bounds(const JacobiGraph& jg);
/// max_v |b_v| + sum of |a| over out_star(v).
double norm_bound(const JacobiGraph& jg);

}  // namespace jtree

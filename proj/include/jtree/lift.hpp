// Finite n-fold covers of the base graph as a brute-force check on the
// density of states: the empirical spectral distribution of a random lift
// approaches k(E).
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jtree/graph.hpp"
#include "jtree/spectral.hpp"

namespace jtree {

struct LiftMatrix {
  int n = 0;     // lift degree
  int size = 0;  // p * n; lifted vertex (v, i) has index v * n + i
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> permutations;  // per edge pair, graph.edges() order
  std::vector<double> entries;                 // dense, row-major

  double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * size + j]; }
  double norm_inf() const;
};

/// One uniformly random permutation per edge pair; self-loop permutations
/// are fixed-point-free for n >= 2. n = 1 gives the base Jacobi matrix.
LiftMatrix random_lift(const JacobiGraph& jg, int n, std::uint64_t seed);

/// Eigenvalues of a dense symmetric matrix (row-major, size x size),
/// ascending: Householder tridiagonalisation then implicit QL.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int size);

std::vector<double> eigenvalues(const LiftMatrix& lift, int cap = 4000);

/// Sup distance between the step CDF of eigs and the IDS of dos. Eigenvalues
/// within snap_relative of the energy range from an atom are placed on it.
double empirical_ids_distance(std::span<const double> eigs, const DOSResult& dos,
                              double snap_relative = 1e-6);

struct KernelResult {
  int dimension = 0;
  double threshold = 0.0;
  double smallest_kept = 0.0;     // smallest accepted pivot
  double largest_dropped = 0.0;   // largest pivot below threshold
  bool borderline = false;        // a pivot within 10^3 of the threshold
};

/// Nullity of (M - lambda I) by fully pivoted elimination with pivots below
/// 1e-8 ||M|| treated as zero.
KernelResult kernel_dimension(const LiftMatrix& lift, double lambda);

}  // namespace jtree

// Self-consistent m-functions on the universal cover.
//
// For every half-edge f the half-tree value m_f(z) satisfies
//
//   1/m_f = -z + b_{target(f)} - sum_{f' in children(f)} a_{f'}^2 m_{f'},
//   children(f) = { f' : source(f') = target(f), f' != reversal(f) },
//
// and the vertex Green's functions and edge Q-factors follow from m:
//
//   1/G_u = -z + b_u - sum_{source(f) = u} a_f^2 m_f,
//   Q_e   = 1 / (1 - a_e^2 m_e m_{rev e}) = G_{source e}/m_{rev e} = G_{target e}/m_e.
//
// Only the Herglotz branch (Im m > 0 on the upper half-plane) is computed.
#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "jtree/graph.hpp"

namespace jtree {

using cplx = std::complex<double>;

struct SolverConfig {
  double tolerance = 1e-12;     // on max_f |m_f D_f(m) - 1|
  int max_iterations = 1'000'000;
  double damping = 1.0;         // fixed-point relaxation, halved on residual growth
  std::optional<cplx> initial_value;  // default -1/z for every half-edge

  void check() const;
};

struct MSolution {
  cplx z;
  std::vector<cplx> m;      // per half-edge
  std::vector<cplx> G;      // per vertex
  std::vector<cplx> Q;      // per edge pair, in graph.edges() order
  std::vector<char> G_pole;
  std::vector<char> Q_pole;
  double residual = 0.0;
  int iterations = 0;
  double q_discrepancy = 0.0;  // max pairwise relative spread of the three Q forms

  bool has_pole() const;
};

/// Solves for the Herglotz m-functions at z (Im z >= 0).
///
/// Im z > 0 uses damped fixed-point iteration at a large imaginary part,
/// then Newton continuation down to Im z. Real z is reached as the limit
/// from the upper half-plane and must lie in the resolvent set.
/// Throws DomainError for Im z < 0 and NonConvergence on failure.
MSolution solve_m(const JacobiGraph& jg, cplx z, const SolverConfig& cfg = {});

/// Newton polish from a nearby solution (warm start along a contour).
/// Returns nullopt on divergence or if the result leaves the Herglotz branch.
std::optional<MSolution> solve_m_from(const JacobiGraph& jg, cplx z,
                                      std::span<const cplx> guess,
                                      const SolverConfig& cfg = {});

/// Solutions at Re z + i*eps for a decreasing ladder, by one continuation.
std::vector<MSolution> solve_ladder(const JacobiGraph& jg, double energy,
                                    std::span<const double> eps_ladder,
                                    const SolverConfig& cfg = {});

/// max_f |m_f D_f(m) - 1| for an arbitrary m (any z, including Im z < 0).
double fixed_point_residual(const JacobiGraph& jg, cplx z, std::span<const cplx> m);

struct GreenValues {
  std::vector<cplx> values;
  std::vector<char> pole;  // denominator vanished; value set to infinity
};

GreenValues green_from_m(const JacobiGraph& jg, std::span<const cplx> m, cplx z);

struct QValues {
  std::vector<cplx> values;
  std::vector<char> pole;
  double discrepancy = 0.0;
};

QValues q_from_m(const JacobiGraph& jg, std::span<const cplx> m,
                 std::span<const cplx> G);

}  // namespace jtree

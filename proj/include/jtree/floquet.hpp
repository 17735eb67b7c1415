// The Floquet function Phi(z) = exp(p * integral log(t - z) dk(t)) and its
// edge-over-vertex product form
//
//   Phi(z) = prod_{edges} Q_e(z) / prod_{vertices} G_u(z).
//
// Branch: Im log Phi -> 0 as z -> -infinity along the real axis, continued
// through the upper half-plane. On a real resolvent point E0 this gives
// Im log Phi(E0) = -p pi k(E0).
#pragma once

#include <complex>

#include "jtree/graph.hpp"
#include "jtree/solver.hpp"
#include "jtree/spectral.hpp"

namespace jtree {

enum class PhiSource { product, integral };

struct FloquetValue {
  cplx z;
  cplx phi;
  cplx log_phi;
  PhiSource source = PhiSource::product;
};

/// Product form from a converged solution. log_phi uses
/// log Q_e = log G_{source e} - log m_{rev e} with every factor a Herglotz
/// function, so it is on the correct branch throughout the closed upper
/// half-plane. Throws DomainError at poles or zeros of a factor.
FloquetValue phi_product(const JacobiGraph& jg, const MSolution& sol);
FloquetValue phi_product(const JacobiGraph& jg, cplx z, const SolverConfig& cfg = {});

/// Integral form by trapezoid quadrature on the density grid plus exact
/// atom terms. Throws DomainError if the grid does not carry unit mass
/// (within mass_tolerance) or if z is a real point where the density is
/// above density_floor.
FloquetValue phi_integral(const DOSResult& dos, cplx z, double mass_tolerance = 1e-3,
                          double density_floor = 1e-4);

struct IdsConfig {
  double contour_height_relative = 1e-3;  // times the Gershgorin diameter
  double max_arg_step = 0.5;              // radians per factor per step
  double min_step_relative = 1e-12;
  SolverConfig solver;
};

struct IdsResult {
  double energy = 0.0;
  double ids = 0.0;         // k(E0)
  int label = 0;            // round(p k(E0))
  double residual = 0.0;    // |p k(E0) - label|
  double im_log_phi = 0.0;
  double reality = 0.0;     // |Im Phi(E0)| / |Phi(E0)|
  int steps = 0;
};

/// k(E0) by continuing arg Phi from the left of the spectrum along
/// Im z = height, then down to the real point E0 (or to 1e-10 of the
/// diameter above it when a half-tree m has a pole at E0). Every factor's
/// argument is accumulated separately. Throws DomainError if the density at
/// E0 is above 1e-4 and NonConvergence if the step size underflows.
IdsResult ids_via_arg(const JacobiGraph& jg, double e0, const IdsConfig& cfg = {});

struct LogDerivativeReport {
  cplx z;
  cplx dlog_phi;          // central difference of log Phi
  cplx minus_sum_green;   // -sum_v G_v(z)
  double residual_phi = 0.0;
  cplx dlog_q_sum;        // sum_e (log Q_e)'
  cplx green_side;        // sum_u (-G_u + (log G_u)')
  double residual_q = 0.0;
};

LogDerivativeReport log_derivative_check(const JacobiGraph& jg, cplx z, double h,
                                         const SolverConfig& cfg = {});

}  // namespace jtree

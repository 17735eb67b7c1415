// Density of states by Stieltjes inversion of the averaged Green's function,
//
//   rho_eps(E) = (1 / (p pi)) Im sum_v G_v(E + i eps),
//
// extrapolated to eps -> 0 across a ladder, plus atoms (point masses) and
// spectral gaps labelled by p * k(E).
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jtree/graph.hpp"
#include "jtree/solver.hpp"

namespace jtree {

struct Atom {
  double lambda = 0.0;
  double mass = 0.0;                  // dk mass = (1/p) sum_v w_v
  std::vector<double> vertex_weights; // w_v = lim eps Im G_v(lambda + i eps)
  double ladder_spread = 0.0;         // disagreement of the two ladder intercepts
  bool resolved = true;
};

struct Gap {
  double left = 0.0;
  double right = 0.0;
  int label = 0;                // nearest integer to p * k(midpoint)
  double ids_arg = 0.0;         // k(midpoint) from the Floquet argument
  double ids_quadrature = 0.0;  // k(midpoint) from the cumulative density
  double residual = 0.0;        // |p * ids_arg - label|
  bool semi_infinite = false;   // below or above the whole spectrum
  bool suspect = false;
};

struct DOSResult {
  int period = 0;
  std::vector<double> energies;  // sorted
  std::vector<double> density;   // absolutely continuous part, >= 0
  std::vector<double> ids;       // k(E) = dk((-inf, E)), atoms included
  std::vector<Atom> atoms;
  std::vector<Atom> unresolved_atoms;
  std::vector<Gap> gaps;
  std::vector<double> epsilon_ladder;  // absolute values used
  std::vector<int> failed_points;      // solver failures (density set to 0)
  std::vector<int> edge_flags;         // extrapolation disagreement
  double density_mass = 0.0;           // trapezoid integral of density
  double grid_step = 0.0;              // spacing before edge refinement

  double atom_mass() const;
  double total_mass() const { return density_mass + atom_mass(); }
  /// Piecewise-linear interpolant of the continuous part plus exact atom jumps.
  /// Left-continuous: an atom at e is not counted in ids_at(e).
  double ids_at(double e) const;
  /// Linear interpolation of the density; 0 outside the grid.
  double density_at(double e) const;
};

struct AtomSearchConfig {
  double atom_threshold = 1e-3;
  double window = 0.0;              // half-width of the refinement bracket
  double diameter = 1.0;            // energy scale for the eps values below
  double weight_eps_relative = 1e-7;
  double ladder_tolerance = 0.1;    // relative intercept spread for "resolved"
  SolverConfig solver;
};

struct DosConfig {
  std::optional<double> e_min;
  std::optional<double> e_max;
  int n_points = 601;
  std::vector<double> eps_relative{1e-3, 5e-4, 2.5e-4};  // times (e_max - e_min)
  std::vector<double> eps_absolute;  // overrides eps_relative when non-empty
  bool detect_atoms = true;
  double atom_threshold = 1e-3;
  double density_floor = 1e-4;
  int refine_factor = 8;   // subdivision of band-edge cells; <= 1 disables
  bool label_gaps = true;
  int workers = 1;
  SolverConfig solver;
};

/// Gershgorin interval padded by 5% on each side.
std::pair<double, double> default_energy_range(const JacobiGraph& jg);

DOSResult dos_grid(const JacobiGraph& jg, const DosConfig& cfg = {});

/// Maximal runs of grid points with density below the floor and no atom,
/// at least three grid steps wide, labelled through ids_via_arg.
std::vector<Gap> find_gaps(const JacobiGraph& jg, const DOSResult& dos,
                           double density_floor = 1e-4,
                           const SolverConfig& solver = {});

/// Per-vertex weights eps Im G_v(lambda + i eps) extrapolated to eps -> 0 by
/// a linear fit on eps in {4, 2, 1} * base_eps.
Atom atom_weights(const JacobiGraph& jg, double lambda, double base_eps,
                  const SolverConfig& solver = {});

/// Refines each candidate by golden-section maximisation of
/// eps Im sum_v G_v / p with shrinking eps, then measures the weights.
/// Returns resolved atoms above threshold first, unresolved ones second.
std::pair<std::vector<Atom>, std::vector<Atom>> find_atoms(
    const JacobiGraph& jg, std::span<const double> candidates,
    const AtomSearchConfig& cfg);

}  // namespace jtree

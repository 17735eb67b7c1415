// Local analysis at an isolated eigenvalue lambda of the tree operator.
//
//   X1     = { v : mu_v({lambda}) > 0 }
//   dX1    = neighbours of X1 outside X1
//   X0     = everything else
//   I      = #X1 - #dX1 - E(lambda),  E(lambda) = edge pairs inside X1
//
// and I = p * dk({lambda}). Near lambda the product form of Phi has a zero
// of order I, assembled from the pole/zero orders of the G and Q factors.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jtree/graph.hpp"
#include "jtree/solver.hpp"

namespace jtree {

struct AomotoConfig {
  double weight_threshold = 1e-4;
  double ambiguity_factor = 10.0;
  double atom_threshold = 1e-3;        // dk mass below which there is no atom
  double weight_eps_relative = 1e-7;   // times the Gershgorin diameter
  double refine_window_relative = 1e-3;
  bool refine_lambda = true;           // polish lambda by find_atoms first
  // Offsets from lambda as fractions of the isolation radius.
  std::vector<double> delta_fractions{1e-2, 3.1622776601683794e-3, 1e-3,
                                      3.1622776601683794e-4, 1e-4};
  double snap_tolerance = 0.1;
  SolverConfig solver;
};

struct OrderTable {
  std::vector<int> G;  // per vertex
  std::vector<int> m;  // per half-edge
  std::vector<int> Q;  // per edge pair
  std::vector<double> G_slope, m_slope, Q_slope;  // unsnapped fits
};

struct AomotoReport {
  double lambda = 0.0;
  bool atom = false;
  std::vector<int> X1, boundary_X1, X0;
  int E_lambda = 0;
  int index = 0;
  int cc_X1 = 0;
  double dk_mass = 0.0;
  double ladder_spread = 0.0;
  std::vector<double> vertex_weights;

  // Filled by analyze().
  double isolation_left = 0.0;   // distance to the spectrum below lambda
  double isolation_right = 0.0;  // and above
  std::optional<OrderTable> orders;
  int phi_order = 0;             // sum_E order(Q) - sum_V order(G)
  std::vector<std::string> order_violations;
  int x0_green_zeros = 0;        // sum of G zero orders over X0
  int outer_q_zeros = 0;         // Q zero orders over edges with no X1 endpoint
  double ids_jump = 0.0;
  double phi_slope = 0.0;
  bool cc_check = true;
};

/// Weights and sets at lambda. Returns atom = false with empty sets when
/// lambda carries no mass. Throws RefusedClassification when a weight lies
/// within ambiguity_factor of the threshold or the weight ladder is not
/// linear (non-isolated behaviour).
AomotoReport classify_sets(const JacobiGraph& jg, double lambda,
                           const AomotoConfig& cfg = {});

/// Distances from lambda to the spectrum on each side, from real-axis solves
/// on an expanding then bisected offset. Throws RefusedClassification if
/// lambda is not isolated.
std::pair<double, double> isolation_radii(const JacobiGraph& jg, double lambda,
                                          const AomotoConfig& cfg = {});

/// Integer orders of G_v, m_e, Q_e at lambda from log-log fits on
/// lambda +- delta. Throws RefusedClassification on a fractional exponent.
OrderTable local_orders(const JacobiGraph& jg, double lambda, double radius,
                        const AomotoConfig& cfg = {});

/// index == cc_X1 - #dX1.
bool cc_cross_check(const AomotoReport& report);

/// Slope of log|Phi(lambda +- delta)| against log delta.
double phi_zero_slope(const JacobiGraph& jg, double lambda, double radius,
                      const AomotoConfig& cfg = {});

/// Full report: sets, isolation, order table with the cancellation audit,
/// IDS jump across lambda and the zero order of Phi.
AomotoReport analyze(const JacobiGraph& jg, double lambda, const AomotoConfig& cfg = {});

}  // namespace jtree

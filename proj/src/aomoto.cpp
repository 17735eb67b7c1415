#include "jtree/aomoto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jtree/errors.hpp"
#include "jtree/floquet.hpp"
#include "jtree/spectral.hpp"

namespace jtree {

namespace {

double diameter_of(const JacobiGraph& jg) {
  const auto [lo, hi] = gershgorin_bounds(jg);
  return std::max(hi - lo, 1e-3);
}

bool is_resolvent(const JacobiGraph& jg, double e, const SolverConfig& solver) {
  try {
    return !solve_m(jg, cplx(e, 0.0), solver).has_pole();
  } catch (const NonConvergence&) {
    return false;
  } catch (const DomainError&) {
    return false;
  }
}

std::vector<double> offsets(double radius, const AomotoConfig& cfg) {
  if (cfg.delta_fractions.size() < 2) {
    throw std::invalid_argument("at least two offsets are needed for an order fit");
  }
  std::vector<double> d;
  for (double f : cfg.delta_fractions) {
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("offset fractions lie in (0, 1)");
    d.push_back(f * radius);
  }
  return d;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

int snap(double s, double tol, const std::string& what) {
  const long k = std::lround(s);
  if (std::abs(s - k) > tol || k < -1 || k > 2) {
    throw RefusedClassification("non-isolated or fractional behavior: " + what +
                                " has local exponent " + std::to_string(s));
  }
  return static_cast<int>(k);
}

// Sides of an edge pair given by its oriented half-edge.
std::pair<int, int> ends(const MultiGraph& g, int e) { return {g.source(e), g.target(e)}; }

}  // namespace

AomotoReport classify_sets(const JacobiGraph& jg, double lambda, const AomotoConfig& cfg) {
  cfg.solver.check();
  if (!(cfg.weight_threshold > 0.0) || !(cfg.ambiguity_factor >= 1.0)) {
    throw std::invalid_argument("weight threshold must be positive, ambiguity factor >= 1");
  }
  const auto& g = jg.graph;
  const int p = jg.period();
  const double diam = diameter_of(jg);

  AomotoReport rep;
  rep.lambda = lambda;
  Atom atom;
  if (cfg.refine_lambda) {
    AtomSearchConfig acfg;
    acfg.atom_threshold = cfg.atom_threshold;
    acfg.window = cfg.refine_window_relative * diam;
    acfg.diameter = diam;
    acfg.weight_eps_relative = cfg.weight_eps_relative;
    acfg.solver = cfg.solver;
    const double cand[] = {lambda};
    auto [res, unres] = find_atoms(jg, cand, acfg);
    if (!res.empty()) {
      atom = res.front();
    } else if (!unres.empty()) {
      throw RefusedClassification("weight ladder at " + std::to_string(lambda) +
                                  " is not linear; eigenvalue not isolated");
    } else {
      atom.mass = 0.0;
      atom.lambda = lambda;
    }
  } else {
    atom = atom_weights(jg, lambda, cfg.weight_eps_relative * diam, cfg.solver);
    if (atom.mass > cfg.atom_threshold &&
        atom.ladder_spread > 0.1 * atom.mass) {
      throw RefusedClassification("weight ladder at " + std::to_string(lambda) +
                                  " is not linear; eigenvalue not isolated");
    }
  }

  if (!(atom.mass > cfg.atom_threshold)) {
    rep.atom = false;
    rep.dk_mass = std::max(0.0, atom.mass);
    rep.vertex_weights = atom.vertex_weights;
    rep.X0.resize(p);
    std::iota(rep.X0.begin(), rep.X0.end(), 0);
    return rep;
  }
  rep.atom = true;
  rep.lambda = atom.lambda;
  rep.dk_mass = atom.mass;
  rep.ladder_spread = atom.ladder_spread;
  rep.vertex_weights = atom.vertex_weights;

  std::vector<char> in_x1(p, 0), in_boundary(p, 0);
  for (int v = 0; v < p; ++v) {
    const double w = atom.vertex_weights[v];
    if (w > cfg.weight_threshold / cfg.ambiguity_factor &&
        w < cfg.weight_threshold * cfg.ambiguity_factor) {
      throw RefusedClassification("weight " + std::to_string(w) + " at vertex " +
                                  std::to_string(v) + " is too close to the threshold");
    }
    in_x1[v] = w > cfg.weight_threshold;
  }
  for (int v = 0; v < p; ++v) {
    if (!in_x1[v]) continue;
    for (int f : g.out_star(v)) {
      if (!in_x1[g.target(f)]) in_boundary[g.target(f)] = 1;
    }
  }
  for (int v = 0; v < p; ++v) {
    if (in_x1[v]) rep.X1.push_back(v);
    else if (in_boundary[v]) rep.boundary_X1.push_back(v);
    else rep.X0.push_back(v);
  }

  // Union-find over edge pairs inside X1.
  std::vector<int> parent(p);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int e : g.edges()) {
    const auto [u, v] = ends(g, e);
    if (in_x1[u] && in_x1[v]) {
      ++rep.E_lambda;
      parent[find(u)] = find(v);
    }
  }
  for (int v : rep.X1) rep.cc_X1 += find(v) == v;
  rep.index = static_cast<int>(rep.X1.size()) - static_cast<int>(rep.boundary_X1.size()) -
              rep.E_lambda;
  rep.cc_check = cc_cross_check(rep);
  return rep;
}

std::pair<double, double> isolation_radii(const JacobiGraph& jg, double lambda,
                                          const AomotoConfig& cfg) {
  const double diam = diameter_of(jg);
  const double start = 1e-6 * diam;
  const double cap = 2.0 * diam;
  auto radius = [&](double sign) {
    if (!is_resolvent(jg, lambda + sign * start, cfg.solver)) {
      throw RefusedClassification("lambda = " + std::to_string(lambda) +
                                  " is not an isolated point of the spectrum");
    }
    double good = start, bad = start;
    while (true) {
      bad = 2.0 * good;
      if (bad > cap) return cap;
      if (!is_resolvent(jg, lambda + sign * bad, cfg.solver)) break;
      good = bad;
    }
    for (int it = 0; it < 40 && bad - good > 1e-9 * diam; ++it) {
      const double mid = 0.5 * (good + bad);
      (is_resolvent(jg, lambda + sign * mid, cfg.solver) ? good : bad) = mid;
    }
    return good;
  };
  return {radius(-1.0), radius(1.0)};
}

OrderTable local_orders(const JacobiGraph& jg, double lambda, double radius,
                        const AomotoConfig& cfg) {
  const auto deltas = offsets(radius, cfg);
  std::vector<MSolution> sols;
  std::vector<double> x;
  for (double d : deltas) {
    for (double s : {-1.0, 1.0}) {
      try {
        sols.push_back(solve_m(jg, cplx(lambda + s * d, 0.0), cfg.solver));
      } catch (const DomainError&) {
        throw RefusedClassification("offset point " + std::to_string(lambda + s * d) +
                                    " is not in the resolvent set");
      }
      x.push_back(std::log(d));
    }
  }
  auto fit = [&](auto get, const std::string& what) {
    std::vector<double> y;
    for (const auto& sol : sols) {
      const double a = std::abs(get(sol));
      y.push_back(std::log(std::max(a, 1e-300)));
    }
    const double s = slope(x, y);
    return std::pair{snap(s, cfg.snap_tolerance, what), s};
  };

  const auto& g = jg.graph;
  OrderTable t;
  for (int v = 0; v < jg.period(); ++v) {
    const auto [k, s] = fit([&](const MSolution& sol) { return sol.G[v]; },
                            "G_" + std::to_string(v));
    t.G.push_back(k);
    t.G_slope.push_back(s);
  }
  for (int f = 0; f < g.num_half_edges(); ++f) {
    const auto [k, s] = fit([&](const MSolution& sol) { return sol.m[f]; },
                            "m_" + std::to_string(f));
    t.m.push_back(k);
    t.m_slope.push_back(s);
  }
  for (int i = 0; i < g.num_edges(); ++i) {
    const auto [k, s] = fit([&](const MSolution& sol) { return sol.Q[i]; },
                            "Q_" + std::to_string(i));
    t.Q.push_back(k);
    t.Q_slope.push_back(s);
  }
  return t;
}

bool cc_cross_check(const AomotoReport& report) {
  return report.index == report.cc_X1 - static_cast<int>(report.boundary_X1.size());
}

double phi_zero_slope(const JacobiGraph& jg, double lambda, double radius,
                      const AomotoConfig& cfg) {
  std::vector<double> x, y;
  for (double d : offsets(radius, cfg)) {
    for (double s : {-1.0, 1.0}) {
      const auto v = phi_product(jg, cplx(lambda + s * d, 0.0), cfg.solver);
      x.push_back(std::log(d));
      y.push_back(std::log(std::abs(v.phi)));
    }
  }
  return slope(x, y);
}

AomotoReport analyze(const JacobiGraph& jg, double lambda, const AomotoConfig& cfg) {
  AomotoReport rep = classify_sets(jg, lambda, cfg);
  if (!rep.atom) return rep;

  const auto [left, right] = isolation_radii(jg, rep.lambda, cfg);
  rep.isolation_left = left;
  rep.isolation_right = right;
  const double radius = std::min(left, right);
  rep.orders = local_orders(jg, rep.lambda, radius, cfg);
  const auto& t = *rep.orders;
  const auto& g = jg.graph;
  const int p = jg.period();

  std::vector<char> in_x1(p, 0), in_boundary(p, 0), in_x0(p, 0);
  for (int v : rep.X1) in_x1[v] = 1;
  for (int v : rep.boundary_X1) in_boundary[v] = 1;
  for (int v : rep.X0) in_x0[v] = 1;

  int sum_q = 0, sum_g = 0;
  for (int v = 0; v < p; ++v) {
    sum_g += t.G[v];
    if ((t.G[v] == -1) != bool(in_x1[v])) {
      rep.order_violations.push_back("G_" + std::to_string(v) + " has order " +
                                     std::to_string(t.G[v]) + (in_x1[v] ? " in X1" : " outside X1"));
    }
    if (in_boundary[v] && t.G[v] != 1) {
      rep.order_violations.push_back("G_" + std::to_string(v) + " on the boundary has order " +
                                     std::to_string(t.G[v]));
    }
    if (in_x0[v]) rep.x0_green_zeros += std::max(0, t.G[v]);
  }
  for (int i = 0; i < g.num_edges(); ++i) {
    sum_q += t.Q[i];
    const auto [u, v] = ends(g, g.edges()[i]);
    const bool inside = in_x1[u] && in_x1[v];
    if ((t.Q[i] == -1) != inside) {
      rep.order_violations.push_back("Q_" + std::to_string(i) + " has order " +
                                     std::to_string(t.Q[i]));
    }
    if (!in_x1[u] && !in_x1[v]) rep.outer_q_zeros += std::max(0, t.Q[i]);
  }
  rep.phi_order = sum_q - sum_g;
  if (rep.phi_order != rep.index) {
    rep.order_violations.push_back("zero order of Phi is " + std::to_string(rep.phi_order) +
                                   ", index is " + std::to_string(rep.index));
  }
  if (rep.x0_green_zeros != rep.outer_q_zeros) {
    rep.order_violations.push_back("X0 Green's zeros " + std::to_string(rep.x0_green_zeros) +
                                   " do not cancel outer Q zeros " +
                                   std::to_string(rep.outer_q_zeros));
  }

  IdsConfig icfg;
  icfg.solver = cfg.solver;
  const double d = 0.5 * radius;
  rep.ids_jump = ids_via_arg(jg, rep.lambda + d, icfg).ids -
                 ids_via_arg(jg, rep.lambda - d, icfg).ids;
  rep.phi_slope = phi_zero_slope(jg, rep.lambda, radius, cfg);
  return rep;
}

}  // namespace jtree

#include "jtree/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "jtree/errors.hpp"

namespace jtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNewtonMaxSteps = 60;

class Recursion {
 public:
  explicit Recursion(const JacobiGraph& jg) {
    const auto& g = jg.graph;
    const int h = g.num_half_edges();
    children_.resize(h);
    a2_.resize(h);
    b_target_.resize(h);
    for (int f = 0; f < h; ++f) {
      a2_[f] = jg.params.a[f] * jg.params.a[f];
      const int v = g.target(f);
      b_target_[f] = jg.params.b[v];
      for (int c : g.out_star(v)) {
        if (c != g.reversal(f)) children_[f].push_back(c);
      }
    }
  }

  int size() const { return static_cast<int>(children_.size()); }

  cplx denominator(int f, cplx z, std::span<const cplx> m) const {
    cplx d = -z + b_target_[f];
    for (int c : children_[f]) d -= a2_[c] * m[c];
    return d;
  }

  double residual(cplx z, std::span<const cplx> m) const {
    double r = 0.0;
    for (int f = 0; f < size(); ++f) {
      const double rf = std::abs(m[f] * denominator(f, z, m) - 1.0);
      if (!std::isfinite(rf)) return kInf;
      r = std::max(r, rf);
    }
    return r;
  }

  // Damped iteration m <- (1-d) m + d F(m); d halves when the residual grows.
  bool fixed_point(cplx z, std::vector<cplx>& m, double damping, double tol,
                   int max_iter, int& iters, double& res) const {
    std::vector<cplx> next(m.size());
    double prev = residual(z, m);
    for (int it = 0; it < max_iter; ++it) {
      if (prev < tol) {
        res = prev;
        return true;
      }
      for (int f = 0; f < size(); ++f) {
        next[f] = (1.0 - damping) * m[f] + damping / denominator(f, z, m);
      }
      m.swap(next);
      ++iters;
      const double r = residual(z, m);
      if (!std::isfinite(r)) {
        res = r;
        return false;
      }
      if (r > prev && damping > 1.0 / 1024.0) damping *= 0.5;
      prev = r;
    }
    res = prev;
    return prev < tol;
  }

  // Newton on R_f(m) = m_f D_f(m) - 1, with one extra step after reaching tol.
  bool newton(cplx z, std::vector<cplx>& m, double tol, int& iters,
              double& res) const {
    const int h = size();
    Eigen::MatrixXcd jac(h, h);
    Eigen::VectorXcd rhs(h);
    std::vector<cplx> d(h);
    bool polished = false;
    double best = kInf;
    for (int step = 0; step < kNewtonMaxSteps; ++step) {
      double r = 0.0;
      for (int f = 0; f < h; ++f) {
        d[f] = denominator(f, z, m);
        const cplx rf = m[f] * d[f] - 1.0;
        rhs(f) = -rf;
        r = std::max(r, std::abs(rf));
      }
      if (!std::isfinite(r) || r > 1e8) break;
      best = std::min(best, r);
      if (r < tol) {
        if (polished) {
          res = r;
          return true;
        }
        polished = true;
      }
      jac.setZero();
      for (int f = 0; f < h; ++f) {
        jac(f, f) += d[f];
        for (int c : children_[f]) jac(f, c) -= m[f] * a2_[c];
      }
      const Eigen::VectorXcd delta = jac.partialPivLu().solve(rhs);
      for (int f = 0; f < h; ++f) m[f] += delta(f);
      ++iters;
    }
    res = residual(z, m);
    return res < tol;
  }

 private:
  std::vector<std::vector<int>> children_;
  std::vector<double> a2_;
  std::vector<double> b_target_;
};

bool herglotz(std::span<const cplx> m) {
  return std::all_of(m.begin(), m.end(), [](cplx x) { return x.imag() > 0.0; });
}

double scale_of(const JacobiGraph& jg) { return std::max(norm_bound(jg), 1e-3); }

MSolution assemble(const JacobiGraph& jg, cplx z, std::vector<cplx> m,
                   double residual, int iterations) {
  MSolution s;
  s.z = z;
  auto green = green_from_m(jg, m, z);
  auto q = q_from_m(jg, m, green.values);
  s.m = std::move(m);
  s.G = std::move(green.values);
  s.G_pole = std::move(green.pole);
  s.Q = std::move(q.values);
  s.Q_pole = std::move(q.pole);
  s.q_discrepancy = q.discrepancy;
  s.residual = residual;
  s.iterations = iterations;
  return s;
}

// Converged solution at Re z + i*eta_start by the contracting fixed-point map.
std::vector<cplx> anchor(const Recursion& rec, double re, double eta_start,
                         const SolverConfig& cfg, int& iters) {
  const cplx z0(re, eta_start);
  std::vector<cplx> m(rec.size(), cfg.initial_value.value_or(-1.0 / z0));
  double res = 0.0;
  if (!rec.fixed_point(z0, m, cfg.damping, cfg.tolerance, cfg.max_iterations,
                       iters, res)) {
    throw NonConvergence("fixed-point iteration did not converge at Im z = " +
                             std::to_string(eta_start),
                         res);
  }
  return m;
}

// Newton continuation along Im z from eta_from down to eta_to > 0.
void descend(const Recursion& rec, double re, std::vector<cplx>& m,
             double eta_from, double eta_to, double tol, int& iters) {
  double eta = eta_from;
  double factor = 0.5;
  while (eta > eta_to) {
    const double next = std::max(eta * factor, eta_to);
    std::vector<cplx> trial = m;
    double res = 0.0;
    if (rec.newton(cplx(re, next), trial, tol, iters, res) && herglotz(trial)) {
      m.swap(trial);
      eta = next;
      factor = std::max(0.125, factor * factor);
    } else {
      factor = std::sqrt(factor);
      if (factor > 0.9999) {
        throw NonConvergence("continuation stalled at Im z = " + std::to_string(eta),
                             res);
      }
    }
  }
}

}  // namespace

void SolverConfig::check() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1]");
  }
}

bool MSolution::has_pole() const {
  return std::any_of(G_pole.begin(), G_pole.end(), [](char c) { return c; }) ||
         std::any_of(Q_pole.begin(), Q_pole.end(), [](char c) { return c; });
}

MSolution solve_m(const JacobiGraph& jg, cplx z, const SolverConfig& cfg) {
  cfg.check();
  if (!(z.imag() >= 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("solve_m requires Im z >= 0");
  }
  const Recursion rec(jg);
  const double scale = scale_of(jg);
  const auto [lo, hi] = gershgorin_bounds(jg);
  int iters = 0;

  // Far from the spectrum the plain iteration is a contraction.
  const bool far_real = z.imag() == 0.0 && (z.real() < lo - 0.5 * scale ||
                                            z.real() > hi + 0.5 * scale);
  if (z.imag() >= 2.0 * scale || far_real) {
    std::vector<cplx> m(rec.size(), cfg.initial_value.value_or(-1.0 / z));
    double res = 0.0;
    const int cap = far_real ? std::min(cfg.max_iterations, 5000) : cfg.max_iterations;
    if (rec.fixed_point(z, m, cfg.damping, cfg.tolerance, cap, iters, res)) {
      rec.newton(z, m, cfg.tolerance, iters, res);
      if (z.imag() == 0.0 || herglotz(m)) {
        if (z.imag() == 0.0) {
          for (auto& x : m) x = cplx(x.real(), 0.0);
        }
        return assemble(jg, z, std::move(m), res, iters);
      }
    }
  }

  const double eta_start = std::max(z.imag(), 2.0 * scale);
  std::vector<cplx> m = anchor(rec, z.real(), eta_start, cfg, iters);
  const double eta_floor = z.imag() > 0.0 ? z.imag() : 1e-10 * scale;
  descend(rec, z.real(), m, eta_start, eta_floor, cfg.tolerance, iters);

  double res = 0.0;
  if (z.imag() > 0.0) {
    rec.newton(z, m, cfg.tolerance, iters, res);
    if (!(res < cfg.tolerance) || !herglotz(m)) {
      throw NonConvergence("Newton polish failed at z", res);
    }
    return assemble(jg, z, std::move(m), res, iters);
  }

  // Real axis: limit from the upper half-plane; must be real there.
  if (!rec.newton(z, m, cfg.tolerance, iters, res)) {
    throw NonConvergence("no real-axis limit at E = " + std::to_string(z.real()) +
                             " (pole or spectrum)",
                         res);
  }
  for (const auto& x : m) {
    if (std::abs(x.imag()) > 1e-8 * std::max(1.0, std::abs(x))) {
      throw DomainError("E = " + std::to_string(z.real()) +
                        " is not in the resolvent set");
    }
  }
  for (auto& x : m) x = cplx(x.real(), 0.0);
  res = rec.residual(z, m);
  return assemble(jg, z, std::move(m), res, iters);
}

std::optional<MSolution> solve_m_from(const JacobiGraph& jg, cplx z,
                                      std::span<const cplx> guess,
                                      const SolverConfig& cfg) {
  if (!(z.imag() >= 0.0)) return std::nullopt;
  const Recursion rec(jg);
  if (static_cast<int>(guess.size()) != rec.size()) {
    throw std::invalid_argument("guess has the wrong number of half-edges");
  }
  std::vector<cplx> m(guess.begin(), guess.end());
  int iters = 0;
  double res = 0.0;
  if (!rec.newton(z, m, cfg.tolerance, iters, res)) return std::nullopt;
  if (z.imag() > 0.0) {
    if (!herglotz(m)) return std::nullopt;
  } else {
    for (const auto& x : m) {
      if (std::abs(x.imag()) > 1e-8 * std::max(1.0, std::abs(x))) return std::nullopt;
    }
    for (auto& x : m) x = cplx(x.real(), 0.0);
    res = rec.residual(z, m);
  }
  return assemble(jg, z, std::move(m), res, iters);
}

std::vector<MSolution> solve_ladder(const JacobiGraph& jg, double energy,
                                    std::span<const double> eps_ladder,
                                    const SolverConfig& cfg) {
  cfg.check();
  const Recursion rec(jg);
  const double scale = scale_of(jg);
  std::vector<MSolution> out;
  out.reserve(eps_ladder.size());
  int iters = 0;
  double eta = std::max(2.0 * scale, eps_ladder.empty() ? 0.0 : eps_ladder.front());
  std::vector<cplx> m = anchor(rec, energy, eta, cfg, iters);
  for (double eps : eps_ladder) {
    if (!(eps > 0.0)) throw DomainError("epsilon ladder entries must be positive");
    if (eps > eta) {
      // Ladder not decreasing: restart from a fresh anchor.
      eta = std::max(2.0 * scale, eps);
      m = anchor(rec, energy, eta, cfg, iters);
    }
    descend(rec, energy, m, eta, eps, cfg.tolerance, iters);
    eta = eps;
    double res = 0.0;
    const cplx z(energy, eps);
    rec.newton(z, m, cfg.tolerance, iters, res);
    if (!(res < cfg.tolerance) || !herglotz(m)) {
      throw NonConvergence("ladder solve failed", res);
    }
    out.push_back(assemble(jg, z, m, res, iters));
  }
  return out;
}

double fixed_point_residual(const JacobiGraph& jg, cplx z, std::span<const cplx> m) {
  return Recursion(jg).residual(z, m);
}

GreenValues green_from_m(const JacobiGraph& jg, std::span<const cplx> m, cplx z) {
  const int p = jg.period();
  GreenValues out;
  out.values.resize(p);
  out.pole.assign(p, 0);
  for (int u = 0; u < p; ++u) {
    cplx d = -z + jg.params.b[u];
    double scale = std::abs(z) + std::abs(jg.params.b[u]);
    for (int f : jg.graph.out_star(u)) {
      const double a2 = jg.params.a[f] * jg.params.a[f];
      d -= a2 * m[f];
      scale += a2 * std::abs(m[f]);
    }
    if (std::abs(d) <= 1e-14 * std::max(scale, 1.0) || !std::isfinite(std::abs(d))) {
      out.pole[u] = 1;
      out.values[u] = cplx(kInf, 0.0);
    } else {
      out.values[u] = 1.0 / d;
    }
  }
  return out;
}

QValues q_from_m(const JacobiGraph& jg, std::span<const cplx> m,
                 std::span<const cplx> G) {
  const auto& g = jg.graph;
  QValues out;
  out.values.resize(g.num_edges());
  out.pole.assign(g.num_edges(), 0);
  for (int i = 0; i < g.num_edges(); ++i) {
    const int e = g.edges()[i];
    const int r = g.reversal(e);
    const double a2 = jg.params.a[e] * jg.params.a[e];
    const cplx den = 1.0 - a2 * m[e] * m[r];
    if (std::abs(den) < 1e-14 || !std::isfinite(std::abs(den))) {
      out.pole[i] = 1;
      out.values[i] = cplx(kInf, 0.0);
      continue;
    }
    const cplx q1 = 1.0 / den;
    out.values[i] = q1;
    const cplx gs = G[g.source(e)];
    const cplx gt = G[g.target(e)];
    if (std::abs(m[r]) < 1e-300 || std::abs(m[e]) < 1e-300 ||
        !std::isfinite(std::abs(gs)) || !std::isfinite(std::abs(gt))) {
      continue;
    }
    const cplx q2 = gs / m[r];
    const cplx q3 = gt / m[e];
    const double spread =
        std::max({std::abs(q1 - q2), std::abs(q1 - q3), std::abs(q2 - q3)}) /
        std::abs(q1);
    out.discrepancy = std::max(out.discrepancy, spread);
  }
  return out;
}

}  // namespace jtree

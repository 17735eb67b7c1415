#include "jtree/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "jtree/errors.hpp"

namespace jtree {

namespace {

constexpr double kPi = std::numbers::pi;

// Argument of a value of a Herglotz function (closed upper half-plane).
double herglotz_arg(cplx x) {
  if (x.imag() > 0.0) return std::arg(x);
  return x.real() >= 0.0 ? 0.0 : kPi;
}

cplx herglotz_log(cplx x) { return {std::log(std::abs(x)), herglotz_arg(x)}; }

// Q_e for every edge pair followed by G_u for every vertex.
std::vector<cplx> factors(const MSolution& sol) {
  std::vector<cplx> f(sol.Q);
  f.insert(f.end(), sol.G.begin(), sol.G.end());
  return f;
}

}  // namespace

FloquetValue phi_product(const JacobiGraph& jg, const MSolution& sol) {
  if (sol.z.imag() < 0.0) throw DomainError("phi_product requires Im z >= 0");
  if (sol.has_pole()) throw DomainError("a Green's or Q factor has a pole at z");
  const auto& g = jg.graph;
  cplx phi = 1.0;
  cplx log_phi = 0.0;
  for (int i = 0; i < g.num_edges(); ++i) {
    const int e = g.edges()[i];
    const cplx gs = sol.G[g.source(e)];
    const cplx mr = sol.m[g.reversal(e)];
    if (std::abs(gs) == 0.0 || std::abs(mr) == 0.0) {
      throw DomainError("a factor of the product formula vanishes at z");
    }
    phi *= sol.Q[i];
    log_phi += herglotz_log(gs) - herglotz_log(mr);
  }
  for (const cplx& gu : sol.G) {
    if (std::abs(gu) == 0.0) throw DomainError("a Green's function vanishes at z");
    phi /= gu;
    log_phi -= herglotz_log(gu);
  }
  return {sol.z, phi, log_phi, PhiSource::product};
}

FloquetValue phi_product(const JacobiGraph& jg, cplx z, const SolverConfig& cfg) {
  return phi_product(jg, solve_m(jg, z, cfg));
}

FloquetValue phi_integral(const DOSResult& dos, cplx z, double mass_tolerance,
                          double density_floor) {
  if (z.imag() < 0.0) throw DomainError("phi_integral requires Im z >= 0");
  const double mass = dos.total_mass();
  if (std::abs(mass - 1.0) > mass_tolerance) {
    throw DomainError("density of states carries mass " + std::to_string(mass) +
                      ", not 1");
  }
  const bool real = z.imag() == 0.0;
  if (real && dos.density_at(z.real()) > density_floor) {
    throw DomainError("z lies in the continuous spectrum");
  }
  // Boundary value from the upper half-plane: arg(t - x) = -pi for t < x.
  auto log_shift = [&](double t) -> cplx {
    if (!real) return std::log(cplx(t) - z);
    const double d = t - z.real();
    return {std::log(std::abs(d)), d < 0.0 ? -kPi : 0.0};
  };
  cplx integral = 0.0;
  const auto& e = dos.energies;
  const auto& rho = dos.density;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    const double w = e[i + 1] - e[i];
    cplx left = rho[i] > 0.0 ? rho[i] * log_shift(e[i]) : cplx(0.0);
    cplx right = rho[i + 1] > 0.0 ? rho[i + 1] * log_shift(e[i + 1]) : cplx(0.0);
    integral += 0.5 * w * (left + right);
  }
  for (const auto& atom : dos.atoms) {
    if (real && atom.lambda == z.real()) throw DomainError("z is an atom of dk");
    integral += atom.mass * log_shift(atom.lambda);
  }
  const cplx log_phi = double(dos.period) * integral;
  return {z, std::exp(log_phi), log_phi, PhiSource::integral};
}

IdsResult ids_via_arg(const JacobiGraph& jg, double e0, const IdsConfig& cfg) {
  const auto [lo, hi] = gershgorin_bounds(jg);
  const double diam = std::max(hi - lo, 1e-3);
  const double height = cfg.contour_height_relative * diam;
  const double x_start = lo - 0.1 * diam;
  const int p = jg.period();

  MSolution sol = solve_m(jg, cplx(x_start, 0.0), cfg.solver);
  std::vector<cplx> vals = factors(sol);
  std::vector<double> acc(vals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) acc[k] = std::arg(vals[k]);

  IdsResult out;
  out.energy = e0;

  auto walk = [&](cplx from, cplx to) {
    const double length = std::abs(to - from);
    if (length == 0.0) return;
    double t = 0.0;
    double dt = std::min(1.0, height / length);
    const double dt_min = cfg.min_step_relative * diam / length;
    while (t < 1.0) {
      const double t_next = std::min(1.0, t + dt);
      const cplx z = from + (to - from) * t_next;
      std::optional<MSolution> next = solve_m_from(jg, z, sol.m, cfg.solver);
      if (!next) {
        try {
          next = solve_m(jg, z, cfg.solver);
        } catch (const NonConvergence&) {
          next.reset();
        }
      }
      bool ok = next.has_value() && !next->has_pole();
      std::vector<cplx> nv;
      double worst = 0.0;
      if (ok) {
        nv = factors(*next);
        for (std::size_t k = 0; k < nv.size(); ++k) {
          worst = std::max(worst, std::abs(std::arg(nv[k] / vals[k])));
        }
        ok = worst <= cfg.max_arg_step;
      }
      if (!ok) {
        dt *= 0.5;
        if (dt < dt_min) {
          throw NonConvergence("argument tracking step underflow near z = " +
                                   std::to_string(z.real()) + "+" +
                                   std::to_string(z.imag()) + "i",
                               worst);
        }
        continue;
      }
      for (std::size_t k = 0; k < nv.size(); ++k) acc[k] += std::arg(nv[k] / vals[k]);
      vals = std::move(nv);
      sol = std::move(*next);
      t = t_next;
      ++out.steps;
      if (worst < 0.25 * cfg.max_arg_step) dt *= 2.0;
    }
  };

  walk(cplx(x_start, 0.0), cplx(x_start, height));
  walk(cplx(x_start, height), cplx(e0, height));
  // A half-tree m may have a pole in a gap, where Phi itself is finite; the
  // descent then stops just above the axis instead of at E0.
  const double eta_end = 1e-10 * diam;
  walk(cplx(e0, height), cplx(e0, eta_end));
  double trace = 0.0;
  for (const cplx& g : sol.G) trace += g.imag();
  if (trace / (p * kPi) > 1e-4) {
    throw DomainError("E0 = " + std::to_string(e0) + " is not in a gap");
  }
  bool on_axis = false;
  try {
    const MSolution at_e0 = solve_m(jg, cplx(e0, 0.0), cfg.solver);
    on_axis = !at_e0.has_pole();
  } catch (const NonConvergence&) {
  } catch (const DomainError&) {
  }
  if (on_axis) walk(cplx(e0, eta_end), cplx(e0, 0.0));

  const int ne = jg.graph.num_edges();
  double im_log = 0.0;
  for (int k = 0; k < ne; ++k) im_log += acc[k];
  for (int u = 0; u < p; ++u) im_log -= acc[ne + u];
  cplx phi = 1.0;
  for (int k = 0; k < ne; ++k) phi *= vals[k];
  for (int u = 0; u < p; ++u) phi /= vals[ne + u];

  out.im_log_phi = im_log;
  out.ids = -im_log / (p * kPi);
  out.label = static_cast<int>(std::lround(p * out.ids));
  out.residual = std::abs(p * out.ids - out.label);
  out.reality = std::abs(phi.imag()) / std::abs(phi);
  return out;
}

LogDerivativeReport log_derivative_check(const JacobiGraph& jg, cplx z, double h,
                                         const SolverConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("difference step must be positive");
  const MSolution mid = solve_m(jg, z, cfg);
  const MSolution plus = solve_m(jg, z + h, cfg);
  const MSolution minus = solve_m(jg, z - h, cfg);

  LogDerivativeReport r;
  r.z = z;
  r.dlog_phi =
      (phi_product(jg, plus).log_phi - phi_product(jg, minus).log_phi) / (2.0 * h);
  r.minus_sum_green = 0.0;
  for (const cplx& g : mid.G) r.minus_sum_green -= g;
  r.residual_phi = std::abs(r.dlog_phi - r.minus_sum_green);

  r.dlog_q_sum = 0.0;
  for (std::size_t i = 0; i < mid.Q.size(); ++i) {
    r.dlog_q_sum += std::log(plus.Q[i] / minus.Q[i]) / (2.0 * h);
  }
  r.green_side = 0.0;
  for (std::size_t u = 0; u < mid.G.size(); ++u) {
    r.green_side += -mid.G[u] + std::log(plus.G[u] / minus.G[u]) / (2.0 * h);
  }
  r.residual_q = std::abs(r.dlog_q_sum - r.green_side);
  return r;
}

}  // namespace jtree

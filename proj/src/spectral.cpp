#include "jtree/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "jtree/errors.hpp"
#include "jtree/floquet.hpp"

namespace jtree {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEdgeMass = 1e-5;
constexpr double kMinCell = 1e-7;  // relative to the range diameter

struct PointEval {
  std::vector<double> im_trace;  // Im sum_v G_v per ladder entry
  bool ok = true;
  bool resolvent = false;        // the real-axis limit exists and is finite
};

PointEval evaluate_point(const JacobiGraph& jg, double e, std::span<const double> base,
                         double scale, const SolverConfig& solver) {
  std::vector<double> ladder(base.begin(), base.end());
  for (double& x : ladder) x *= scale;
  PointEval out;
  try {
    for (const auto& sol : solve_ladder(jg, e, ladder, solver)) {
      double s = 0.0;
      for (const cplx& g : sol.G) s += g.imag();
      out.im_trace.push_back(s);
    }
  } catch (const NonConvergence&) {
    out.ok = false;
  } catch (const DomainError&) {
    out.ok = false;
  }
  if (!out.ok) {
    out.im_trace.assign(ladder.size(), 0.0);
    return out;
  }
  try {
    out.resolvent = !solve_m(jg, cplx(e, 0.0), solver).has_pole();
  } catch (const NonConvergence&) {
  } catch (const DomainError&) {
  }
  return out;
}

// Point i uses the ladder multiplied by scales[i].
std::vector<PointEval> evaluate_all(const JacobiGraph& jg, const std::vector<double>& es,
                                    const std::vector<double>& scales,
                                    std::span<const double> ladder,
                                    const SolverConfig& solver, int workers) {
  std::vector<PointEval> out(es.size());
  const int n = static_cast<int>(es.size());
  const int w = std::clamp(workers, 1, std::max(1, n));
  auto run = [&](int i) { out[i] = evaluate_point(jg, es[i], ladder, scales[i], solver); };
  if (w == 1) {
    for (int i = 0; i < n; ++i) run(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / w);
    const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / w);
    pool.emplace_back([&, begin, end] {
      for (int i = begin; i < end; ++i) run(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

// Intercept at eps = 0 of the line through (ea, ya) and (eb, yb).
double intercept(double ea, double ya, double eb, double yb) {
  return yb - eb * (ya - yb) / (ea - eb);
}

double lorentz(double e, double lambda, double eps) {
  const double d = e - lambda;
  return eps / (kPi * (d * d + eps * eps));
}

struct Extrapolated {
  double value = 0.0;
  bool disagreement = false;
};

// ladder holds the density ladder only (no scan entry); im_trace matches it.
Extrapolated extrapolate(int p, double e, std::span<const double> ladder,
                         std::span<const double> im_trace, const std::vector<Atom>& atoms,
                         double floor) {
  const std::size_t k = ladder.size();
  std::vector<double> r(k);
  for (std::size_t j = 0; j < k; ++j) {
    r[j] = im_trace[j] / (p * kPi);
    for (const auto& a : atoms) r[j] -= a.mass * lorentz(e, a.lambda, ladder[j]);
  }
  Extrapolated out;
  if (k == 1) {
    out.value = r[0];
  } else {
    out.value = intercept(ladder[k - 2], r[k - 2], ladder[k - 1], r[k - 1]);
    if (k >= 3) {
      const double alt = intercept(ladder[k - 3], r[k - 3], ladder[k - 2], r[k - 2]);
      out.disagreement = std::abs(alt - out.value) > std::max(0.05 * out.value, floor);
    }
  }
  return out;
}

}  // namespace

double DOSResult::atom_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass;
  return s;
}

double DOSResult::ids_at(double e) const {
  double cont = 0.0;
  if (!energies.empty() && e > energies.front()) {
    if (e >= energies.back()) {
      cont = density_mass;
    } else {
      const auto it = std::upper_bound(energies.begin(), energies.end(), e);
      const std::size_t i = static_cast<std::size_t>(it - energies.begin()) - 1;
      const double h = e - energies[i];
      const double slope = (density[i + 1] - density[i]) / (energies[i + 1] - energies[i]);
      // Continuous part of ids at energies[i] excludes the atoms counted there.
      const double tol = 1e-12 * (energies.back() - energies.front());
      double base = ids[i];
      for (const auto& a : atoms) {
        if (a.lambda < energies[i] - tol) base -= a.mass;
      }
      cont = base + h * density[i] + 0.5 * h * h * slope;
    }
  }
  for (const auto& a : atoms) {
    if (a.lambda < e) cont += a.mass;
  }
  return cont;
}

double DOSResult::density_at(double e) const {
  if (energies.empty() || e < energies.front() || e > energies.back()) return 0.0;
  const auto it = std::upper_bound(energies.begin(), energies.end(), e);
  if (it == energies.end()) return density.back();
  const std::size_t i = static_cast<std::size_t>(it - energies.begin()) - 1;
  const double t = (e - energies[i]) / (energies[i + 1] - energies[i]);
  return (1.0 - t) * density[i] + t * density[i + 1];
}

std::pair<double, double> default_energy_range(const JacobiGraph& jg) {
  auto [lo, hi] = gershgorin_bounds(jg);
  const double pad = 0.05 * std::max(hi - lo, 1e-3);
  return {lo - pad, hi + pad};
}

Atom atom_weights(const JacobiGraph& jg, double lambda, double base_eps,
                  const SolverConfig& solver) {
  if (!(base_eps > 0.0)) throw std::invalid_argument("atom ladder epsilon must be positive");
  const double ladder[] = {4.0 * base_eps, 2.0 * base_eps, base_eps};
  const auto sols = solve_ladder(jg, lambda, ladder, solver);
  const int p = jg.period();
  Atom atom;
  atom.lambda = lambda;
  atom.vertex_weights.resize(p);
  double coarse = 0.0, fine = 0.0;
  for (int v = 0; v < p; ++v) {
    double y[3];
    for (int k = 0; k < 3; ++k) y[k] = ladder[k] * sols[k].G[v].imag();
    // Least-squares line through the three points, evaluated at eps = 0.
    double mx = 0.0, my = 0.0;
    for (int k = 0; k < 3; ++k) {
      mx += ladder[k] / 3.0;
      my += y[k] / 3.0;
    }
    double sxy = 0.0, sxx = 0.0;
    for (int k = 0; k < 3; ++k) {
      sxy += (ladder[k] - mx) * (y[k] - my);
      sxx += (ladder[k] - mx) * (ladder[k] - mx);
    }
    atom.vertex_weights[v] = my - mx * sxy / sxx;
    coarse += intercept(ladder[0], y[0], ladder[1], y[1]);
    fine += intercept(ladder[1], y[1], ladder[2], y[2]);
  }
  double total = 0.0;
  for (double w : atom.vertex_weights) total += w;
  atom.mass = total / p;
  atom.ladder_spread = std::abs(coarse - fine) / p;
  return atom;
}

std::pair<std::vector<Atom>, std::vector<Atom>> find_atoms(
    const JacobiGraph& jg, std::span<const double> candidates, const AtomSearchConfig& cfg) {
  const int p = jg.period();
  const double diam = cfg.diameter;
  const double eps_final = cfg.weight_eps_relative * diam;
  auto score = [&](double e, double eps) {
    try {
      const auto sol = solve_m(jg, cplx(e, eps), cfg.solver);
      double s = 0.0;
      for (const cplx& g : sol.G) s += g.imag();
      return eps * s / p;
    } catch (const NonConvergence&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  constexpr double kGolden = 0.6180339887498949;

  std::vector<Atom> resolved, unresolved;
  for (double c : candidates) {
    double window = cfg.window > 0.0 ? cfg.window : 1e-3 * diam;
    double eps = window;
    double lambda = c;
    while (eps > 10.0 * eps_final) {
      double l = lambda - window, r = lambda + window;
      double x1 = r - kGolden * (r - l), x2 = l + kGolden * (r - l);
      double f1 = score(x1, eps), f2 = score(x2, eps);
      while (r - l > 1e-3 * eps) {
        if (f1 < f2) {
          l = x1;
          x1 = x2;
          f1 = f2;
          x2 = l + kGolden * (r - l);
          f2 = score(x2, eps);
        } else {
          r = x2;
          x2 = x1;
          f2 = f1;
          x1 = r - kGolden * (r - l);
          f1 = score(x1, eps);
        }
      }
      lambda = 0.5 * (l + r);
      window = 3.0 * eps;
      eps /= 10.0;
    }
    Atom atom;
    try {
      atom = atom_weights(jg, lambda, eps_final, cfg.solver);
    } catch (const NonConvergence&) {
      continue;
    }
    if (atom.mass <= cfg.atom_threshold) continue;
    atom.resolved = atom.ladder_spread <= cfg.ladder_tolerance * atom.mass;
    (atom.resolved ? resolved : unresolved).push_back(std::move(atom));
  }

  auto dedupe = [&](std::vector<Atom>& v) {
    std::sort(v.begin(), v.end(),
              [](const Atom& a, const Atom& b) { return a.lambda < b.lambda; });
    std::vector<Atom> out;
    for (auto& a : v) {
      if (!out.empty() && std::abs(a.lambda - out.back().lambda) <= 1e-6 * diam) {
        if (a.mass > out.back().mass) out.back() = std::move(a);
      } else {
        out.push_back(std::move(a));
      }
    }
    v = std::move(out);
  };
  dedupe(resolved);
  dedupe(unresolved);
  return {std::move(resolved), std::move(unresolved)};
}

DOSResult dos_grid(const JacobiGraph& jg, const DosConfig& cfg) {
  cfg.solver.check();
  if (cfg.n_points < 3) throw std::invalid_argument("n_points must be at least 3");
  const auto [dlo, dhi] = default_energy_range(jg);
  const double e_min = cfg.e_min.value_or(dlo);
  const double e_max = cfg.e_max.value_or(dhi);
  if (!(e_max > e_min)) throw std::invalid_argument("energy range is empty");
  const double diam = e_max - e_min;
  const int n = cfg.n_points;
  const double h = diam / (n - 1);
  const int p = jg.period();

  std::vector<double> ladder =
      cfg.eps_absolute.empty() ? cfg.eps_relative : cfg.eps_absolute;
  if (ladder.empty()) throw std::invalid_argument("epsilon ladder is empty");
  if (cfg.eps_absolute.empty()) {
    for (double& e : ladder) e *= diam;
  }
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  if (ladder.back() <= 0.0) throw std::invalid_argument("epsilon values must be positive");
  if (std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end()) {
    throw std::invalid_argument("epsilon values must be distinct");
  }

  // Atom scan uses eps at least one grid step so a narrow peak is not missed.
  const double scan_eps = std::max(h, ladder.front());
  const bool extra_scan = cfg.detect_atoms && scan_eps > ladder.front() * (1.0 + 1e-12);
  std::vector<double> full = ladder;
  if (extra_scan) full.insert(full.begin(), scan_eps);
  const std::size_t off = extra_scan ? 1 : 0;

  DOSResult out;
  out.period = p;
  out.epsilon_ladder = ladder;
  out.grid_step = h;

  std::vector<double> es(n);
  for (int i = 0; i < n; ++i) es[i] = e_min + diam * i / (n - 1);
  es.back() = e_max;
  const auto evals =
      evaluate_all(jg, es, std::vector<double>(n, 1.0), full, cfg.solver, cfg.workers);

  if (cfg.detect_atoms) {
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) s[i] = scan_eps * evals[i].im_trace[0] / p;
    std::vector<double> cands;
    for (int i = 0; i < n; ++i) {
      if (!evals[i].ok || s[i] <= cfg.atom_threshold) continue;
      const bool left_ok = i == 0 || s[i] >= s[i - 1];
      const bool right_ok = i == n - 1 || s[i] > s[i + 1];
      if (left_ok && right_ok) cands.push_back(es[i]);
    }
    AtomSearchConfig acfg;
    acfg.atom_threshold = cfg.atom_threshold;
    acfg.window = 1.5 * h;
    acfg.diameter = diam;
    acfg.solver = cfg.solver;
    auto [res, unres] = find_atoms(jg, cands, acfg);
    out.atoms = std::move(res);
    out.unresolved_atoms = std::move(unres);
  }

  struct Row {
    double e;
    double rho;
    bool failed;
    bool flagged;
  };
  std::vector<Row> rows;
  auto push_rows = [&](const std::vector<double>& xs, const std::vector<double>& scales,
                       const std::vector<PointEval>& ev, std::size_t skip) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Row row{xs[i], 0.0, !ev[i].ok, false};
      if (ev[i].ok && !ev[i].resolvent) {
        std::vector<double> local = ladder;
        for (double& x : local) x *= scales[i];
        const auto x = extrapolate(
            p, xs[i], local,
            std::span<const double>(ev[i].im_trace).subspan(skip), out.atoms,
            cfg.density_floor);
        row.rho = std::max(0.0, x.value);
        row.flagged = x.disagreement || x.value < -cfg.density_floor;
      }
      rows.push_back(row);
    }
  };
  push_rows(es, std::vector<double>(n, 1.0), evals, off);

  // Band-edge cells: floor crossings and cells where the density jump moves
  // the trapezoid mass. New points get the ladder scaled with their spacing,
  // which grades the mesh toward algebraic edge singularities.
  if (cfg.refine_factor > 1) {
    const double min_width = kMinCell * diam;
    for (int pass = 0; pass < 8; ++pass) {
      const std::size_t nr = rows.size();
      std::vector<char> mark(nr - 1, 0);
      for (std::size_t i = 0; i + 1 < nr; ++i) {
        const double w = rows[i + 1].e - rows[i].e;
        if (w / cfg.refine_factor < min_width) continue;
        const bool a = rows[i].rho >= cfg.density_floor;
        const bool b = rows[i + 1].rho >= cfg.density_floor;
        const bool steep = w * std::abs(rows[i + 1].rho - rows[i].rho) > kEdgeMass;
        if (a != b || steep) {
          for (std::size_t j = i > 0 ? i - 1 : 0; j <= std::min(nr - 2, i + 1); ++j) {
            mark[j] = 1;
          }
        }
      }
      std::vector<double> extra, scales;
      for (std::size_t i = 0; i + 1 < nr; ++i) {
        if (!mark[i]) continue;
        const double w = (rows[i + 1].e - rows[i].e) / cfg.refine_factor;
        for (int j = 1; j < cfg.refine_factor; ++j) {
          extra.push_back(rows[i].e + w * j);
          scales.push_back(std::min(1.0, w / h));
        }
      }
      if (extra.empty()) break;
      const auto ev = evaluate_all(jg, extra, scales, ladder, cfg.solver, cfg.workers);
      push_rows(extra, scales, ev, 0);
      std::stable_sort(rows.begin(), rows.end(),
                       [](const Row& a, const Row& b) { return a.e < b.e; });
    }
  }

  const std::size_t total = rows.size();
  out.energies.resize(total);
  out.density.resize(total);
  out.ids.resize(total);
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    out.energies[i] = rows[i].e;
    out.density[i] = rows[i].rho;
    if (rows[i].failed) out.failed_points.push_back(static_cast<int>(i));
    if (rows[i].flagged) out.edge_flags.push_back(static_cast<int>(i));
    if (i > 0) acc += 0.5 * (rows[i].e - rows[i - 1].e) * (rows[i].rho + rows[i - 1].rho);
    double atoms_below = 0.0;
    for (const auto& a : out.atoms) {
      if (a.lambda < rows[i].e - 1e-12 * diam) atoms_below += a.mass;
    }
    out.ids[i] = acc + atoms_below;
  }
  out.density_mass = acc;

  if (cfg.label_gaps) out.gaps = find_gaps(jg, out, cfg.density_floor, cfg.solver);
  return out;
}

std::vector<Gap> find_gaps(const JacobiGraph& jg, const DOSResult& dos, double floor,
                           const SolverConfig& solver) {
  const std::size_t n = dos.energies.size();
  std::vector<Gap> gaps;
  if (n < 2) return gaps;
  const auto& e = dos.energies;
  const double tol = 1e-9 * (e.back() - e.front());
  const double min_width =
      3.0 * (dos.grid_step > 0.0 ? dos.grid_step : (e.back() - e.front()) / (n - 1));
  const int p = dos.period;

  std::vector<char> low(n);
  for (std::size_t i = 0; i < n; ++i) low[i] = dos.density[i] < floor;
  for (int f : dos.failed_points) low[f] = 0;
  // Atoms split runs; an atom on a grid point removes that point.
  std::vector<char> cut_after(n, 0);
  std::vector<double> atom_at;
  for (const auto& a : dos.atoms) {
    const auto it = std::lower_bound(e.begin(), e.end(), a.lambda - tol);
    const std::size_t j = static_cast<std::size_t>(it - e.begin());
    if (j < n && std::abs(e[j] - a.lambda) <= tol) {
      low[j] = 0;
    } else if (j > 0 && j < n) {
      cut_after[j - 1] = 1;
    }
  }
  auto atom_between = [&](double l, double r) -> std::optional<double> {
    for (const auto& a : dos.atoms) {
      if (a.lambda >= l - tol && a.lambda <= r + tol) return a.lambda;
    }
    return std::nullopt;
  };

  std::size_t i = 0;
  while (i < n) {
    if (!low[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && low[j + 1] && !cut_after[j]) ++j;
    Gap g;
    g.left = i > 0 ? e[i - 1] : e.front();
    g.right = j + 1 < n ? e[j + 1] : e.back();
    if (i > 0) {
      if (auto a = atom_between(e[i - 1], e[i])) g.left = *a;
    }
    if (j + 1 < n) {
      if (auto a = atom_between(e[j], e[j + 1])) g.right = *a;
    }
    g.semi_infinite = i == 0 || j + 1 == n;
    if (g.right - g.left >= min_width) {
      const double mid = 0.5 * (g.left + g.right);
      g.ids_quadrature = dos.ids_at(mid);
      try {
        IdsConfig icfg;
        icfg.solver = solver;
        const auto r = ids_via_arg(jg, mid, icfg);
        g.ids_arg = r.ids;
        g.label = r.label;
        g.residual = r.residual;
        g.suspect = r.residual > 1e-3;
      } catch (const std::exception&) {
        g.label = static_cast<int>(std::lround(p * g.ids_quadrature));
        g.ids_arg = std::numeric_limits<double>::quiet_NaN();
        g.residual = std::abs(p * g.ids_quadrature - g.label);
        g.suspect = true;
      }
      if (g.semi_infinite) {
        const int expect = i == 0 ? 0 : p;
        if (g.label != expect) g.suspect = true;
      }
      gaps.push_back(g);
    }
    i = j + 1;
  }
  return gaps;
}

}  // namespace jtree

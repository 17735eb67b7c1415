#include "jtree/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "jtree/errors.hpp"
#include "jtree/rng.hpp"

namespace jtree {

double LiftMatrix::norm_inf() const {
  double best = 0.0;
  for (int i = 0; i < size; ++i) {
    double s = 0.0;
    for (int j = 0; j < size; ++j) s += std::abs(at(i, j));
    best = std::max(best, s);
  }
  return best;
}

LiftMatrix random_lift(const JacobiGraph& jg, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lift degree must be at least 1");
  const auto& g = jg.graph;
  const int p = jg.period();
  LiftMatrix L;
  L.n = n;
  L.size = p * n;
  L.seed = seed;
  L.entries.assign(static_cast<std::size_t>(L.size) * L.size, 0.0);
  auto add = [&](int i, int j, double x) {
    L.entries[static_cast<std::size_t>(i) * L.size + j] += x;
  };

  Rng rng(seed);
  for (int e : g.edges()) {
    const int u = g.source(e), v = g.target(e);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    if (u == v && n >= 2) {
      while (true) {
        rng.shuffle(std::span<int>(perm));
        bool free = true;
        for (int i = 0; i < n && free; ++i) free = perm[i] != i;
        if (free) break;
      }
    } else if (n >= 2) {
      rng.shuffle(std::span<int>(perm));
    }
    const double a = jg.params.a[e];
    for (int i = 0; i < n; ++i) {
      add(u * n + i, v * n + perm[i], a);
      add(v * n + perm[i], u * n + i, a);
    }
    L.permutations.push_back(std::move(perm));
  }
  for (int v = 0; v < p; ++v) {
    for (int i = 0; i < n; ++i) add(v * n + i, v * n + i, jg.params.b[v]);
  }
  return L;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  if (n < 0 || a.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("matrix storage does not match its size");
  }
  if (n == 0) return {};
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

  std::vector<double> d(n), e(n, 0.0);
  std::vector<double> v(n), p(n), w(n);
  for (int k = 0; k + 2 < n; ++k) {
    double norm2 = 0.0;
    for (int i = k + 1; i < n; ++i) norm2 += A(i, k) * A(i, k);
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) {
      e[k] = 0.0;
      continue;
    }
    const double alpha = A(k + 1, k) > 0.0 ? -norm : norm;
    for (int i = k + 1; i < n; ++i) v[i] = A(i, k);
    v[k + 1] -= alpha;
    double vn = 0.0;
    for (int i = k + 1; i < n; ++i) vn += v[i] * v[i];
    vn = std::sqrt(vn);
    for (int i = k + 1; i < n; ++i) v[i] /= vn;
    // B <- H B H with H = I - 2 v v^T on the trailing block.
    for (int i = k + 1; i < n; ++i) {
      const double* row = &A(i, 0);
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += row[j] * v[j];
      p[i] = s;
    }
    double K = 0.0;
    for (int i = k + 1; i < n; ++i) K += v[i] * p[i];
    for (int i = k + 1; i < n; ++i) w[i] = 2.0 * (p[i] - K * v[i]);
    for (int i = k + 1; i < n; ++i) {
      double* row = &A(i, 0);
      const double vi = v[i], wi = w[i];
      for (int j = k + 1; j < n; ++j) row[j] -= vi * w[j] + wi * v[j];
    }
    e[k] = alpha;
  }
  for (int i = 0; i < n; ++i) d[i] = A(i, i);
  if (n >= 2) e[n - 2] = A(n - 1, n - 2);
  e[n - 1] = 0.0;

  // Implicit QL on the tridiagonal (d, e); e[i] couples i and i + 1.
  // Deflation is absolute in the matrix norm so clusters at 0 still split.
  constexpr double kEps = 2.220446049250313e-16;
  double anorm = 0.0;
  for (int i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]));
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * std::max(dd, anorm)) break;
      }
      if (m != l) {
        if (++iter > 60) throw NonConvergence("QL iteration did not converge", std::abs(e[l]));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, pp = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= pp;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - pp;
          r = (d[i] - g) * s + 2.0 * c * b;
          pp = s * r;
          d[i + 1] = g + pp;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= pp;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::vector<double> eigenvalues(const LiftMatrix& lift, int cap) {
  if (lift.size > cap) {
    throw std::invalid_argument("lift size " + std::to_string(lift.size) +
                                " exceeds the eigensolver cap " + std::to_string(cap));
  }
  return symmetric_eigenvalues(lift.entries, lift.size);
}

double empirical_ids_distance(std::span<const double> eigs, const DOSResult& dos,
                              double snap_relative) {
  if (eigs.empty()) throw std::invalid_argument("no eigenvalues");
  double range = 1.0;
  if (dos.energies.size() >= 2) range = dos.energies.back() - dos.energies.front();
  const double snap = snap_relative * range;
  std::vector<double> x(eigs.begin(), eigs.end());
  for (double& t : x) {
    for (const auto& a : dos.atoms) {
      if (std::abs(t - a.lambda) <= snap) t = a.lambda;
    }
  }
  std::sort(x.begin(), x.end());
  const double N = static_cast<double>(x.size());
  auto atom_at = [&](double t) {
    double s = 0.0;
    for (const auto& a : dos.atoms) {
      if (a.lambda == t) s += a.mass;
    }
    return s;
  };
  double worst = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double below = dos.ids_at(x[i]);  // k(x-)
    const double at = below + atom_at(x[i]);
    worst = std::max(worst, std::abs(static_cast<double>(i) / N - below));
    worst = std::max(worst, std::abs(static_cast<double>(j) / N - at));
    i = j;
  }
  return worst;
}

KernelResult kernel_dimension(const LiftMatrix& lift, double lambda) {
  const int n = lift.size;
  std::vector<double> a = lift.entries;
  for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + i] -= lambda;
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

  KernelResult out;
  out.threshold = 1e-8 * std::max(lift.norm_inf(), 1e-300);
  out.smallest_kept = std::numeric_limits<double>::infinity();
  std::vector<int> rows(n), cols(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  int rank = 0;
  for (int k = 0; k < n; ++k) {
    int pr = k, pc = k;
    double best = 0.0;
    for (int i = k; i < n; ++i) {
      for (int j = k; j < n; ++j) {
        const double v = std::abs(A(rows[i], cols[j]));
        if (v > best) {
          best = v;
          pr = i;
          pc = j;
        }
      }
    }
    if (best <= out.threshold) {
      out.largest_dropped = best;
      break;
    }
    out.smallest_kept = std::min(out.smallest_kept, best);
    std::swap(rows[k], rows[pr]);
    std::swap(cols[k], cols[pc]);
    const int r = rows[k];
    const double piv = A(r, cols[k]);
    for (int i = k + 1; i < n; ++i) {
      const int ri = rows[i];
      const double f = A(ri, cols[k]) / piv;
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) A(ri, cols[j]) -= f * A(r, cols[j]);
    }
    ++rank;
  }
  out.dimension = n - rank;
  out.borderline = out.largest_dropped > 1e-3 * out.threshold ||
                   (rank > 0 && out.smallest_kept < 1e3 * out.threshold);
  return out;
}

}  // namespace jtree

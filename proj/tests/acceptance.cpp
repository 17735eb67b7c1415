// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 all criteria
//   acceptance --criterion N   one criterion (6ks / 6kernel select a half of 6)
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fixtures.hpp"
#include "jtree/anderson.hpp"
#include "jtree/aomoto.hpp"
#include "jtree/floquet.hpp"
#include "jtree/lift.hpp"
#include "jtree/rng.hpp"
#include "jtree/solver.hpp"
#include "jtree/spectral.hpp"
#include "oracles.hpp"

using namespace jtree;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Named {
  const char* name;
  jtree::JacobiGraph (*make)();
};

const std::vector<Named>& graphs() {
  static const std::vector<Named> g{{"theta", fixtures::theta3},
                                    {"C2", fixtures::c2},
                                    {"C3", fixtures::c3},
                                    {"K23", fixtures::k23}};
  return g;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Gap points: midpoints of bounded gaps, then points just outside the spectrum.
std::vector<double> gap_points(const DOSResult& dos, std::size_t count) {
  std::vector<double> out;
  double lo = 0.0, hi = 0.0;
  for (const Gap& g : dos.gaps) {
    if (!g.semi_infinite && out.size() < count) out.push_back(0.5 * (g.left + g.right));
    if (g.semi_infinite && g.left <= dos.energies.front()) lo = g.right;
    if (g.semi_infinite && g.right >= dos.energies.back()) hi = g.left;
  }
  for (double step = 0.5; out.size() < count; step += 0.5) {
    out.push_back(lo - step);
    if (out.size() < count) out.push_back(hi + step);
  }
  return out;
}

Outcome kesten_mckay() {
  DosConfig c;
  c.e_min = -3.0;
  c.e_max = 3.0;
  c.n_points = 601;
  const DOSResult dos = dos_grid(fixtures::theta3(), c);
  const double rho0 = dos.density_at(0.0);
  const double ref = oracle::kesten_mckay_density(3, 0.0);
  std::size_t first = 0, last = dos.density.size() - 1;
  while (first < last && dos.density[first] <= 0.0) ++first;
  while (last > first && dos.density[last] <= 0.0) --last;
  const double edge = 2.0 * std::sqrt(2.0);
  const double e_lo = std::abs(dos.energies[first] + edge);
  const double e_hi = std::abs(dos.energies[last] - edge);
  Outcome o;
  o.pass = std::abs(rho0 - ref) < 2e-3 && e_lo < 1e-2 && e_hi < 1e-2;
  o.detail = "rho(0)=" + fmt("%.6f", rho0) + " oracle " + fmt("%.6f", ref) +
             ", edge errors " + fmt("%.1e", e_lo) + "/" + fmt("%.1e", e_hi);
  return o;
}

Outcome floquet_cross() {
  Outcome o;
  double worst = 0.0;
  Rng rng(2024);
  for (const auto& g : graphs()) {
    const auto jg = g.make();
    const DOSResult dos = dos_grid(jg);
    const auto [lo, hi] = gershgorin_bounds(jg);
    std::vector<cplx> zs;
    for (int i = 0; i < 10; ++i) zs.emplace_back(rng.uniform(lo, hi), rng.uniform(0.1, 1.0));
    for (double e : gap_points(dos, 3)) zs.emplace_back(e, 0.0);
    for (const cplx& z : zs) {
      const double r = std::abs(phi_product(jg, z).phi / phi_integral(dos, z).phi - 1.0);
      worst = std::max(worst, r);
      if (!(r < 1e-2)) {
        o.pass = false;
        o.detail += std::string(g.name) + " z=" + fmt("%.3f", z.real()) + "+" +
                    fmt("%.3f", z.imag()) + "i ratio error " + fmt("%.2e", r) + "; ";
      }
    }
  }
  // Closed form at z = -4 on the theta graph: m = 1 - 1/sqrt(2).
  const double m = 1.0 - 1.0 / std::sqrt(2.0);
  const double G = 1.0 / (4.0 - 3.0 * m), Q = 1.0 / (1.0 - m * m);
  const double closed = Q * Q * Q / (G * G);
  const double rel = std::abs(phi_product(fixtures::theta3(), cplx(-4.0, 0.0)).phi / closed - 1.0);
  o.pass = o.pass && rel < 1e-6;
  o.detail += "worst product/integral " + fmt("%.2e", worst) + " over 52 points, theta(-4) " +
              fmt("%.4f", closed) + " rel " + fmt("%.1e", rel);
  return o;
}

Outcome derivative_identities() {
  Outcome o;
  double worst = 0.0;
  Rng rng(7);
  for (const auto& g : graphs()) {
    const auto jg = g.make();
    const auto [lo, hi] = gershgorin_bounds(jg);
    for (int i = 0; i < 5; ++i) {
      const cplx z(rng.uniform(lo, hi), rng.uniform(0.1, 1.0));
      const auto r = log_derivative_check(jg, z, 1e-5);
      const double w = std::max(r.residual_phi, r.residual_q);
      worst = std::max(worst, w);
      if (!(w < 1e-7)) o.pass = false;
    }
  }
  o.detail = "worst residual " + fmt("%.2e", worst) + " over 20 points (h = 1e-5)";
  return o;
}

Outcome gap_labels() {
  Outcome o;
  const auto c2 = ids_via_arg(fixtures::c2(), 0.0);
  const double r0 = std::abs(2.0 * c2.ids - 1.0);
  o.pass = r0 < 1e-6;
  o.detail = "C2 |2k(0)-1|=" + fmt("%.1e", r0);
  double worst = 0.0;
  int count = 0;
  std::vector<Named> all = graphs();
  all.push_back({"C1", fixtures::c1});
  bool c2_has_zero = false;
  for (const auto& g : all) {
    const DOSResult dos = dos_grid(g.make());
    for (const Gap& gap : dos.gaps) {
      ++count;
      worst = std::max(worst, gap.residual);
      if (!(gap.residual < 1e-3)) o.pass = false;
      if (std::string(g.name) == "C2" && gap.left < 0.0 && gap.right > 0.0) c2_has_zero = true;
    }
  }
  o.pass = o.pass && c2_has_zero;
  o.detail += std::string(", C2 gap at 0 ") + (c2_has_zero ? "detected" : "missing") + ", " +
              std::to_string(count) + " gaps, worst label residual " + fmt("%.1e", worst);
  return o;
}

Outcome aomoto_index() {
  const auto r = analyze(fixtures::k23(), 0.0);
  Outcome o;
  const double mass_err = std::abs(5.0 * r.dk_mass - 1.0);
  o.pass = r.atom && r.X1.size() == 3 && r.boundary_X1.size() == 2 && r.E_lambda == 0 &&
           r.index == 1 && mass_err < 1e-2 && std::abs(r.ids_jump - 0.2) < 1e-2 &&
           std::abs(r.phi_slope - 1.0) < 0.05;
  o.detail = "|X1|=" + std::to_string(r.X1.size()) + " |dX1|=" +
             std::to_string(r.boundary_X1.size()) + " E=" + std::to_string(r.E_lambda) +
             " I=" + std::to_string(r.index) + ", |p dk-1|=" + fmt("%.1e", mass_err) +
             ", jump " + fmt("%.5f", r.ids_jump) + ", slope " + fmt("%.4f", r.phi_slope);
  return o;
}

Outcome lift_ks() {
  Outcome o;
  std::vector<Named> all = graphs();
  all.push_back({"C1", fixtures::c1});
  double worst = 0.0;
  for (const auto& g : all) {
    const auto jg = g.make();
    const DOSResult dos = dos_grid(jg);
    int passes = 0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      const auto eigs = eigenvalues(random_lift(jg, 500, seed));
      const double ks = empirical_ids_distance(eigs, dos);
      worst = std::max(worst, ks);
      passes += ks < 0.05;
    }
    if (passes < 2) {
      o.pass = false;
      o.detail += std::string(g.name) + " failed majority; ";
    }
  }
  o.detail += "KS n=500 worst " + fmt("%.4f", worst);
  return o;
}

Outcome lift_kernel() {
  Outcome o;
  const auto jg = fixtures::k23();
  std::string dims;
  for (int n : {50, 100}) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      const auto k = kernel_dimension(random_lift(jg, n, seed), 0.0);
      dims += std::to_string(k.dimension) + (k.borderline ? "?" : "") + " ";
      if (k.dimension != n) o.pass = false;
    }
  }
  o.detail = "K23 kernel dims (n=50 x3, n=100 x3): " + dims + "expected n";
  return o;
}

Outcome anderson() {
  Outcome o;
  // Deterministic degeneration against the periodic solver on the theta graph.
  AndersonConfig det;
  det.pool_size = 1000;
  det.sweeps = 60;
  const cplx zi(0.0, 1.0);
  const auto sol = solve_m(fixtures::theta3(), zi);
  double degen = 0.0;
  for (const cplx& m : population_run(det, zi).pool) degen = std::max(degen, std::abs(m - sol.m[0]));
  o.pass = degen < 1e-8;
  o.detail = "degeneration " + fmt("%.1e", degen);

  AndersonConfig cfg;
  cfg.b = Distribution::uniform(-0.5, 0.5);
  for (cplx z : {cplx(0.0, 1.0), cplx(1.0, 1.0)}) {
    const auto r = derivative_identity_check(cfg, z, 1e-3);
    o.pass = o.pass && r.pass;
    o.detail += ", dF+E[G] at " + fmt("%g", z.real()) + "+i: " +
                fmt("%.1e", std::abs(r.difference)) + " (3 sigma " +
                fmt("%.1e", 3.0 * (r.stderr_diff + r.curvature_bound)) + ")";
  }
  const cplx zy(0.0, 1e3);
  const double asym = std::abs(estimate_half_thouless(cfg, zy).F - std::log(-zy));
  o.pass = o.pass && asym < 1e-3;
  o.detail += ", |F(1000i)-log(-1000i)|=" + fmt("%.1e", asym);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("jtree_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = JTREE_CLI;
  const std::string data = JTREE_DATA_DIR;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"dos", "dos --graph " + data + "/k23.json --points 401"},
      {"gaps", "gaps --graph " + data + "/c3.json"},
      {"lift", "lift --graph " + data + "/c2.json --n 40 --kernel-at 0"},
      {"anderson", "anderson --b uniform,-0.5,0.5 --z 0.5,0.5 --pool 2000 --sweeps 40"},
      {"check", "anderson-check --b discrete,-1,1,1,1 --a uniform,0.5,1.5 --z 0,1 --pool 2000 "
                "--sweeps 40"},
  };
  int identical = 0;
  for (const auto& [name, args] : runs) {
    std::string bytes[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (name + std::to_string(k));
      const std::string cmd =
          cli + " " + args + " --workers 1 --seed 5 --out " + out.string() + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) {
        o.pass = false;
        o.detail += name + " exited non-zero; ";
      }
      bytes[k] = slurp(out);
      if (fs::exists(out.string() + ".manifest.json")) bytes[k] += slurp(out.string() + ".manifest.json");
    }
    if (bytes[0] == bytes[1] && !bytes[0].empty()) {
      ++identical;
    } else {
      o.pass = false;
      o.detail += name + " differs; ";
    }
  }
  fs::remove_all(dir);
  o.detail += std::to_string(identical) + "/" + std::to_string(runs.size()) +
              " CLI runs bit-identical across two invocations";
  return o;
}

Outcome lift_concordance() {
  const Outcome a = lift_ks(), b = lift_kernel();
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

struct Criterion {
  std::string id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

bool report(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > c.budget_seconds) {
    o.pass = false;
    o.detail += ", over the time budget";
  }
  std::printf("%s criterion %s %s: %s [%.1f s, budget %.0f s]\n", o.pass ? "PASS" : "FAIL",
              c.id.c_str(), c.title.c_str(), o.detail.c_str(), secs, c.budget_seconds);
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"1", "Kesten-McKay density", 10, kesten_mckay},
      {"2", "Floquet product vs integral", 60, floquet_cross},
      {"3", "derivative identities", 30, derivative_identities},
      {"4", "gap labelling", 30, gap_labels},
      {"5", "Aomoto index", 60, aomoto_index},
      {"6", "lift oracle concordance", 120, lift_concordance},
      {"7", "Anderson population dynamics", 180, anderson},
      {"8", "CLI determinism", 120, determinism},
  };
  // The halves of criterion 6, selectable on their own.
  const std::vector<Criterion> parts{
      {"6ks", "lift IDS concordance", 90, lift_ks},
      {"6kernel", "K23 lift kernel", 30, lift_kernel},
  };
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--criterion" && i + 1 < argc) only = argv[++i];
  }
  bool ok = true;
  bool ran = false;
  for (const auto* list : {&all, &parts}) {
    for (const auto& c : *list) {
      const bool selected = c.id == only || (only.empty() && list == &all);
      if (!selected) continue;
      ran = true;
      ok = report(c) && ok;
    }
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return ok ? 0 : 1;
}

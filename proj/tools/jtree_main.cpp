// jtree: command-line front end.
//
// Exit codes: 0 ok, 1 validation or usage error, 2 numerical failure,
// 3 refused classification.
#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jtree/anderson.hpp"
#include "jtree/aomoto.hpp"
#include "jtree/errors.hpp"
#include "jtree/floquet.hpp"
#include "jtree/graph_io.hpp"
#include "jtree/lift.hpp"
#include "jtree/report_io.hpp"
#include "jtree/solver.hpp"
#include "jtree/spectral.hpp"

using namespace jtree;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNumerical = 2, kRefused = 3 };

struct Globals {
  std::string graph;
  std::string out;
  int workers = 1;
  std::uint64_t seed = 1;
  double tol = 1e-12;
};

struct Loaded {
  JacobiGraph jg;
  std::string hash;
};

Loaded load(const Globals& g) {
  if (g.graph.empty()) throw ValidationError("--graph is required for this subcommand");
  std::ifstream in(g.graph, std::ios::binary);
  if (!in) throw ValidationError("cannot open graph file '" + g.graph + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return {parse_graph_json(text), fnv1a64_hex(text)};
  } catch (const ValidationError& e) {
    throw ValidationError(g.graph + ": " + e.what());
  }
}

std::vector<double> numbers(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (expected != 0 && out.size() != expected) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(expected) +
                          " comma-separated numbers, got '" + text + "'");
  }
  return out;
}

cplx complex_arg(const std::string& text) {
  const auto v = numbers(text, 2, "complex argument RE,IM");
  return {v[0], v[1]};
}

SolverConfig solver_config(const Globals& g) {
  SolverConfig s;
  s.tolerance = g.tol;
  s.check();
  return s;
}

void write_text(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + g.out + "'");
  f << text;
}

// JSON results carry their manifest inline.
void emit_json(const Globals& g, const RunManifest& m, json body) {
  body["manifest"] = m;
  write_text(g, dump(body));
}

// CSV results get a sidecar manifest next to --out (none on stdout).
void emit_csv(const Globals& g, const RunManifest& m, const std::string& csv) {
  write_text(g, csv);
  if (!g.out.empty()) {
    std::ofstream f(g.out + ".manifest.json", std::ios::binary);
    if (!f) throw ValidationError("cannot write manifest for '" + g.out + "'");
    f << dump(json(m));
  }
}

RunManifest manifest(const std::string& sub, const Globals& g, const std::string& hash) {
  RunManifest m;
  m.subcommand = sub;
  m.input_hash = hash;
  m.parameters["workers"] = g.workers;
  m.parameters["tol"] = g.tol;
  return m;
}

struct DosOptions {
  std::string range;
  int points = 601;
  std::string eps;
  int refine = 8;
  double atom_threshold = 1e-3;
  double floor = 1e-4;
  bool no_atoms = false;
};

void add_dos_options(CLI::App* sub, DosOptions& o) {
  sub->add_option("--range", o.range, "energy window LO,HI (default: Gershgorin interval)");
  sub->add_option("--points", o.points, "grid points")->check(CLI::Range(3, 10'000'000));
  sub->add_option("--eps", o.eps, "absolute epsilon ladder E1,E2,... (decreasing)");
  sub->add_option("--refine", o.refine, "band-edge subdivision factor");
  sub->add_option("--atom-threshold", o.atom_threshold, "dk mass below which no atom is kept");
  sub->add_option("--floor", o.floor, "density floor for gap detection");
  sub->add_flag("--no-atoms", o.no_atoms, "skip atom detection");
}

DosConfig dos_config(const Globals& g, const DosOptions& o, bool label_gaps) {
  DosConfig c;
  if (!o.range.empty()) {
    const auto r = numbers(o.range, 2, "--range");
    if (!(r[1] > r[0])) throw ValidationError("--range needs LO < HI");
    c.e_min = r[0];
    c.e_max = r[1];
  }
  c.n_points = o.points;
  if (!o.eps.empty()) c.eps_absolute = numbers(o.eps, 0, "--eps");
  c.refine_factor = o.refine;
  c.detect_atoms = !o.no_atoms;
  c.atom_threshold = o.atom_threshold;
  c.density_floor = o.floor;
  c.label_gaps = label_gaps;
  c.workers = g.workers;
  c.solver = solver_config(g);
  return c;
}

void record_dos(RunManifest& m, const DosConfig& c, const DOSResult& dos) {
  m.parameters["range"] = {dos.energies.front(), dos.energies.back()};
  m.parameters["points"] = c.n_points;
  m.parameters["grid_step"] = dos.grid_step;
  m.parameters["eps_ladder"] = dos.epsilon_ladder;
  m.parameters["refine"] = c.refine_factor;
  m.parameters["detect_atoms"] = c.detect_atoms;
  m.parameters["atom_threshold"] = c.atom_threshold;
  m.parameters["density_floor"] = c.density_floor;
}

json dos_summary(const DOSResult& dos) {
  return json{{"period", dos.period},
              {"density_mass", dos.density_mass},
              {"atom_mass", dos.atom_mass()},
              {"total_mass", dos.total_mass()},
              {"grid_points", dos.energies.size()},
              {"failed_points", dos.failed_points.size()},
              {"edge_flags", dos.edge_flags.size()}};
}

struct AndersonOptions {
  int d = 3;
  std::string b = "const,0";
  std::string a = "const,1";
  std::string z;
  int pool = 10'000;
  int sweeps = 200;
  int batches = 10;
  int ladder_sweeps = 5;
  double h = 1e-3;
};

void add_anderson_options(CLI::App* sub, AndersonOptions& o, bool derivative) {
  sub->add_option("--d", o.d, "tree degree");
  sub->add_option("--b", o.b, "diagonal distribution: const,V | uniform,LO,HI | discrete,V,W,...");
  sub->add_option("--a", o.a, "coupling distribution, same forms, support > 0");
  sub->add_option("--z", o.z, "spectral parameter RE,IM with IM > 0")->required();
  sub->add_option("--pool", o.pool, "pool size N");
  sub->add_option("--sweeps", o.sweeps, "sweeps T at the target z; half are burn-in");
  sub->add_option("--batches", o.batches, "batches for error bars");
  sub->add_option("--ladder-sweeps", o.ladder_sweeps, "sweeps per warm-start stage");
  if (derivative) sub->add_option("--step", o.h, "central difference step");
}

AndersonConfig anderson_config(const Globals& g, const AndersonOptions& o) {
  AndersonConfig c;
  c.d = o.d;
  try {
    c.b = Distribution::parse(o.b);
    c.a = Distribution::parse(o.a);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  c.pool_size = o.pool;
  c.sweeps = o.sweeps;
  c.batches = o.batches;
  c.ladder_sweeps = o.ladder_sweeps;
  c.seed = g.seed;
  try {
    c.check();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return c;
}

void record_anderson(RunManifest& m, const AndersonConfig& c) {
  m.parameters["d"] = c.d;
  m.parameters["b"] = c.b.describe();
  m.parameters["a"] = c.a.describe();
  m.parameters["pool"] = c.pool_size;
  m.parameters["sweeps"] = c.sweeps;
  m.parameters["burn_in"] = c.sweeps / 2;
  m.parameters["batches"] = c.batches;
  m.parameters["ladder_sweeps"] = c.ladder_sweeps;
  m.parameters["seed"] = c.seed;
  m.parameters["workers"] = 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of Jacobi operators on universal covering trees"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--graph", g.graph, "graph JSON file");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--workers", g.workers, "worker threads for grid evaluation")
      ->check(CLI::Range(1, 1024));
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--tol", g.tol, "solver tolerance")->check(CLI::PositiveNumber);

  std::string z_text;
  std::vector<std::string> z_list;
  double at = 0.0, lambda = 0.0, h = 1e-5;
  double kernel_at = 0.0;
  int lift_n = 100;
  DosOptions dopt;
  AndersonOptions aopt;
  AomotoConfig acfg;

  auto* solve = app.add_subcommand("solve", "m, G and Q at one spectral parameter");
  solve->add_option("--z", z_text, "RE,IM with IM >= 0")->required();

  auto* dos = app.add_subcommand("dos", "density of states and IDS grid (CSV)");
  add_dos_options(dos, dopt);
  auto* gaps = app.add_subcommand("gaps", "spectral gaps with IDS labels");
  add_dos_options(gaps, dopt);
  auto* atoms = app.add_subcommand("atoms", "point masses of dk");
  add_dos_options(atoms, dopt);

  auto* ids = app.add_subcommand("ids", "IDS at a gap energy from the Floquet argument");
  ids->add_option("--at", at, "energy")->required();

  auto* fcheck = app.add_subcommand("floquet-check", "product form against the DOS integral");
  fcheck->add_option("--z", z_list, "RE,IM (repeatable)")->required();
  fcheck->add_option("--step", h, "central difference step for the log-derivative check");
  add_dos_options(fcheck, dopt);

  auto* aomoto = app.add_subcommand("aomoto", "local analysis at an eigenvalue");
  aomoto->add_option("--lambda", lambda, "eigenvalue")->required();
  aomoto->add_option("--threshold", acfg.weight_threshold, "vertex weight threshold for X1");
  aomoto->add_option("--ambiguity", acfg.ambiguity_factor, "refusal band around the threshold");
  aomoto->add_option("--atom-threshold", acfg.atom_threshold, "dk mass below which no atom");

  auto* lift = app.add_subcommand("lift", "random n-lift spectrum");
  lift->add_option("--n", lift_n, "lift degree")->check(CLI::PositiveNumber);
  auto* kernel_opt = lift->add_option("--kernel-at", kernel_at, "kernel dimension of H - x");

  auto* lift_ks = app.add_subcommand("lift-ks", "KS distance of a lift spectrum to the IDS");
  lift_ks->add_option("--n", lift_n, "lift degree")->check(CLI::PositiveNumber);
  add_dos_options(lift_ks, dopt);

  auto* anderson = app.add_subcommand("anderson", "population dynamics half-Thouless estimate");
  add_anderson_options(anderson, aopt, false);
  auto* acheck = app.add_subcommand("anderson-check", "derivative identity for the estimate");
  add_anderson_options(acheck, aopt, true);

  auto* validate_cmd = app.add_subcommand("validate", "check a graph file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (validate_cmd->parsed()) {
      const auto L = load(g);
      RunManifest m = manifest("validate", g, L.hash);
      emit_json(g, m,
                {{"valid", true},
                 {"vertices", L.jg.period()},
                 {"edges", L.jg.graph.num_edges()},
                 {"graph", graph_to_json(L.jg)}});
    } else if (solve->parsed()) {
      const auto L = load(g);
      const cplx z = complex_arg(z_text);
      RunManifest m = manifest("solve", g, L.hash);
      m.parameters["z"] = complex_json(z);
      emit_json(g, m, solution_json(solve_m(L.jg, z, solver_config(g))));
    } else if (dos->parsed() || gaps->parsed() || atoms->parsed()) {
      const auto L = load(g);
      const bool labels = gaps->parsed();
      const DosConfig c = dos_config(g, dopt, labels);
      const DOSResult r = dos_grid(L.jg, c);
      const std::string sub = dos->parsed() ? "dos" : labels ? "gaps" : "atoms";
      RunManifest m = manifest(sub, g, L.hash);
      record_dos(m, c, r);
      if (dos->parsed()) {
        std::ostringstream os;
        write_dos_csv(os, r);
        emit_csv(g, m, os.str());
      } else if (labels) {
        emit_json(g, m, {{"gaps", r.gaps}, {"atoms", r.atoms}, {"summary", dos_summary(r)}});
      } else {
        emit_json(g, m,
                  {{"atoms", r.atoms},
                   {"unresolved_atoms", r.unresolved_atoms},
                   {"summary", dos_summary(r)}});
      }
    } else if (ids->parsed()) {
      const auto L = load(g);
      IdsConfig c;
      c.solver = solver_config(g);
      RunManifest m = manifest("ids", g, L.hash);
      m.parameters["at"] = at;
      m.parameters["contour_height_relative"] = c.contour_height_relative;
      m.parameters["max_arg_step"] = c.max_arg_step;
      emit_json(g, m, json(ids_via_arg(L.jg, at, c)));
    } else if (fcheck->parsed()) {
      const auto L = load(g);
      const DosConfig c = dos_config(g, dopt, false);
      const DOSResult r = dos_grid(L.jg, c);
      RunManifest m = manifest("floquet-check", g, L.hash);
      record_dos(m, c, r);
      m.parameters["h"] = h;
      json rows = json::array();
      for (const auto& t : z_list) {
        const cplx z = complex_arg(t);
        const auto prod = phi_product(L.jg, z, c.solver);
        const auto integ = phi_integral(r, z);
        json row{{"z", complex_json(z)},
                 {"phi_product", complex_json(prod.phi)},
                 {"phi_integral", complex_json(integ.phi)},
                 {"log_phi_product", complex_json(prod.log_phi)},
                 {"log_phi_integral", complex_json(integ.log_phi)},
                 {"ratio_residual", std::abs(prod.phi / integ.phi - 1.0)}};
        if (z.imag() > h) row["log_derivative"] = log_derivative_json(
            log_derivative_check(L.jg, z, h, c.solver));
        rows.push_back(row);
      }
      emit_json(g, m, {{"points", rows}, {"summary", dos_summary(r)}});
    } else if (aomoto->parsed()) {
      const auto L = load(g);
      acfg.solver = solver_config(g);
      RunManifest m = manifest("aomoto", g, L.hash);
      m.parameters["lambda"] = lambda;
      m.parameters["weight_threshold"] = acfg.weight_threshold;
      m.parameters["ambiguity_factor"] = acfg.ambiguity_factor;
      m.parameters["atom_threshold"] = acfg.atom_threshold;
      m.parameters["weight_eps_relative"] = acfg.weight_eps_relative;
      m.parameters["delta_fractions"] = acfg.delta_fractions;
      m.parameters["snap_tolerance"] = acfg.snap_tolerance;
      emit_json(g, m, aomoto_json(analyze(L.jg, lambda, acfg)));
    } else if (lift->parsed()) {
      const auto L = load(g);
      const LiftMatrix M = random_lift(L.jg, lift_n, g.seed);
      RunManifest m = manifest("lift", g, L.hash);
      m.parameters["n"] = lift_n;
      m.parameters["seed"] = g.seed;
      json body{{"n", M.n}, {"size", M.size}, {"eigenvalues", eigenvalues(M)}};
      if (kernel_opt->count() > 0) {
        m.parameters["kernel_at"] = kernel_at;
        body["kernel"] = kernel_dimension(M, kernel_at);
      }
      emit_json(g, m, body);
    } else if (lift_ks->parsed()) {
      const auto L = load(g);
      const DosConfig c = dos_config(g, dopt, false);
      const DOSResult r = dos_grid(L.jg, c);
      const LiftMatrix M = random_lift(L.jg, lift_n, g.seed);
      const auto eigs = eigenvalues(M);
      RunManifest m = manifest("lift-ks", g, L.hash);
      record_dos(m, c, r);
      m.parameters["n"] = lift_n;
      m.parameters["seed"] = g.seed;
      emit_json(g, m,
                {{"n", lift_n},
                 {"size", M.size},
                 {"ks", empirical_ids_distance(eigs, r)},
                 {"summary", dos_summary(r)}});
    } else if (anderson->parsed() || acheck->parsed()) {
      const AndersonConfig c = anderson_config(g, aopt);
      const cplx z = complex_arg(aopt.z);
      RunManifest m = manifest(anderson->parsed() ? "anderson" : "anderson-check", g, "");
      record_anderson(m, c);
      m.parameters["z"] = complex_json(z);
      if (anderson->parsed()) {
        emit_json(g, m, json(estimate_half_thouless(c, z)));
      } else {
        m.parameters["h"] = aopt.h;
        json body = json(derivative_identity_check(c, z, aopt.h));
        body["note"] =
            "checks dF/dz = -E[G] and is not an independent construction of dk";
        emit_json(g, m, body);
      }
    }
  } catch (const RefusedClassification& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const NonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kInvalid;
  } catch (const json::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

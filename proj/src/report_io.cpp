#include "jtree/report_io.hpp"

#include <cmath>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "jtree/errors.hpp"

namespace jtree {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double x = s.empty() || std::isspace(static_cast<unsigned char>(s[0]))
                       ? 0.0
                       : std::strtod(s.c_str(), &end);
  if (end == nullptr || end == s.c_str() || *end != '\0') {
    throw ValidationError("not a number: '" + s + "'");
  }
  return x;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Non-finite values become null; null reads back as +inf.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double num_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json complex_list(const std::vector<cplx>& v) {
  json out = json::array();
  for (const cplx& z : v) out.push_back(complex_json(z));
  return out;
}

json flags(const std::vector<char>& v) {
  json out = json::array();
  for (char c : v) out.push_back(c != 0);
  return out;
}

}  // namespace

void to_json(json& j, const RunManifest& m) {
  j = json{{"subcommand", m.subcommand},
           {"input_hash", m.input_hash},
           {"parameters", m.parameters},
           {"version", m.version}};
}

void from_json(const json& j, RunManifest& m) {
  j.at("subcommand").get_to(m.subcommand);
  j.at("input_hash").get_to(m.input_hash);
  m.parameters = j.at("parameters");
  j.at("version").get_to(m.version);
}

json complex_json(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("complex value must be [re, im]");
  return {num_from(j[0]), num_from(j[1])};
}

void to_json(json& j, const Atom& a) {
  j = json{{"lambda", a.lambda},
           {"mass", a.mass},
           {"vertex_weights", a.vertex_weights},
           {"ladder_spread", a.ladder_spread},
           {"resolved", a.resolved}};
}

void from_json(const json& j, Atom& a) {
  j.at("lambda").get_to(a.lambda);
  j.at("mass").get_to(a.mass);
  j.at("vertex_weights").get_to(a.vertex_weights);
  j.at("ladder_spread").get_to(a.ladder_spread);
  j.at("resolved").get_to(a.resolved);
}

void to_json(json& j, const Gap& g) {
  j = json{{"left", num(g.left)},
           {"right", num(g.right)},
           {"label", g.label},
           {"ids_arg", g.ids_arg},
           {"ids_quadrature", g.ids_quadrature},
           {"residual", g.residual},
           {"semi_infinite", g.semi_infinite},
           {"suspect", g.suspect}};
}

void from_json(const json& j, Gap& g) {
  g.left = j.at("left").is_null() ? -std::numeric_limits<double>::infinity()
                                  : j.at("left").get<double>();
  g.right = num_from(j.at("right"));
  j.at("label").get_to(g.label);
  j.at("ids_arg").get_to(g.ids_arg);
  j.at("ids_quadrature").get_to(g.ids_quadrature);
  j.at("residual").get_to(g.residual);
  j.at("semi_infinite").get_to(g.semi_infinite);
  j.at("suspect").get_to(g.suspect);
}

void to_json(json& j, const IdsResult& r) {
  j = json{{"energy", r.energy},         {"ids", r.ids},
           {"label", r.label},           {"residual", r.residual},
           {"im_log_phi", r.im_log_phi}, {"reality", r.reality},
           {"steps", r.steps}};
}

void from_json(const json& j, IdsResult& r) {
  j.at("energy").get_to(r.energy);
  j.at("ids").get_to(r.ids);
  j.at("label").get_to(r.label);
  j.at("residual").get_to(r.residual);
  j.at("im_log_phi").get_to(r.im_log_phi);
  j.at("reality").get_to(r.reality);
  j.at("steps").get_to(r.steps);
}

void to_json(json& j, const HalfThouless& h) {
  j = json{{"z", complex_json(h.z)},
           {"F", complex_json(h.F)},
           {"stderr", h.stderr_F},
           {"E_logG", complex_json(h.E_logG)},
           {"E_logm", complex_json(h.E_logm)},
           {"E_G", complex_json(h.E_G)},
           {"diagnostics",
            {{"drift", h.drift},
             {"drift_stderr", h.drift_stderr},
             {"stationary", h.stationary},
             {"batches", h.batches}}}};
}

void from_json(const json& j, HalfThouless& h) {
  h.z = complex_from_json(j.at("z"));
  h.F = complex_from_json(j.at("F"));
  j.at("stderr").get_to(h.stderr_F);
  h.E_logG = complex_from_json(j.at("E_logG"));
  h.E_logm = complex_from_json(j.at("E_logm"));
  h.E_G = complex_from_json(j.at("E_G"));
  const json& d = j.at("diagnostics");
  d.at("drift").get_to(h.drift);
  d.at("drift_stderr").get_to(h.drift_stderr);
  d.at("stationary").get_to(h.stationary);
  d.at("batches").get_to(h.batches);
}

void to_json(json& j, const DerivativeReport& r) {
  j = json{{"z", complex_json(r.z)},
           {"h", r.h},
           {"dF", complex_json(r.dF)},
           {"minus_EG", complex_json(r.minus_EG)},
           {"difference", complex_json(r.difference)},
           {"stderr", r.stderr_diff},
           {"curvature_bound", r.curvature_bound},
           {"pass", r.pass}};
}

void from_json(const json& j, DerivativeReport& r) {
  r.z = complex_from_json(j.at("z"));
  j.at("h").get_to(r.h);
  r.dF = complex_from_json(j.at("dF"));
  r.minus_EG = complex_from_json(j.at("minus_EG"));
  r.difference = complex_from_json(j.at("difference"));
  j.at("stderr").get_to(r.stderr_diff);
  j.at("curvature_bound").get_to(r.curvature_bound);
  j.at("pass").get_to(r.pass);
}

void to_json(json& j, const KernelResult& k) {
  j = json{{"dimension", k.dimension},
           {"threshold", k.threshold},
           {"smallest_kept", num(k.smallest_kept)},
           {"largest_dropped", k.largest_dropped},
           {"borderline", k.borderline}};
}

void from_json(const json& j, KernelResult& k) {
  j.at("dimension").get_to(k.dimension);
  j.at("threshold").get_to(k.threshold);
  k.smallest_kept = num_from(j.at("smallest_kept"));
  j.at("largest_dropped").get_to(k.largest_dropped);
  j.at("borderline").get_to(k.borderline);
}

json solution_json(const MSolution& s) {
  return json{{"z", complex_json(s.z)},
              {"m", complex_list(s.m)},
              {"G", complex_list(s.G)},
              {"Q", complex_list(s.Q)},
              {"G_pole", flags(s.G_pole)},
              {"Q_pole", flags(s.Q_pole)},
              {"residual", s.residual},
              {"iterations", s.iterations},
              {"q_discrepancy", s.q_discrepancy}};
}

json aomoto_json(const AomotoReport& r) {
  json j{{"status", r.atom ? "ok" : "no_atom"},
         {"lambda", r.lambda},
         {"atom", r.atom},
         {"X1", r.X1},
         {"boundary_X1", r.boundary_X1},
         {"X0", r.X0},
         {"E_lambda", r.E_lambda},
         {"index", r.index},
         {"cc_X1", r.cc_X1},
         {"dk_mass", r.dk_mass},
         {"ladder_spread", r.ladder_spread},
         {"vertex_weights", r.vertex_weights}};
  if (!r.atom) return j;
  j["isolation_left"] = num(r.isolation_left);
  j["isolation_right"] = num(r.isolation_right);
  if (r.orders) {
    j["orders"] = {{"G", r.orders->G},
                   {"m", r.orders->m},
                   {"Q", r.orders->Q},
                   {"G_slope", r.orders->G_slope},
                   {"m_slope", r.orders->m_slope},
                   {"Q_slope", r.orders->Q_slope}};
  }
  j["phi_order"] = r.phi_order;
  j["order_violations"] = r.order_violations;
  j["x0_green_zeros"] = r.x0_green_zeros;
  j["outer_q_zeros"] = r.outer_q_zeros;
  j["ids_jump"] = r.ids_jump;
  j["phi_slope"] = r.phi_slope;
  j["cc_check"] = r.cc_check;
  return j;
}

json log_derivative_json(const LogDerivativeReport& r) {
  return json{{"z", complex_json(r.z)},
              {"dlog_phi", complex_json(r.dlog_phi)},
              {"minus_sum_green", complex_json(r.minus_sum_green)},
              {"residual_phi", r.residual_phi},
              {"dlog_q_sum", complex_json(r.dlog_q_sum)},
              {"green_side", complex_json(r.green_side)},
              {"residual_q", r.residual_q}};
}

void write_dos_csv(std::ostream& os, const DOSResult& dos) {
  os << "energy,density,ids\n";
  for (std::size_t i = 0; i < dos.energies.size(); ++i) {
    os << format_double(dos.energies[i]) << ',' << format_double(dos.density[i]) << ','
       << format_double(dos.ids[i]) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::vector<GridRow> read_dos_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "energy,density,ids") {
    throw ValidationError("dos csv: missing header 'energy,density,ids'");
  }
  std::vector<GridRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) {
      throw ValidationError("dos csv line " + std::to_string(lineno) + ": expected 3 fields");
    }
    rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2])});
  }
  return rows;
}

void write_column_csv(std::ostream& os, const std::string& header,
                      const std::vector<double>& values) {
  os << header << '\n';
  for (double x : values) os << format_double(x) << '\n';
}

std::vector<double> read_column_csv(std::istream& is, std::string* header) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("csv: empty input");
  if (header) *header = line;
  std::vector<double> out;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(parse_double(line));
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace jtree

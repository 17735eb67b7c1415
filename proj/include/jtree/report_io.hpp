// Structured output: JSON reports, CSV grids and run manifests.
//
// Complex numbers are [re, im] arrays. CSV numbers use %.17g; JSON numbers
// use the shortest representation that reads back to the same double.
#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jtree/anderson.hpp"
#include "jtree/aomoto.hpp"
#include "jtree/floquet.hpp"
#include "jtree/lift.hpp"
#include "jtree/solver.hpp"
#include "jtree/spectral.hpp"

namespace jtree {

inline constexpr const char* kVersion = "0.3.0";

std::string format_double(double x);
double parse_double(std::string_view text);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a64_hex(std::string_view bytes);

struct RunManifest {
  std::string subcommand;
  std::string input_hash;  // of the graph file bytes; empty without a graph
  nlohmann::json parameters = nlohmann::json::object();
  std::string version = kVersion;
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

nlohmann::json complex_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const Atom& a);
void from_json(const nlohmann::json& j, Atom& a);
void to_json(nlohmann::json& j, const Gap& g);
void from_json(const nlohmann::json& j, Gap& g);
void to_json(nlohmann::json& j, const IdsResult& r);
void from_json(const nlohmann::json& j, IdsResult& r);
void to_json(nlohmann::json& j, const HalfThouless& h);
void from_json(const nlohmann::json& j, HalfThouless& h);
void to_json(nlohmann::json& j, const DerivativeReport& r);
void from_json(const nlohmann::json& j, DerivativeReport& r);
void to_json(nlohmann::json& j, const KernelResult& k);
void from_json(const nlohmann::json& j, KernelResult& k);

nlohmann::json solution_json(const MSolution& s);
nlohmann::json aomoto_json(const AomotoReport& r);
nlohmann::json log_derivative_json(const LogDerivativeReport& r);

struct GridRow {
  double energy = 0.0;
  double density = 0.0;
  double ids = 0.0;
};

/// energy,density,ids with a header line.
void write_dos_csv(std::ostream& os, const DOSResult& dos);
std::vector<GridRow> read_dos_csv(std::istream& is);

/// One value per line under a single header.
void write_column_csv(std::ostream& os, const std::string& header,
                      const std::vector<double>& values);
std::vector<double> read_column_csv(std::istream& is, std::string* header = nullptr);

/// Pretty JSON with a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace jtree

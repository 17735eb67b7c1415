#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "jtree/errors.hpp"
#include "jtree/report_io.hpp"

using namespace jtree;
using nlohmann::json;

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.8284271247461903, 1e-300, 6.02214076e23}) {
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_THROW(parse_double("1.5x"), ValidationError);
  EXPECT_THROW(parse_double(""), ValidationError);
}

TEST(Hash, KnownVectors) {
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(Manifest, RoundTrip) {
  RunManifest m;
  m.subcommand = "dos";
  m.input_hash = fnv1a64_hex("graph");
  m.parameters = {{"points", 601}, {"eps", {1e-3, 5e-4}}, {"seed", 7}};
  const RunManifest back = json::parse(json(m).dump()).get<RunManifest>();
  EXPECT_EQ(back.subcommand, m.subcommand);
  EXPECT_EQ(back.input_hash, m.input_hash);
  EXPECT_EQ(back.parameters, m.parameters);
  EXPECT_EQ(back.version, kVersion);
}

TEST(Json, ComplexAndNonFinite) {
  const cplx z(0.1, -1e-17);
  EXPECT_EQ(complex_from_json(json::parse(complex_json(z).dump())), z);
  const auto inf = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(complex_json(cplx(inf, 0.0))[0].is_null());
  EXPECT_THROW(complex_from_json(json{1.0}), ValidationError);
}

TEST(Json, GapAndAtomRoundTrip) {
  Gap g{-std::numeric_limits<double>::infinity(), -2.5, 0, 1e-17, 0.0, 1e-17, true, false};
  const Gap gb = json::parse(json(g).dump()).get<Gap>();
  EXPECT_EQ(gb.left, g.left);
  EXPECT_EQ(gb.right, g.right);
  EXPECT_EQ(gb.ids_arg, g.ids_arg);
  EXPECT_TRUE(gb.semi_infinite);

  Atom a{0.0, 0.2000000000000001, {0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1e-9, true};
  const Atom ab = json::parse(json(a).dump()).get<Atom>();
  EXPECT_EQ(ab.mass, a.mass);
  EXPECT_EQ(ab.vertex_weights, a.vertex_weights);
}

TEST(Json, MonteCarloReportsRoundTrip) {
  HalfThouless h;
  h.z = {0.0, 1.0};
  h.F = {0.58818612345678901, -1.5705671};
  h.stderr_F = 3.17e-4;
  h.batches = 10;
  h.stationary = false;
  const auto hb = json::parse(json(h).dump()).get<HalfThouless>();
  EXPECT_EQ(hb.F, h.F);
  EXPECT_EQ(hb.stderr_F, h.stderr_F);
  EXPECT_FALSE(hb.stationary);

  DerivativeReport r;
  r.z = {1.0, 1.0};
  r.h = 1e-3;
  r.difference = {-2.2e-4, 4.5e-5};
  r.pass = true;
  const auto rb = json::parse(json(r).dump()).get<DerivativeReport>();
  EXPECT_EQ(rb.difference, r.difference);
  EXPECT_TRUE(rb.pass);

  KernelResult k;
  k.dimension = 102;
  k.smallest_kept = std::numeric_limits<double>::infinity();
  const auto kb = json::parse(json(k).dump()).get<KernelResult>();
  EXPECT_EQ(kb.dimension, 102);
  EXPECT_TRUE(std::isinf(kb.smallest_kept));
}

TEST(Csv, DosRoundTrip) {
  DOSResult dos;
  dos.energies = {-1.0, -1.0 / 3.0, 1.0 / 7.0};
  dos.density = {0.0, 0.1234567890123456789, 1e-310};
  dos.ids = {0.0, 0.4, 1.0};
  std::stringstream ss;
  write_dos_csv(ss, dos);
  const auto rows = read_dos_csv(ss);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].energy, dos.energies[i]);
    EXPECT_EQ(rows[i].density, dos.density[i]);
    EXPECT_EQ(rows[i].ids, dos.ids[i]);
  }
  std::stringstream bad("energy,density,ids\n1,2\n");
  EXPECT_THROW(read_dos_csv(bad), ValidationError);
}

TEST(Csv, ColumnRoundTrip) {
  const std::vector<double> v{-std::sqrt(5.0), 0.0, std::sqrt(5.0)};
  std::stringstream ss;
  write_column_csv(ss, "eigenvalue", v);
  std::string header;
  EXPECT_EQ(read_column_csv(ss, &header), v);
  EXPECT_EQ(header, "eigenvalue");
}

TEST(Json, SolutionFieldsParse) {
  const auto sol = solve_m(fixtures::k23(), cplx(0.3, 0.4));
  const json j = json::parse(dump(solution_json(sol)));
  ASSERT_EQ(j["m"].size(), sol.m.size());
  for (std::size_t e = 0; e < sol.m.size(); ++e) {
    EXPECT_EQ(complex_from_json(j["m"][e]), sol.m[e]);
  }
  EXPECT_EQ(j["G"].size(), 5u);
}

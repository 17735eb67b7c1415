#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "jtree/floquet.hpp"
#include "jtree/spectral.hpp"
#include "oracles.hpp"

using namespace jtree;

namespace {

const DOSResult& theta_dos() {
  static const DOSResult dos = dos_grid(fixtures::theta3());
  return dos;
}

const DOSResult& k23_dos() {
  static const DOSResult dos = dos_grid(fixtures::k23());
  return dos;
}

}  // namespace

TEST(DosGrid, KestenMcKayDensity) {
  const auto& dos = theta_dos();
  EXPECT_NEAR(dos.density_at(0.0), std::sqrt(2.0) / (3.0 * M_PI), 2e-3);
  EXPECT_NEAR(dos.density_at(0.0), 0.150053, 2e-3);
  for (double e : {-2.0, -1.0, 0.5, 1.7, 2.5}) {
    EXPECT_NEAR(dos.density_at(e), oracle::kesten_mckay_density(3, e), 5e-3) << e;
  }
  EXPECT_TRUE(dos.atoms.empty());
  EXPECT_TRUE(dos.failed_points.empty());
  EXPECT_NEAR(dos.total_mass(), 1.0, 1e-3);
}

TEST(DosGrid, KestenMcKaySupport) {
  const auto& gaps = theta_dos().gaps;
  ASSERT_EQ(gaps.size(), 2u);
  EXPECT_TRUE(gaps[0].semi_infinite);
  EXPECT_TRUE(gaps[1].semi_infinite);
  EXPECT_NEAR(gaps[0].right, -2.0 * std::sqrt(2.0), 1e-2);
  EXPECT_NEAR(gaps[1].left, 2.0 * std::sqrt(2.0), 1e-2);
  EXPECT_EQ(gaps[0].label, 0);
  EXPECT_EQ(gaps[1].label, 2);
}

TEST(DosGrid, SingleLoopArcsine) {
  const auto dos = dos_grid(fixtures::c1());
  for (double e : {-1.5, -0.3, 0.0, 1.1}) {
    EXPECT_NEAR(dos.density_at(e), 1.0 / (M_PI * std::sqrt(4.0 - e * e)), 2e-3) << e;
  }
  EXPECT_NEAR(dos.ids_at(0.0), 0.5, 1e-3);
  EXPECT_NEAR(dos.total_mass(), 1.0, 1e-3);
}

TEST(DosGrid, BipartiteAtom) {
  const auto& dos = k23_dos();
  ASSERT_EQ(dos.atoms.size(), 1u);
  const auto& atom = dos.atoms[0];
  EXPECT_NEAR(atom.lambda, 0.0, 1e-6);
  EXPECT_NEAR(atom.mass, 0.2, 1e-3);
  EXPECT_NEAR(atom.vertex_weights[0], 0.0, 1e-4);
  EXPECT_NEAR(atom.vertex_weights[1], 0.0, 1e-4);
  for (int v = 2; v < 5; ++v) EXPECT_NEAR(atom.vertex_weights[v], 1.0 / 3.0, 1e-3);
  EXPECT_NEAR(atom.mass * 5, std::round(atom.mass * 5), 5e-3);
  EXPECT_NEAR(dos.total_mass(), 1.0, 1e-3);
}

TEST(DosGrid, BipartiteGaps) {
  const auto& dos = k23_dos();
  // Spectrum +-[sqrt2 - 1, sqrt2 + 1] plus the atom at 0.
  std::vector<Gap> inner;
  for (const auto& g : dos.gaps) {
    if (!g.semi_infinite) inner.push_back(g);
  }
  ASSERT_EQ(inner.size(), 2u);
  EXPECT_NEAR(inner[0].left, 1.0 - std::sqrt(2.0), 1e-2);
  EXPECT_NEAR(inner[0].right, 0.0, 1e-6);
  EXPECT_NEAR(inner[1].left, 0.0, 1e-6);
  EXPECT_NEAR(inner[1].right, std::sqrt(2.0) - 1.0, 1e-2);
  EXPECT_EQ(inner[0].label, 2);
  EXPECT_EQ(inner[1].label, 3);
  for (const auto& g : dos.gaps) {
    EXPECT_FALSE(g.suspect);
    EXPECT_NEAR(g.ids_arg, g.ids_quadrature, 1e-3);
  }
}

TEST(DosGrid, PeriodTwoChainGap) {
  const auto dos = dos_grid(fixtures::c2());
  std::vector<Gap> inner;
  for (const auto& g : dos.gaps) {
    if (!g.semi_infinite) inner.push_back(g);
  }
  ASSERT_EQ(inner.size(), 1u);
  EXPECT_NEAR(inner[0].left, -1.0, 1e-2);
  EXPECT_NEAR(inner[0].right, 1.0, 1e-2);
  EXPECT_EQ(inner[0].label, 1);
  EXPECT_NEAR(inner[0].ids_quadrature, 0.5, 1e-3);
}

TEST(DosGrid, PeriodThreeChainBandEdges) {
  const auto dos = dos_grid(fixtures::c3());
  const auto edges = oracle::chain_band_edges({1, 2, 3}, {0, 0, 0}, -7.0, 7.0);
  ASSERT_EQ(edges.size(), 6u);
  std::vector<Gap> inner;
  for (const auto& g : dos.gaps) {
    if (!g.semi_infinite) inner.push_back(g);
  }
  ASSERT_EQ(inner.size(), 2u);
  EXPECT_NEAR(inner[0].left, edges[1], 2e-2);
  EXPECT_NEAR(inner[0].right, edges[2], 2e-2);
  EXPECT_NEAR(inner[1].left, edges[3], 2e-2);
  EXPECT_NEAR(inner[1].right, edges[4], 2e-2);
  EXPECT_EQ(inner[0].label, 1);
  EXPECT_EQ(inner[1].label, 2);
}

// Invariants over every fixture: unit mass, monotone ids, nonnegative density.
TEST(DosGridProperties, NormalizedAndMonotone) {
  for (const auto& jg : {fixtures::theta3(), fixtures::c1(), fixtures::c2(),
                         fixtures::c3(), fixtures::k23()}) {
    const auto dos = dos_grid(jg);
    EXPECT_NEAR(dos.total_mass(), 1.0, 1e-3);
    for (std::size_t i = 0; i < dos.energies.size(); ++i) {
      EXPECT_GE(dos.density[i], 0.0);
      if (i > 0) {
        EXPECT_GT(dos.energies[i], dos.energies[i - 1]);
        EXPECT_GE(dos.ids[i], dos.ids[i - 1]);
      }
    }
    for (const auto& a : dos.atoms) {
      EXPECT_NEAR(a.mass * jg.period(), std::round(a.mass * jg.period()), 5e-3);
    }
  }
}

TEST(DosGridProperties, BipartiteSymmetry) {
  const auto& dos = k23_dos();
  for (double e : {0.5, 0.9, 1.4, 2.2}) {
    EXPECT_NEAR(dos.density_at(e), dos.density_at(-e), 1e-3) << e;
  }
}

TEST(DosGrid, WorkersDoNotChangeResults) {
  DosConfig cfg;
  cfg.n_points = 101;
  const auto one = dos_grid(fixtures::c3(), cfg);
  cfg.workers = 4;
  const auto four = dos_grid(fixtures::c3(), cfg);
  EXPECT_EQ(one.energies, four.energies);
  EXPECT_EQ(one.density, four.density);
}

TEST(AtomWeights, NoAtomInContinuum) {
  const auto atom = atom_weights(fixtures::theta3(), 0.3, 1e-6);
  EXPECT_LT(atom.mass, 1e-4);
}

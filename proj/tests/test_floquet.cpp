#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "jtree/errors.hpp"
#include "jtree/floquet.hpp"
#include "jtree/spectral.hpp"

using namespace jtree;

TEST(PhiProduct, ThetaLeftOfSpectrumClosedForm) {
  const double m = 1.0 - std::sqrt(2.0) / 2.0;
  const double g = 1.0 / (4.0 - 3.0 * m);
  const double q = 1.0 / (1.0 - m * m);
  const auto v = phi_product(fixtures::theta3(), cplx(-4.0, 0.0));
  EXPECT_NEAR(v.phi.real(), q * q * q / (g * g), 1e-10);
  EXPECT_NEAR(v.phi.real(), 12.7507, 1e-4);
  EXPECT_EQ(v.phi.imag(), 0.0);
  EXPECT_NEAR(v.log_phi.imag(), 0.0, 1e-15);
  EXPECT_NEAR(v.log_phi.real(), std::log(v.phi.real()), 1e-12);
}

TEST(PhiProduct, LargeNegativeEnergy) {
  for (const auto& jg : {fixtures::theta3(), fixtures::c2(), fixtures::k23()}) {
    const auto v = phi_product(jg, cplx(-1e6, 0.0));
    const double ref = std::pow(1e6, jg.period());
    EXPECT_LT(std::abs(v.phi.real() / ref - 1.0), 1e-5);
    EXPECT_NEAR(v.log_phi.imag(), 0.0, 1e-12);
  }
}

TEST(PhiProduct, LogMatchesValueOffAxis) {
  const auto jg = fixtures::c3();
  const auto v = phi_product(jg, cplx(0.4, 0.3));
  EXPECT_LT(std::abs(std::exp(v.log_phi) - v.phi), 1e-10 * std::abs(v.phi));
  EXPECT_THROW(phi_product(jg, cplx(0.0, -0.1)), DomainError);
}

TEST(IdsViaArg, PeriodTwoChainMidGap) {
  const auto r = ids_via_arg(fixtures::c2(), 0.0);
  EXPECT_NEAR(r.ids, 0.5, 1e-6);
  EXPECT_EQ(r.label, 1);
  EXPECT_LT(r.reality, 1e-8);
}

TEST(IdsViaArg, ThetaOutsideSpectrum) {
  const auto jg = fixtures::theta3();
  const auto below = ids_via_arg(jg, -4.0);
  EXPECT_NEAR(below.ids, 0.0, 1e-9);
  EXPECT_EQ(below.label, 0);
  const auto above = ids_via_arg(jg, 4.0);
  EXPECT_NEAR(above.ids, 1.0, 1e-9);
  EXPECT_EQ(above.label, 2);
}

TEST(IdsViaArg, PeriodThreeChainGapLabels) {
  // Bands of a=(1,2,3), b=0: [-4.113,-3.201], [-0.911,0.912], [3.202,4.114].
  const auto jg = fixtures::c3();
  EXPECT_EQ(ids_via_arg(jg, -2.0).label, 1);
  EXPECT_EQ(ids_via_arg(jg, 2.0).label, 2);
}

TEST(IdsViaArg, RejectsSpectrum) {
  EXPECT_THROW(ids_via_arg(fixtures::theta3(), 0.0), DomainError);
}

TEST(LogDerivative, ProductFormDifferentiates) {
  for (const auto& [jg, z] : {std::pair{fixtures::theta3(), cplx(0.0, 1.0)},
                              std::pair{fixtures::c3(), cplx(1.0, 2.0)},
                              std::pair{fixtures::k23(), cplx(-0.5, 0.2)}}) {
    const auto r = log_derivative_check(jg, z, 1e-5);
    EXPECT_LT(r.residual_phi, 1e-7);
    EXPECT_LT(r.residual_q, 1e-7);
  }
}

TEST(LogDerivative, Asymptotic) {
  const auto jg = fixtures::k23();
  const auto r = log_derivative_check(jg, cplx(-1e6, 0.0), 1.0);
  EXPECT_NEAR(r.minus_sum_green.real(), -jg.period() * 1e-6, 1e-10);
  EXPECT_LT(r.residual_phi, 1e-10);
}

TEST(PhiIntegral, SingleAtom) {
  DOSResult dos;
  dos.period = 1;
  dos.atoms.push_back({0.0, 1.0, {1.0}, 0.0, true});
  const auto v = phi_integral(dos, cplx(-2.5, 0.0));
  EXPECT_NEAR(v.phi.real(), 2.5, 1e-14);
  const auto w = phi_integral(dos, cplx(0.3, 0.7));
  EXPECT_LT(std::abs(w.phi - (cplx(0.0) - cplx(0.3, 0.7))), 1e-14);
}

TEST(PhiIntegral, RejectsIncompleteMass) {
  DOSResult dos;
  dos.period = 1;
  dos.atoms.push_back({0.0, 0.9, {0.9}, 0.0, true});
  EXPECT_THROW(phi_integral(dos, cplx(-1.0, 0.0)), DomainError);
}

TEST(PhiIntegral, AgreesWithProductForm) {
  const auto jg = fixtures::theta3();
  const auto dos = dos_grid(jg);
  for (const cplx z : {cplx(-4.0, 0.0), cplx(0.2, 0.5), cplx(3.5, 0.0)}) {
    const auto a = phi_product(jg, z);
    const auto b = phi_integral(dos, z);
    EXPECT_LT(std::abs(b.log_phi - a.log_phi), 1e-2 * std::max(1.0, std::abs(a.log_phi)))
        << z;
  }
}

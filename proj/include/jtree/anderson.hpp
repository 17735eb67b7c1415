// Population dynamics for the Anderson model on the d-regular tree with
// i.i.d. diagonal b and couplings a. A pool of N samples of the half-tree
// value m is updated by
//
//   m' = 1 / (-z + b - sum_{i<d} a_i^2 m_i)
//
// and the half-Thouless combination is
//
//   F(z) = (d/2 - 1) E[log G] - (d/2) E[log m],   F'(z) = -E[G].
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "jtree/rng.hpp"

namespace jtree {

using cplx = std::complex<double>;

class Distribution {
 public:
  enum class Kind { constant, uniform, discrete };

  static Distribution constant(double value);
  static Distribution uniform(double lo, double hi);
  static Distribution discrete(std::vector<double> values, std::vector<double> weights);
  /// "const,V", "uniform,LO,HI" or "discrete,V1,W1,V2,W2,...".
  static Distribution parse(const std::string& spec);

  double sample(Rng& rng) const;
  double min() const;
  double max() const;
  bool is_constant() const { return kind_ == Kind::constant; }
  Kind kind() const { return kind_; }
  std::string describe() const;
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  Kind kind_ = Kind::constant;
  std::vector<double> values_;   // constant: {v}; uniform: {lo, hi}
  std::vector<double> weights_;  // discrete only, normalised
  std::vector<double> cumulative_;
};

struct AndersonConfig {
  int d = 3;
  Distribution b = Distribution::constant(0.0);
  Distribution a = Distribution::constant(1.0);
  int pool_size = 10'000;
  int sweeps = 200;           // at the target z; the first half is burn-in
  std::uint64_t seed = 1;
  int ladder_sweeps = 5;      // per stage of the Im z warm start
  int batches = 10;

  void check() const;
};

struct PopulationState {
  cplx z;
  std::vector<cplx> pool;
  int sweep_count = 0;
};

PopulationState population_run(const AndersonConfig& cfg, cplx z);

struct HalfThouless {
  cplx z;
  cplx F;
  double stderr_F = 0.0;
  cplx E_logG;
  cplx E_logm;
  cplx E_G;
  double drift = 0.0;         // |first-half - second-half| of E[log m]
  double drift_stderr = 0.0;
  bool stationary = true;     // drift within three standard errors
  int batches = 0;
};

HalfThouless estimate_half_thouless(const AndersonConfig& cfg, cplx z);

struct DerivativeReport {
  cplx z;
  double h = 0.0;
  cplx dF;               // (F(z+h) - F(z-h)) / 2h
  cplx minus_EG;         // -E[G(z)]
  cplx difference;       // dF - minus_EG
  double stderr_diff = 0.0;
  double curvature_bound = 0.0;  // h^2 / (3 Im(z)^3)
  bool pass = false;
};

/// The three populations at z - h, z, z + h share every random draw.
DerivativeReport derivative_identity_check(const AndersonConfig& cfg, cplx z, double h);

}  // namespace jtree

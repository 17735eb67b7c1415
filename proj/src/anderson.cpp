#include "jtree/anderson.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jtree/errors.hpp"

namespace jtree {

Distribution Distribution::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
  Distribution d;
  d.kind_ = Kind::constant;
  d.values_ = {value};
  return d;
}

Distribution Distribution::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw std::invalid_argument("uniform needs finite lo < hi");
  }
  Distribution d;
  d.kind_ = Kind::uniform;
  d.values_ = {lo, hi};
  return d;
}

Distribution Distribution::discrete(std::vector<double> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw std::invalid_argument("discrete needs matching non-empty values and weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::invalid_argument("discrete values must be finite");
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("discrete weights must be positive");
    }
    total += weights[i];
  }
  Distribution d;
  d.kind_ = Kind::discrete;
  double acc = 0.0;
  for (double& w : weights) {
    w /= total;
    acc += w;
    d.cumulative_.push_back(acc);
  }
  d.cumulative_.back() = 1.0;
  d.values_ = std::move(values);
  d.weights_ = std::move(weights);
  return d;
}

Distribution Distribution::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("empty distribution");
  std::vector<double> nums;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size()) {
      throw std::invalid_argument("distribution '" + spec + "': '" + parts[i] +
                                  "' is not a number");
    }
    nums.push_back(x);
  }
  const std::string& kind = parts[0];
  if ((kind == "const" || kind == "constant") && nums.size() == 1) return constant(nums[0]);
  if (kind == "uniform" && nums.size() == 2) return uniform(nums[0], nums[1]);
  if (kind == "discrete" && !nums.empty() && nums.size() % 2 == 0) {
    std::vector<double> v, w;
    for (std::size_t i = 0; i < nums.size(); i += 2) {
      v.push_back(nums[i]);
      w.push_back(nums[i + 1]);
    }
    return discrete(std::move(v), std::move(w));
  }
  throw std::invalid_argument("distribution '" + spec +
                              "': expected const,V | uniform,LO,HI | discrete,V,W,...");
}

double Distribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::constant:
      return values_[0];
    case Kind::uniform:
      return rng.uniform(values_[0], values_[1]);
    case Kind::discrete: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      return values_[std::min<std::size_t>(it - cumulative_.begin(), values_.size() - 1)];
    }
  }
  return 0.0;
}

double Distribution::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Distribution::max() const { return *std::max_element(values_.begin(), values_.end()); }

std::string Distribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::constant:
      os << "const," << values_[0];
      break;
    case Kind::uniform:
      os << "uniform," << values_[0] << "," << values_[1];
      break;
    case Kind::discrete:
      os << "discrete";
      for (std::size_t i = 0; i < values_.size(); ++i) os << "," << values_[i] << "," << weights_[i];
      break;
  }
  return os.str();
}

void AndersonConfig::check() const {
  if (d < 2) throw std::invalid_argument("degree d must be at least 2");
  if (!(a.min() > 0.0)) throw std::invalid_argument("coupling distribution must be positive");
  if (pool_size < 2) throw std::invalid_argument("pool size must be at least 2");
  if (sweeps < 2) throw std::invalid_argument("at least two sweeps are needed");
  if (ladder_sweeps < 1) throw std::invalid_argument("ladder sweeps must be positive");
  if (batches < 2) throw std::invalid_argument("at least two batches are needed");
}

namespace {

// Several populations driven by one stream of draws (common random numbers).
class Lockstep {
 public:
  Lockstep(const AndersonConfig& cfg, std::vector<cplx> zs)
      : cfg_(cfg), zs_(std::move(zs)), rng_(cfg.seed), pools_(zs_.size()) {
    cfg_.check();
    for (const cplx& z : zs_) {
      if (!(z.imag() > 0.0)) throw DomainError("population dynamics requires Im z > 0");
    }
    const double amax = cfg_.a.max();
    scale_ = std::max(std::abs(cfg_.b.min()), std::abs(cfg_.b.max())) + cfg_.d * amax * amax;
  }

  // Warm start down a ladder in Im z, then burn-in and measurement at zs.
  void warm_start() {
    const double target = zs_.front().imag();
    double eta = std::max(target, 2.0 * scale_);
    for (std::size_t k = 0; k < zs_.size(); ++k) {
      pools_[k].assign(cfg_.pool_size, -1.0 / cplx(zs_[k].real(), eta));
    }
    while (eta > target) {
      std::vector<cplx> at;
      for (const cplx& z : zs_) at.emplace_back(z.real(), eta);
      for (int s = 0; s < cfg_.ladder_sweeps; ++s) sweep(at);
      eta = std::max(target, 0.25 * eta);
    }
  }

  void sweep(const std::vector<cplx>& at) {
    const int n = cfg_.pool_size;
    const int k_count = static_cast<int>(at.size());
    a2_.resize(cfg_.d);
    idx_.resize(cfg_.d);
    for (int step = 0; step < n; ++step) {
      const int slot = static_cast<int>(rng_.below(n));
      const double b = cfg_.b.sample(rng_);
      for (int i = 0; i + 1 < cfg_.d; ++i) {
        const double a = cfg_.a.sample(rng_);
        a2_[i] = a * a;
        idx_[i] = static_cast<int>(rng_.below(n));
      }
      for (int k = 0; k < k_count; ++k) {
        cplx den = -at[k] + b;
        for (int i = 0; i + 1 < cfg_.d; ++i) den -= a2_[i] * pools_[k][idx_[i]];
        const cplx m = 1.0 / den;
        if (!(m.imag() > 0.0)) {
          throw NonConvergence("population sample left the upper half-plane", m.imag());
        }
        pools_[k][slot] = m;
      }
    }
    ++sweeps_;
  }

  struct Moments {
    std::vector<cplx> log_m, log_G, G;
  };

  Moments measure() {
    const int n = cfg_.pool_size;
    const std::size_t kc = zs_.size();
    Moments out{std::vector<cplx>(kc), std::vector<cplx>(kc), std::vector<cplx>(kc)};
    for (std::size_t k = 0; k < kc; ++k) {
      cplx s = 0.0;
      for (const cplx& m : pools_[k]) s += std::log(m);
      out.log_m[k] = s / double(n);
    }
    a2_.resize(cfg_.d);
    idx_.resize(cfg_.d);
    for (int step = 0; step < n; ++step) {
      const double b = cfg_.b.sample(rng_);
      for (int i = 0; i < cfg_.d; ++i) {
        const double a = cfg_.a.sample(rng_);
        a2_[i] = a * a;
        idx_[i] = static_cast<int>(rng_.below(n));
      }
      for (std::size_t k = 0; k < kc; ++k) {
        cplx den = -zs_[k] + b;
        for (int i = 0; i < cfg_.d; ++i) den -= a2_[i] * pools_[k][idx_[i]];
        const cplx g = 1.0 / den;
        out.log_G[k] += std::log(g);
        out.G[k] += g;
      }
    }
    for (std::size_t k = 0; k < kc; ++k) {
      out.log_G[k] /= double(n);
      out.G[k] /= double(n);
    }
    return out;
  }

  // Burn-in then per-batch averages of the measured moments.
  std::vector<Moments> run_batches() {
    warm_start();
    const int burn = cfg_.sweeps / 2;
    const int measured = cfg_.sweeps - burn;
    for (int s = 0; s < burn; ++s) sweep(zs_);
    const int nb = std::min(cfg_.batches, measured);
    std::vector<Moments> batches;
    for (int b = 0; b < nb; ++b) {
      const int first = b * measured / nb, last = (b + 1) * measured / nb;
      const std::size_t kc = zs_.size();
      Moments acc{std::vector<cplx>(kc), std::vector<cplx>(kc), std::vector<cplx>(kc)};
      for (int s = first; s < last; ++s) {
        sweep(zs_);
        const Moments m = measure();
        for (std::size_t k = 0; k < kc; ++k) {
          acc.log_m[k] += m.log_m[k];
          acc.log_G[k] += m.log_G[k];
          acc.G[k] += m.G[k];
        }
      }
      const double c = last - first;
      for (std::size_t k = 0; k < kc; ++k) {
        acc.log_m[k] /= c;
        acc.log_G[k] /= c;
        acc.G[k] /= c;
      }
      batches.push_back(std::move(acc));
    }
    return batches;
  }

  const std::vector<cplx>& pool(std::size_t k) const { return pools_[k]; }
  int sweep_count() const { return sweeps_; }

 private:
  AndersonConfig cfg_;
  std::vector<cplx> zs_;
  Rng rng_;
  std::vector<std::vector<cplx>> pools_;
  std::vector<double> a2_;
  std::vector<int> idx_;
  double scale_ = 1.0;
  int sweeps_ = 0;
};

struct MeanErr {
  cplx mean;
  double err = 0.0;
};

MeanErr mean_err(const std::vector<cplx>& x) {
  MeanErr r;
  for (const cplx& v : x) r.mean += v;
  r.mean /= double(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (const cplx& v : x) ss += std::norm(v - r.mean);
    r.err = std::sqrt(ss / (double(x.size()) * double(x.size() - 1)));
  }
  return r;
}

cplx half_thouless(int d, cplx log_G, cplx log_m) {
  return (0.5 * d - 1.0) * log_G - 0.5 * d * log_m;
}

}  // namespace

PopulationState population_run(const AndersonConfig& cfg, cplx z) {
  Lockstep run(cfg, {z});
  run.warm_start();
  for (int s = 0; s < cfg.sweeps; ++s) run.sweep({z});
  return {z, run.pool(0), run.sweep_count()};
}

HalfThouless estimate_half_thouless(const AndersonConfig& cfg, cplx z) {
  Lockstep run(cfg, {z});
  const auto batches = run.run_batches();
  std::vector<cplx> F, lm, lg, g;
  for (const auto& b : batches) {
    F.push_back(half_thouless(cfg.d, b.log_G[0], b.log_m[0]));
    lm.push_back(b.log_m[0]);
    lg.push_back(b.log_G[0]);
    g.push_back(b.G[0]);
  }
  HalfThouless out;
  out.z = z;
  const auto f = mean_err(F);
  out.F = f.mean;
  out.stderr_F = f.err;
  out.E_logm = mean_err(lm).mean;
  out.E_logG = mean_err(lg).mean;
  out.E_G = mean_err(g).mean;
  out.batches = static_cast<int>(batches.size());

  const std::size_t half = lm.size() / 2;
  const auto first = mean_err({lm.begin(), lm.begin() + half});
  const auto second = mean_err({lm.begin() + half, lm.end()});
  out.drift = std::abs(first.mean - second.mean);
  out.drift_stderr = std::hypot(first.err, second.err);
  out.stationary = out.drift <= 3.0 * out.drift_stderr + 1e-12 * (1.0 + std::abs(out.E_logm));
  return out;
}

DerivativeReport derivative_identity_check(const AndersonConfig& cfg, cplx z, double h) {
  if (!(h > 0.0) || !(z.imag() > h)) {
    throw DomainError("derivative check requires Im z > h > 0");
  }
  Lockstep run(cfg, {z + h, z - h, z});
  const auto batches = run.run_batches();
  std::vector<cplx> diff, dF, mg;
  for (const auto& b : batches) {
    const cplx fp = half_thouless(cfg.d, b.log_G[0], b.log_m[0]);
    const cplx fm = half_thouless(cfg.d, b.log_G[1], b.log_m[1]);
    const cplx d = (fp - fm) / (2.0 * h);
    dF.push_back(d);
    mg.push_back(-b.G[2]);
    diff.push_back(d + b.G[2]);
  }
  DerivativeReport out;
  out.z = z;
  out.h = h;
  out.dF = mean_err(dF).mean;
  out.minus_EG = mean_err(mg).mean;
  const auto de = mean_err(diff);
  out.difference = de.mean;
  out.stderr_diff = de.err;
  const double y = z.imag();
  out.curvature_bound = h * h / (3.0 * y * y * y);
  out.pass = std::abs(out.difference) < 3.0 * (out.stderr_diff + out.curvature_bound);
  return out;
}

}  // namespace jtree

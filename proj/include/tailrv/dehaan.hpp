#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/representer.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

struct DeHaanConfig {
  double truncation_tol = 1e-3;
  std::uint64_t max_terms = 100000;
};

struct DeHaanSample {
  CadlagPath path;
  std::uint64_t terms = 0;
  bool truncated = false;   // max_terms hit with tolerance unmet
  double error_bound = 0.0; // relative bound on the unseen tail at stop time
};

struct DeHaanBatch {
  std::vector<DeHaanSample> samples;
  std::vector<CadlagPath> paths() const {
    std::vector<CadlagPath> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.path);
    return out;
  }
};

/// X(t) = max_{i >= 1} Gamma_i^{-1/alpha} Z^{(i)}(t), truncated when the next
/// term's possible contribution, bounded pointwise by the running max of the
/// observed spectral values, drops below truncation_tol of the running
/// maximum at every grid point and component.
inline DeHaanSample sample_dehaan_one(const RepresenterSampler& spectral, const DeHaanConfig& cfg,
                                      Rng& rng) {
  if (!spectral.unit_weight())
    throw error(errc::config, "de Haan series needs a direct (unit-weight) spectral sampler");
  const double alpha = spectral.alpha().alpha;
  const GridSpec& g = spectral.grid();
  const std::size_t m = g.cells() * static_cast<std::size_t>(g.dim_x);

  DeHaanSample out;
  out.path = CadlagPath::zero(g);
  std::vector<double> zmax(m, 0.0);  // pointwise running max of observed Z
  auto& x = out.path.values();
  double gamma = 0.0;

  while (out.terms < cfg.max_terms) {
    gamma += rng.exponential();
    double factor = std::pow(gamma, -1.0 / alpha);
    CadlagPath z = spectral.draw(rng).path;
    const auto& zv = z.values();
    ++out.terms;
    for (std::size_t i = 0; i < m; ++i) {
      double contrib = factor * zv[i];
      if (contrib > x[i]) x[i] = contrib;
      if (zv[i] > zmax[i]) zmax[i] = zv[i];
    }
    // stop once factor * zmax <= tol * x everywhere
    double worst = 0.0;
    bool undecided = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (x[i] > 0.0) {
        double ratio = factor * zmax[i] / x[i];
        if (ratio > worst) worst = ratio;
      } else if (zmax[i] > 0.0) {
        undecided = true;
        break;
      }
    }
    if (!undecided && worst <= cfg.truncation_tol) {
      out.error_bound = worst;
      return out;
    }
    out.error_bound = worst;
  }
  out.truncated = true;
  return out;
}

inline DeHaanBatch sample_dehaan_maxstable(const RepresenterSampler& spectral,
                                           const DeHaanConfig& cfg, std::uint64_t n,
                                           const McOptions& opt) {
  DeHaanBatch batch;
  batch.samples.resize(n);
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  Rng base = Rng(opt.seed).derive(role::dehaan);
  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    for (std::uint64_t i = lo; i < hi; ++i) batch.samples[i] = sample_dehaan_one(spectral, cfg, rng);
  };
  detail::parallel_workers(workers, threads, work);
  return batch;
}

}  // namespace tailrv

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/functional.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/moduli.hpp"
#include "tailrv/norms.hpp"
#include "tailrv/pareto.hpp"
#include "tailrv/path.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

/// Seeded generator of D-valued random elements Z.  Draws carry importance
/// weights; direct samplers emit weight 1.  Paths with Z*_Q = 0 are rejected
/// (with a cap), matching the representer normalisation P{Z*_Q != 0} = 1.
class RepresenterSampler {
 public:
  RepresenterSampler() = default;

  RepresenterSampler(GridSpec grid, TailIndex alpha, NormChoice norm, std::size_t anchor,
                     std::function<WeightedPath(Rng&)> draw_fn, bool unit_weight = true)
      : grid_(std::move(grid)),
        alpha_(alpha),
        norm_(norm),
        anchor_(anchor),
        draw_fn_(std::move(draw_fn)),
        unit_weight_(unit_weight) {
    alpha_.validate();
  }

  WeightedPath draw(Rng& rng) const {
    for (int tries = 0; tries < 1024; ++tries) {
      WeightedPath wp = draw_fn_(rng);
      if (wp.weight == 0.0) return wp;  // contributes nothing; no need to reject
      const auto& p = wp.path;
      for (std::size_t c = 0; c < p.grid().cells(); ++c)
        if (p.norm_at(c, norm_) > 0.0) return wp;
    }
    throw error(errc::degenerate_site, "representer emitted 1024 identically-zero paths");
  }

  const GridSpec& grid() const { return grid_; }
  TailIndex alpha() const { return alpha_; }
  NormChoice norm() const { return norm_; }
  std::size_t anchor() const { return anchor_; }
  bool unit_weight() const { return unit_weight_; }

 private:
  GridSpec grid_;
  TailIndex alpha_{};
  NormChoice norm_ = NormChoice::sup;
  std::size_t anchor_ = 0;
  std::function<WeightedPath(Rng&)> draw_fn_;
  bool unit_weight_ = true;
};

/// Deterministic-constant representer, the basic fixture.
inline RepresenterSampler representer_constant(const GridSpec& g, const std::vector<double>& value,
                                               TailIndex alpha, NormChoice norm,
                                               std::size_t anchor = 0) {
  CadlagPath path = CadlagPath::constant(g, value);
  return RepresenterSampler(g, alpha, norm, anchor,
                            [path](Rng&) { return WeightedPath{path, 1.0}; });
}

/// int H(f) 1{||f||_h > eps} nu(df)
///   = eps^-alpha E[ ||Z||_h^alpha H((eps R / ||Z||_h) . Z) ].
/// Draws with ||Z||_h = 0 contribute 0; the eps^-alpha prefactor is applied
/// as a single multiply so the estimator is exactly -alpha-homogeneous in eps.
inline MCEstimate representer_functional(const RepresenterSampler& z, const Functional& h,
                                         std::size_t site, double eps, std::uint64_t n,
                                         const McOptions& opt,
                                         std::uint64_t role_salt = role::representer) {
  if (!(eps > 0.0)) throw error(errc::config, "eps must be positive");
  if (n < 2) throw error(errc::config, "representer_functional needs n >= 2");
  const double alpha = z.alpha().alpha;
  ParetoSampler pareto(z.alpha());
  std::atomic<std::uint64_t> live{0};

  auto kernel = [&](Rng& rng, McCtx& ctx) -> double {
    WeightedPath wp = z.draw(rng);
    double r = pareto.draw(rng);
    double s = wp.path.norm_at(site, z.norm());
    if (!(s > 0.0) || wp.weight == 0.0) return 0.0;
    live.fetch_add(1, std::memory_order_relaxed);
    CadlagPath scaled = wp.path.scaled(eps * r / s);
    double hv = ctx.clip(h.eval(scaled));
    return wp.weight * std::pow(s, alpha) * hv;
  };

  MCEstimate est = mc_estimate(opt, role_salt, n, kernel);
  if (live.load() == 0)
    throw error(errc::degenerate_site, "all draws had zero norm at the requested site");
  return est.scaled(std::pow(eps, -alpha));
}

/// Weighted sample set approximating the law of Y^[h] (Dirac mixture with
/// Radon-Nikodym weights ||Z||_h^alpha).
struct WeightedSampleSet {
  std::vector<CadlagPath> paths;
  std::vector<double> weights;
  std::uint64_t seed = 0;

  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

enum class ResampleMode { systematic, multinomial };

/// Emits n pairs ((R/||Z||_h) . Z, w ||Z||_h^alpha).  Self-normalised weights
/// estimate the law of Y^[h]; see resample_to_paths for unweighted draws.
inline WeightedSampleSet tilt_sample_y(const RepresenterSampler& z, std::size_t site,
                                       std::uint64_t n, const McOptions& opt,
                                       std::uint64_t role_salt = role::representer) {
  const double alpha = z.alpha().alpha;
  ParetoSampler pareto(z.alpha());
  WeightedSampleSet set;
  set.seed = opt.seed;
  set.paths.resize(n);
  set.weights.assign(n, 0.0);

  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  Rng base = Rng(opt.seed).derive(role_salt);
  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    for (std::uint64_t i = lo; i < hi; ++i) {
      WeightedPath wp = z.draw(rng);
      double r = pareto.draw(rng);
      double s = wp.path.norm_at(site, z.norm());
      if (!(s > 0.0) || wp.weight == 0.0) {
        set.paths[i] = wp.path;  // weight stays 0
        continue;
      }
      set.weights[i] = wp.weight * std::pow(s, alpha);
      wp.path.scale_in_place(r / s);
      set.paths[i] = std::move(wp.path);
    }
  };
  detail::parallel_workers(workers, threads, work);

  if (!(set.total_weight() > 0.0))
    throw error(errc::degenerate_site, "estimated p_h is zero at the requested site");
  return set;
}

/// Systematic (default) or multinomial resampling to unweighted draws.  With
/// equal weights, systematic resampling reproduces the input sample exactly.
inline std::vector<CadlagPath> resample_to_paths(const WeightedSampleSet& set, std::uint64_t m,
                                                 Rng rng,
                                                 ResampleMode mode = ResampleMode::systematic) {
  const std::size_t n = set.paths.size();
  double total = set.total_weight();
  if (!(total > 0.0)) throw error(errc::degenerate_site, "cannot resample zero-weight set");
  std::vector<CadlagPath> out;
  out.reserve(m);
  if (mode == ResampleMode::systematic) {
    double u = rng.uniform() * total / static_cast<double>(m);
    double step = total / static_cast<double>(m);
    double cum = 0.0;
    std::size_t i = 0;
    for (std::uint64_t k = 0; k < m; ++k) {
      double target = u + static_cast<double>(k) * step;
      while (i + 1 < n && cum + set.weights[i] <= target) cum += set.weights[i++];
      out.push_back(set.paths[i]);
    }
  } else {
    std::vector<double> cdf(n);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cum += set.weights[i];
      cdf[i] = cum;
    }
    for (std::uint64_t k = 0; k < m; ++k) {
      double target = rng.uniform() * total;
      auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
      out.push_back(set.paths[static_cast<std::size_t>(it - cdf.begin())]);
    }
  }
  return out;
}

/// Theta^[h] = Y / ||Y||_h.
inline CadlagPath spectral_from_y(const CadlagPath& y, std::size_t site, NormChoice norm) {
  double s = y.norm_at(site, norm);
  if (!(s > 0.0)) throw error(errc::division_by_zero_norm, "||Y||_h = 0");
  CadlagPath out = y;
  for (auto& v : out.values()) v /= s;
  return out;
}

struct BoundednessReport {
  MCEstimate estimate;
  bool pass = false;
  RunningMeans means;
};

/// MC estimate of E[(Z*_K)^alpha] with a divergence heuristic: fail when the
/// running mean doubles across the last two sample doublings.  A trend
/// diagnostic, not a finiteness proof.
inline BoundednessReport compact_boundedness_representer(const RepresenterSampler& z,
                                                         const Window& k, std::uint64_t n,
                                                         const McOptions& opt) {
  if (n < 2) throw error(errc::config, "need n >= 2");
  const double alpha = z.alpha().alpha;
  auto kernel = [&](Rng& rng, McCtx&) -> double {
    WeightedPath wp = z.draw(rng);
    if (wp.weight == 0.0) return 0.0;
    double s = sup_norm(wp.path, k, z.norm());
    return wp.weight * std::pow(s, alpha);
  };
  auto [est, rm] = mc_estimate_with_checkpoints(opt, role::representer, n, kernel);
  BoundednessReport rep;
  rep.estimate = est;
  rep.means = rm;
  bool grew1 = rm.m_quarter <= 0.0 ? rm.m_half > 0.0 : rm.m_half >= 2.0 * rm.m_quarter;
  bool grew2 = rm.m_half <= 0.0 ? rm.m_full > 0.0 : rm.m_full >= 2.0 * rm.m_half;
  rep.pass = !(grew1 && grew2);
  return rep;
}

}  // namespace tailrv

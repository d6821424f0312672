#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/pareto.hpp"
#include "tailrv/representer.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

/// Any seeded path generator (a "process"): one draw per call.
using PathSampler = std::function<CadlagPath(Rng&)>;

inline std::vector<CadlagPath> sample_paths(const PathSampler& p, std::uint64_t n,
                                            const McOptions& opt, std::uint64_t role_tag) {
  std::vector<CadlagPath> out(n);
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  Rng base = Rng(opt.seed).derive(role_tag);
  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = p(rng);
  };
  detail::parallel_workers(workers, threads, work);
  return out;
}

/// X = R . Z with R alpha-Pareto independent of Z (per-draw fresh R).
inline PathSampler scaled_pareto_sampler(const RepresenterSampler& z) {
  if (!z.unit_weight())
    throw error(errc::config, "scaled-Pareto process needs a direct (unit-weight) representer");
  ParetoSampler pareto(z.alpha());
  return [z, pareto](Rng& rng) {
    CadlagPath p = z.draw(rng).path;
    double r = pareto.draw(rng);
    p.scale_in_place(r);
    return p;
  };
}

inline std::vector<CadlagPath> sample_scaled_pareto(const RepresenterSampler& z, std::uint64_t n,
                                                    const McOptions& opt) {
  return sample_paths(scaled_pareto_sampler(z), n, opt, role::representer);
}

/// X_{f,sigma}(t) = sigma(t) X(t) + f(t); sigma is scalar-valued and must not
/// vanish at any grid point.
inline CadlagPath transform_scale_shift(const CadlagPath& x, const CadlagPath& sigma,
                                        const CadlagPath& shift_f) {
  if (!x.same_grid(sigma) || !x.same_grid(shift_f))
    throw error(errc::incompatible_grids, "scale/shift paths must share the grid");
  if (sigma.grid().dim_x != 1) throw error(errc::invalid_sigma, "sigma must be scalar-valued");
  const GridSpec& g = x.grid();
  for (std::size_t c = 0; c < g.cells(); ++c)
    if (sigma.at(c)[0] == 0.0) throw error(errc::invalid_sigma, "sigma vanishes at a grid point");
  CadlagPath out = x;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    double s = sigma.at(c)[0];
    for (int j = 0; j < g.dim_x; ++j) out.at(c)[j] = s * x.at(c)[j] + shift_f.at(c)[j];
  }
  return out;
}

struct RandomScaleResult {
  std::vector<CadlagPath> paths;
  MCEstimate moment;     // estimate of E[(sup_K ||sigma||)^{alpha+eps}]
  bool moment_warning = false;
  bool degenerate_sigma = false;  // P{sigma(t) != 0} diagnostic failed
};

/// Pointwise products sigma_i . X_i from independent derived streams, with the
/// (alpha+eps)-moment diagnostic on sup ||sigma|| (warning only, not fatal).
inline RandomScaleResult random_scale(const PathSampler& x, const PathSampler& sigma,
                                      std::uint64_t n, double alpha, const McOptions& opt,
                                      double moment_eps = 0.5) {
  RandomScaleResult res;
  auto xs = sample_paths(x, n, opt, role::representer);
  auto ss = sample_paths(sigma, n, opt, role::scaler);
  res.paths.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const CadlagPath& sp = ss[i];
    if (!xs[i].same_grid(sp)) throw error(errc::incompatible_grids, "sigma grid mismatch");
    if (sp.grid().dim_x != 1) throw error(errc::invalid_sigma, "sigma must be scalar-valued");
    CadlagPath out = xs[i];
    const GridSpec& g = out.grid();
    for (std::size_t c = 0; c < g.cells(); ++c) {
      double s = sp.at(c)[0];
      for (int j = 0; j < g.dim_x; ++j) out.at(c)[j] *= s;
    }
    res.paths.push_back(std::move(out));
  }

  // moment diagnostic on an independent substream
  McOptions mopt = opt;
  mopt.seed = seed_mix(opt.seed, 0x5151);
  auto [est, rm] = mc_estimate_with_checkpoints(mopt, role::scaler, std::max<std::uint64_t>(n, 1000),
                                                [&](Rng& rng, McCtx&) {
                                                  CadlagPath sp = sigma(rng);
                                                  double m = 0.0;
                                                  for (std::size_t c = 0; c < sp.grid().cells(); ++c)
                                                    m = std::max(m, std::fabs(sp.at(c)[0]));
                                                  return std::pow(m, alpha + moment_eps);
                                                });
  res.moment = est;
  bool grew1 = rm.m_quarter <= 0.0 ? rm.m_half > 0.0 : rm.m_half >= 2.0 * rm.m_quarter;
  bool grew2 = rm.m_half <= 0.0 ? rm.m_full > 0.0 : rm.m_full >= 2.0 * rm.m_half;
  res.moment_warning = grew1 && grew2;
  res.degenerate_sigma = est.value == 0.0;  // sigma identically zero
  return res;
}

}  // namespace tailrv

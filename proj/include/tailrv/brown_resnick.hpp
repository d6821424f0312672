#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "tailrv/gaussian.hpp"
#include "tailrv/pareto.hpp"
#include "tailrv/representer.hpp"

namespace tailrv {

/// Spectral process of a Brown-Resnick max-stable field:
///   Z_i(t) = exp( V_i(t) - alpha Var(V_i(t)) / 2 ),  E[Z_i(t)^alpha] = 1.
struct BrownResnickSpec {
  GaussianSpec gaussian;
  TailIndex alpha;
};

class BrownResnickSampler {
 public:
  BrownResnickSampler(GridSpec grid, BrownResnickSpec spec)
      : gauss_(std::make_shared<GaussianSampler>(std::move(grid), spec.gaussian)),
        alpha_(spec.alpha) {
    alpha_.validate();
    const auto& g = gauss_->grid();
    drift_.resize(g.cells() * static_cast<std::size_t>(g.dim_x));
    for (std::size_t c = 0; c < g.cells(); ++c)
      for (int i = 0; i < g.dim_x; ++i)
        drift_[c * g.dim_x + i] = alpha_.alpha * gauss_->variance(c, i) / 2.0;
  }

  CadlagPath draw(Rng& rng) const {
    CadlagPath v = gauss_->draw(rng);
    auto& vals = v.values();
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::exp(vals[i] - drift_[i]);
    return v;
  }

  const GridSpec& grid() const { return gauss_->grid(); }
  TailIndex alpha() const { return alpha_; }

 private:
  std::shared_ptr<GaussianSampler> gauss_;
  TailIndex alpha_;
  std::vector<double> drift_;
};

inline std::vector<CadlagPath> sample_brown_resnick_spectral(const BrownResnickSampler& br,
                                                             std::uint64_t n, const McOptions& opt) {
  std::vector<CadlagPath> out(n);
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  Rng base = Rng(opt.seed).derive(role::gaussian);
  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = br.draw(rng);
  };
  detail::parallel_workers(workers, threads, work);
  return out;
}

/// Brown-Resnick spectral process as a representer of nu_Z.  For d = 1 the
/// lognormal identity gives E[Z(t)^alpha] = 1 exactly at every site.
inline RepresenterSampler brown_resnick_representer(const GridSpec& grid, BrownResnickSpec spec,
                                                    NormChoice norm, std::size_t anchor = 0) {
  auto br = std::make_shared<BrownResnickSampler>(grid, std::move(spec));
  return RepresenterSampler(grid, br->alpha(), norm, anchor,
                            [br](Rng& rng) { return WeightedPath{br->draw(rng), 1.0}; });
}

}  // namespace tailrv

#pragma once

#include <cmath>

#include "tailrv/errors.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

struct TailIndex {
  double alpha = 1.0;
  void validate() const {
    if (!(alpha > 0.0)) throw error(errc::config, "tail index alpha must be > 0");
  }
};

/// alpha-Pareto: P{R > t} = t^-alpha, t >= 1.
class ParetoSampler {
 public:
  explicit ParetoSampler(TailIndex alpha) : alpha_(alpha) { alpha_.validate(); }

  double draw(Rng& rng) const { return std::pow(rng.uniform_open(), -1.0 / alpha_.alpha); }

  static double cdf(double t, double alpha) { return t < 1.0 ? 0.0 : 1.0 - std::pow(t, -alpha); }

  TailIndex alpha() const { return alpha_; }

 private:
  TailIndex alpha_;
};

}  // namespace tailrv

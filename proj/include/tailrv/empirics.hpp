#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/moduli.hpp"
#include "tailrv/norms.hpp"
#include "tailrv/path.hpp"
#include "tailrv/tail_family.hpp"

namespace tailrv {

class EmpiricalCDF {
 public:
  explicit EmpiricalCDF(std::vector<double> sample) : x_(std::move(sample)) {
    if (x_.empty()) throw error(errc::degenerate_sample, "empty sample");
    std::sort(x_.begin(), x_.end());
  }

  double operator()(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    return static_cast<double>(it - x_.begin()) / static_cast<double>(x_.size());
  }

  double quantile(double q) const {
    if (q <= 0.0) return x_.front();
    if (q >= 1.0) return x_.back();
    auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(x_.size()))) - 1;
    return x_[std::min(idx, x_.size() - 1)];
  }

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& sorted() const { return x_; }

 private:
  std::vector<double> x_;
};

/// sup_t |F_n(t) - F(t)| against a reference CDF.
inline double ks_one_sample(const EmpiricalCDF& ecdf, const std::function<double(double)>& cdf) {
  const auto& x = ecdf.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = cdf(x[i]);
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - f));
  }
  return d;
}

inline double ks_two_sample(const EmpiricalCDF& a, const EmpiricalCDF& b) {
  const auto& xa = a.sorted();
  const auto& xb = b.sorted();
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xa.size() && j < xb.size()) {
    double v = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] <= v) ++i;
    while (j < xb.size() && xb[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / static_cast<double>(xa.size()) -
                              static_cast<double>(j) / static_cast<double>(xb.size())));
  }
  return d;
}

/// DKW band at confidence 1-delta: sqrt(ln(2/delta) / (2n)).
inline double dkw_band(std::uint64_t n, double delta = 0.01) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

/// Asymptotic two-sample KS critical value at the given level.
inline double ks_two_sample_critical(std::uint64_t n, std::uint64_t m, double level = 0.01) {
  double c = std::sqrt(-std::log(level / 2.0) / 2.0);
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

struct HillEstimate {
  double alpha_hat = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  std::size_t k = 0;
};

/// alpha_hat = k / sum_{i<=k} ln(X_(i)/X_(k+1)) over descending order stats,
/// CI alpha_hat (1 +- 1.96/sqrt(k)).
inline HillEstimate hill_estimator(std::vector<double> sample, std::size_t k) {
  if (k < 1 || k + 1 > sample.size())
    throw error(errc::config, "hill estimator needs 1 <= k < sample size");
  for (double v : sample)
    if (!(v > 0.0)) throw error(errc::degenerate_sample, "hill estimator needs positive values");
  std::sort(sample.begin(), sample.end(), std::greater<double>());
  double denom = 0.0;
  for (std::size_t i = 0; i < k; ++i) denom += std::log(sample[i] / sample[k]);
  if (!(denom > 0.0)) throw error(errc::degenerate_sample, "ties make the Hill denominator zero");
  HillEstimate h;
  h.k = k;
  h.alpha_hat = static_cast<double>(k) / denom;
  double half = 1.96 / std::sqrt(static_cast<double>(k));
  h.ci_lo = h.alpha_hat * (1.0 - half);
  h.ci_hi = h.alpha_hat * (1.0 + half);
  return h;
}

/// {u^-1 X_i : ||X_i||_h > u} -- the empirical conditional law approximating
/// Y^[h].  The condition is checked on the rescaled path so every output
/// satisfies ||.||_h > 1 exactly.
inline std::vector<CadlagPath> conditional_exceedance(const std::vector<CadlagPath>& batch,
                                                      std::size_t site, double u, NormChoice norm,
                                                      std::size_t min_count = 50) {
  std::vector<CadlagPath> out;
  for (const auto& x : batch) {
    CadlagPath y = x.scaled(1.0 / u);
    if (y.norm_at(site, norm) > 1.0) out.push_back(std::move(y));
  }
  if (out.size() < min_count)
    throw error(errc::insufficient_exceedances,
                "only " + std::to_string(out.size()) + " exceedances at the threshold");
  return out;
}

/// z -> #{||X||_h > z} / #{||X||_t0 > z}; undefined points are NaN.
inline std::vector<double> ph_ratio(const std::vector<CadlagPath>& batch, std::size_t site_h,
                                    std::size_t site_t0, const std::vector<double>& zs,
                                    NormChoice norm) {
  std::vector<double> nh(zs.size(), 0.0), nt(zs.size(), 0.0);
  for (const auto& x : batch) {
    double a = x.norm_at(site_h, norm);
    double b = x.norm_at(site_t0, norm);
    for (std::size_t j = 0; j < zs.size(); ++j) {
      if (a > zs[j]) nh[j] += 1.0;
      if (b > zs[j]) nt[j] += 1.0;
    }
  }
  std::vector<double> out(zs.size());
  for (std::size_t j = 0; j < zs.size(); ++j)
    out[j] = nt[j] > 0.0 ? nh[j] / nt[j] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// Conservative stderr for a count ratio (independent-binomial approximation).
inline double ratio_stderr(double num, double den, std::uint64_t n) {
  if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  double r = num / den;
  double nn = static_cast<double>(n);
  double vh = num * (1.0 - num / nn);
  double vt = den * (1.0 - den / nn);
  return r * std::sqrt((num > 0 ? vh / (num * num) : 0.0) + vt / (den * den));
}

struct DiagnosticTable {
  std::vector<double> etas, zs;
  std::vector<double> value;  // row-major [eta][z]; NaN = undefined cell
  std::vector<double> se;

  double at(std::size_t i, std::size_t j) const { return value[i * zs.size() + j]; }
};

enum class TightnessRoute { w_prime, w_doubleprime };

namespace detail {

/// w'' for any l via per-axis line scans (reduces to the 1-d modulus at l=1).
inline double w2_multiaxis(const CadlagPath& f, const Window& k, double delta, NormChoice norm) {
  const GridSpec& g = f.grid();
  if (g.dim_t == 1) return modulus_w_doubleprime(f, k, delta, norm);
  double best = 0.0;
  auto cells = cells_in_window(g, k);
  // group cells into lines along each axis
  for (int axis = 0; axis < g.dim_t; ++axis) {
    // key = multi-index with this axis zeroed
    std::vector<std::pair<std::vector<std::size_t>, std::size_t>> keyed;
    keyed.reserve(cells.size());
    for (auto c : cells) {
      auto mi = g.unflatten(c);
      auto key = mi;
      key[axis] = 0;
      keyed.emplace_back(std::move(key), c);
    }
    std::sort(keyed.begin(), keyed.end());
    std::size_t start = 0;
    while (start < keyed.size()) {
      std::size_t end = start;
      while (end < keyed.size() && keyed[end].first == keyed[start].first) ++end;
      // cells keyed[start..end) form one line, ordered along the axis
      const std::size_t m = end - start;
      if (m >= 3) {
        const double w = g.width(axis);
        const auto max_gap = static_cast<std::size_t>(std::floor(delta / w + 1e-9));
        for (std::size_t a = start; a + 2 < end; ++a) {
          std::size_t umax = std::min(end - 1, a + max_gap);
          for (std::size_t t = a + 1; t < umax; ++t) {
            double d1 = detail::pair_dist(f, keyed[t].second, keyed[a].second, norm);
            if (d1 <= best) continue;
            for (std::size_t uu = t + 1; uu <= umax; ++uu) {
              double d2 = detail::pair_dist(f, keyed[uu].second, keyed[t].second, norm);
              best = std::max(best, std::min(d1, d2));
            }
          }
        }
      }
      start = end;
    }
  }
  return best;
}

}  // namespace detail

/// Matrix of P{ w(X,K,eta) > eps z } / P{ ||X||_t0 > z } over (eta, z).
/// The qualitative tightness check is decay toward 0 as eta drops.
inline DiagnosticTable tightness_diagnostic(const std::vector<CadlagPath>& batch, const Window& k,
                                            double eps, std::size_t site_t0,
                                            const std::vector<double>& etas,
                                            const std::vector<double>& zs, NormChoice norm,
                                            TightnessRoute route = TightnessRoute::w_prime) {
  if (batch.empty()) throw error(errc::degenerate_sample, "empty batch");
  if (route == TightnessRoute::w_prime && batch.front().grid().dim_t != 1)
    throw error(errc::unsupported_dimension, "w' route is l = 1 only");
  DiagnosticTable tab;
  tab.etas = etas;
  tab.zs = zs;
  tab.value.assign(etas.size() * zs.size(), 0.0);
  tab.se.assign(etas.size() * zs.size(), 0.0);

  std::vector<double> den(zs.size(), 0.0);
  for (const auto& x : batch) {
    double b = x.norm_at(site_t0, norm);
    for (std::size_t j = 0; j < zs.size(); ++j)
      if (b > zs[j]) den[j] += 1.0;
  }
  for (std::size_t i = 0; i < etas.size(); ++i) {
    std::vector<double> num(zs.size(), 0.0);
    for (const auto& x : batch) {
      double w = route == TightnessRoute::w_prime ? modulus_w_prime(x, k, etas[i], norm)
                                                  : detail::w2_multiaxis(x, k, etas[i], norm);
      for (std::size_t j = 0; j < zs.size(); ++j)
        if (w > eps * zs[j]) num[j] += 1.0;
    }
    for (std::size_t j = 0; j < zs.size(); ++j) {
      auto idx = i * zs.size() + j;
      if (den[j] > 0.0) {
        tab.value[idx] = num[j] / den[j];
        tab.se[idx] = ratio_stderr(num[j], den[j], batch.size());
      } else {
        tab.value[idx] = std::numeric_limits<double>::quiet_NaN();
        tab.se[idx] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return tab;
}

/// P{ X*_K > c eps z, e_K((eps z)^-1 X) <= eta } / P{ ||X||_t0 > z }.
inline DiagnosticTable anticoncentration_diagnostic(const std::vector<CadlagPath>& batch,
                                                    const Window& k, double eps, double c,
                                                    const std::vector<double>& etas,
                                                    const std::vector<double>& zs,
                                                    const std::vector<double>& q,
                                                    std::size_t site_t0, NormChoice norm,
                                                    BaseMeasure lambda = BaseMeasure::counting) {
  if (!(c > 1.0)) throw error(errc::config, "anticoncentration needs c > 1");
  if (batch.empty()) throw error(errc::degenerate_sample, "empty batch");
  const GridSpec& g = batch.front().grid();
  auto kcells = cells_in_window(g, k);
  const double lam = lambda == BaseMeasure::counting ? 1.0 : g.cell_volume();

  DiagnosticTable tab;
  tab.etas = etas;
  tab.zs = zs;
  tab.value.assign(etas.size() * zs.size(), 0.0);
  tab.se.assign(etas.size() * zs.size(), 0.0);

  std::vector<double> den(zs.size(), 0.0);
  std::vector<std::vector<double>> num(etas.size(), std::vector<double>(zs.size(), 0.0));
  std::vector<double> norms(kcells.size());
  for (const auto& x : batch) {
    double b = x.norm_at(site_t0, norm);
    for (std::size_t j = 0; j < zs.size(); ++j)
      if (b > zs[j]) den[j] += 1.0;
    double supk = 0.0;
    for (std::size_t ci = 0; ci < kcells.size(); ++ci) {
      norms[ci] = x.norm_at(kcells[ci], norm);
      supk = std::max(supk, norms[ci]);
    }
    for (std::size_t j = 0; j < zs.size(); ++j) {
      double level = eps * zs[j];
      if (!(supk > c * level)) continue;
      double ek = 0.0;
      for (std::size_t ci = 0; ci < kcells.size(); ++ci)
        if (norms[ci] > level) ek += q[kcells[ci]] * lam;  // e_K((eps z)^-1 X)
      for (std::size_t i = 0; i < etas.size(); ++i)
        if (ek <= etas[i]) num[i][j] += 1.0;
    }
  }
  for (std::size_t i = 0; i < etas.size(); ++i)
    for (std::size_t j = 0; j < zs.size(); ++j) {
      auto idx = i * zs.size() + j;
      if (den[j] > 0.0) {
        tab.value[idx] = num[i][j] / den[j];
        tab.se[idx] = ratio_stderr(num[i][j], den[j], batch.size());
      } else {
        tab.value[idx] = std::numeric_limits<double>::quiet_NaN();
        tab.se[idx] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  return tab;
}

}  // namespace tailrv

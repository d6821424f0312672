#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/path.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

/// Covariance kernel on grid points plus a d x d cross-component structure.
struct GaussianSpec {
  enum class Kernel { brownian, fbm, squared_exponential };
  Kernel kernel = Kernel::brownian;
  double hurst = 0.5;    // fbm exponent H, variogram |s-t|^{2H}
  double sigma2 = 1.0;   // squared-exponential marginal variance
  double length = 1.0;   // squared-exponential correlation length
  std::vector<double> cross;  // row-major d x d; empty = identity

  static GaussianSpec brownian() { return GaussianSpec{}; }
  static GaussianSpec fbm(double h) {
    GaussianSpec s;
    s.kernel = Kernel::fbm;
    s.hurst = h;
    return s;
  }
  static GaussianSpec squared_exponential(double sigma2, double length) {
    GaussianSpec s;
    s.kernel = Kernel::squared_exponential;
    s.sigma2 = sigma2;
    s.length = length;
    return s;
  }
};

namespace detail {

inline double kernel_eval(const GaussianSpec& spec, const std::vector<double>& s,
                          const std::vector<double>& t) {
  auto nrm = [](const std::vector<double>& v) {
    double x = 0.0;
    for (double a : v) x += a * a;
    return std::sqrt(x);
  };
  std::vector<double> diff(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) diff[i] = s[i] - t[i];
  switch (spec.kernel) {
    case GaussianSpec::Kernel::brownian:
      // two-sided Brownian motion pinned at 0; equals min(s,t) for s,t >= 0
      return 0.5 * (std::fabs(s[0]) + std::fabs(t[0]) - std::fabs(s[0] - t[0]));
    case GaussianSpec::Kernel::fbm: {
      double e = 2.0 * spec.hurst;
      return 0.5 * (std::pow(nrm(s), e) + std::pow(nrm(t), e) - std::pow(nrm(diff), e));
    }
    case GaussianSpec::Kernel::squared_exponential: {
      double r = nrm(diff);
      return spec.sigma2 * std::exp(-r * r / (2.0 * spec.length * spec.length));
    }
  }
  return 0.0;
}

/// Lower Cholesky tolerant of exactly-singular PSD matrices (zero pivots with
/// zero columns, e.g. a Brownian kernel pinned at the origin).
inline bool psd_cholesky(std::vector<double>& a, std::size_t n, std::vector<double>& l) {
  l.assign(n * n, 0.0);
  double scale = 1e-300;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a[i * n + i]));
  const double tol_zero = 1e-12 * scale;
  const double tol_col = 1e-6 * std::sqrt(scale);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (d > tol_zero) {
      double root = std::sqrt(d);
      l[j * n + j] = root;
      for (std::size_t i = j + 1; i < n; ++i) {
        double v = a[i * n + j];
        for (std::size_t k = 0; k < j; ++k) v -= l[i * n + k] * l[j * n + k];
        l[i * n + j] = v / root;
      }
    } else if (d > -tol_zero) {
      l[j * n + j] = 0.0;
      for (std::size_t i = j + 1; i < n; ++i) {
        double v = a[i * n + j];
        for (std::size_t k = 0; k < j; ++k) v -= l[i * n + k] * l[j * n + k];
        if (std::fabs(v) > tol_col) return false;  // not PSD
        l[i * n + j] = 0.0;
      }
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Assembled covariance with a shared, immutable factorization.
class GaussianSampler {
 public:
  GaussianSampler(GridSpec grid, GaussianSpec spec) : grid_(std::move(grid)), spec_(std::move(spec)) {
    grid_.validate();
    if (spec_.kernel == GaussianSpec::Kernel::brownian && grid_.dim_t != 1)
      throw error(errc::unsupported_dimension, "brownian kernel is l = 1 only");
    const std::size_t m = grid_.cells();
    const int d = grid_.dim_x;

    cov_.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      auto ti = grid_.point(i);
      for (std::size_t j = 0; j <= i; ++j) {
        double v = detail::kernel_eval(spec_, ti, grid_.point(j));
        cov_[i * m + j] = v;
        cov_[j * m + i] = v;
      }
    }
    cross_ = spec_.cross;
    if (cross_.empty()) {
      cross_.assign(static_cast<std::size_t>(d) * d, 0.0);
      for (int i = 0; i < d; ++i) cross_[static_cast<std::size_t>(i) * d + i] = 1.0;
    }
    if (cross_.size() != static_cast<std::size_t>(d) * d)
      throw error(errc::config, "cross structure must be d x d");

    // jitter ladder; failure after the ladder is fatal
    const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8};
    bool ok = false;
    for (double jit : ladder) {
      std::vector<double> a = cov_;
      for (std::size_t i = 0; i < m; ++i) a[i * m + i] += jit;
      if (detail::psd_cholesky(a, m, l_time_)) {
        ok = true;
        break;
      }
    }
    if (!ok) throw error(errc::non_psd_kernel, "covariance not PSD after jitter ladder");
    std::vector<double> c = cross_;
    if (!detail::psd_cholesky(c, static_cast<std::size_t>(d), l_cross_))
      throw error(errc::non_psd_kernel, "cross structure not PSD");
  }

  /// Marginal variance of component i at cell c, from the assembled
  /// (pre-jitter) covariance diagonal.
  double variance(std::size_t c, int i) const {
    const std::size_t m = grid_.cells();
    return cov_[c * m + c] * cross_[static_cast<std::size_t>(i) * grid_.dim_x + i];
  }

  CadlagPath draw(Rng& rng) const {
    const std::size_t m = grid_.cells();
    const auto d = static_cast<std::size_t>(grid_.dim_x);
    // stack scratch for small fields; the de Haan series draws here per term
    double sg[256], sw[256];
    std::vector<double> hg, hw;
    double* gm = sg;
    double* wm = sw;
    if (m * d > 256) {
      hg.resize(m * d);
      hw.resize(m * d);
      gm = hg.data();
      wm = hw.data();
    }
    for (std::size_t i = 0; i < m * d; ++i) gm[i] = rng.normal();
    // W = G L_cross^T
    for (std::size_t c = 0; c < m; ++c)
      for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += gm[c * d + j] * l_cross_[i * d + j];
        wm[c * d + i] = s;
      }
    // V = L_time W
    std::vector<double> out(m * d, 0.0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c <= r; ++c) {
        double lrc = l_time_[r * m + c];
        if (lrc == 0.0) continue;
        for (std::size_t i = 0; i < d; ++i) out[r * d + i] += lrc * wm[c * d + i];
      }
    return CadlagPath(grid_, std::move(out));
  }

  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  GaussianSpec spec_;
  std::vector<double> cov_;      // m x m kernel matrix (pre-jitter)
  std::vector<double> cross_;    // d x d
  std::vector<double> l_time_;   // lower Cholesky factors
  std::vector<double> l_cross_;
};

/// n centered Gaussian paths; deterministic for fixed (seed, workers).
inline std::vector<CadlagPath> sample_gaussian(const GaussianSampler& gs, std::uint64_t n,
                                               const McOptions& opt) {
  std::vector<CadlagPath> out(n);
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  Rng base = Rng(opt.seed).derive(role::gaussian);
  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = gs.draw(rng);
  };
  detail::parallel_workers(workers, threads, work);
  return out;
}

}  // namespace tailrv

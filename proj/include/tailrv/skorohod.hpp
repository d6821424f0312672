#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/moduli.hpp"
#include "tailrv/norms.hpp"
#include "tailrv/path.hpp"

namespace tailrv {

/// Piecewise-linear time change with knots at (source, target) pairs.
struct TimeChange {
  // one knot list per axis; strictly increasing in both coordinates
  std::vector<std::vector<std::pair<double, double>>> knots;

  void validate() const {
    for (const auto& axis : knots) {
      if (axis.size() < 2) throw error(errc::config, "time change needs >= 2 knots per axis");
      for (std::size_t i = 1; i < axis.size(); ++i) {
        if (!(axis[i].first > axis[i - 1].first) || !(axis[i].second > axis[i - 1].second))
          throw error(errc::config, "time change knots must be strictly increasing");
      }
    }
  }

  /// sup over chords of |ln slope|; for piecewise-linear maps this is the
  /// max over segments.
  double slope_norm() const {
    double m = 0.0;
    for (const auto& axis : knots)
      for (std::size_t i = 1; i < axis.size(); ++i) {
        double ds = axis[i].first - axis[i - 1].first;
        double dt = axis[i].second - axis[i - 1].second;
        m = std::max(m, std::fabs(std::log(dt / ds)));
      }
    return m;
  }

  double apply(int axis, double x) const {
    const auto& ks = knots[axis];
    if (x <= ks.front().first) return ks.front().second + (x - ks.front().first);
    if (x >= ks.back().first) return ks.back().second + (x - ks.back().first);
    std::size_t i = 1;
    while (ks[i].first < x) ++i;
    double u = (x - ks[i - 1].first) / (ks[i].first - ks[i - 1].first);
    return ks[i - 1].second + u * (ks[i].second - ks[i - 1].second);
  }

  static TimeChange identity(double a, double b) {
    TimeChange tc;
    tc.knots = {{{a, a}, {b, b}}};
    return tc;
  }
};

enum class TaperMode { clamp, linear };

struct SkorohodBudget {
  std::size_t max_span = 0;  // max cells a single alignment segment may span; 0 = auto
  int max_windows = 8;       // explicit windows [-k,k], k = 1..max_windows
  TaperMode taper = TaperMode::clamp;
};

namespace detail {

/// Taper of window [-k,k] sampled at cell centers.  Linear mode follows the
/// interpolation between [-k,k] and [-k-1,k+1]; clamp mode rounds to {0,1}.
inline std::vector<double> window_taper(const GridSpec& g, int k, TaperMode mode) {
  std::vector<double> w(g.cells());
  for (std::size_t c = 0; c < g.cells(); ++c) {
    auto t = g.cell_center(c);
    double m = 0.0;
    for (int i = 0; i < g.dim_t; ++i) m = std::max(m, std::fabs(t[i]));
    double v = std::clamp(static_cast<double>(k) + 1.0 - m, 0.0, 1.0);
    w[c] = (mode == TaperMode::linear) ? v : (v >= 0.5 ? 1.0 : 0.0);
  }
  return w;
}

/// Smallest k >= 1 with the grid window inside [-k,k]^l.
inline int enclosing_window_index(const GridSpec& g) {
  double m = 1.0;
  for (int i = 0; i < g.dim_t; ++i) m = std::max({m, -g.lo[i], g.hi[i]});
  return static_cast<int>(std::ceil(m - 1e-12));
}

/// d_N via DP over monotone grid-edge alignments for l = 1.
///
/// The objective max-slope + max-discrepancy does not decompose directly, so
/// we enumerate the achievable slope-norm levels s (finitely many |ln(p/q)|
/// values at grid knots) and for each run a min-max DP over alignments whose
/// segments all satisfy |ln slope| <= s.  The minimum of s + disc(s) over
/// levels equals the infimum over all grid-knot time changes.
inline double dn_aligned(const CadlagPath& f, const CadlagPath& g,
                         const std::vector<double>& taper, std::size_t span, NormChoice norm) {
  const std::size_t n = f.grid().cells();
  const int d = f.grid().dim_x;
  const double inf = std::numeric_limits<double>::infinity();

  // taper-weighted pair costs pc[c*n+j] = || taper_j f_j - taper_c g_c ||
  std::vector<double> pc(n * n);
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < n; ++j) {
      for (int a = 0; a < d; ++a) diff[static_cast<std::size_t>(a)] = taper[j] * f.at(j)[a] - taper[c] * g.at(c)[a];
      pc[c * n + j] = norm_eval(norm, diff.data(), static_cast<std::size_t>(d));
    }

  auto seg_cost = [&](std::size_t i, std::size_t j, std::size_t dg, std::size_t df,
                      double cutoff) -> double {
    double m = 0.0;
    for (std::size_t c = i; c < i + dg; ++c) {
      // f-cells overlapped by [lambda(c), lambda(c+1)) in exact integers
      std::size_t num_lo = j * dg + (c - i) * df;
      std::size_t num_hi = num_lo + df;
      std::size_t js = num_lo / dg;
      std::size_t je = (num_hi % dg == 0) ? num_hi / dg - 1 : num_hi / dg;
      for (std::size_t jf = js; jf <= je; ++jf) {
        m = std::max(m, pc[c * n + jf]);
        if (m >= cutoff) return m;
      }
    }
    return m;
  };

  auto disc_at_level = [&](double level, double cutoff) -> double {
    std::vector<double> dp((n + 1) * (n + 1), inf);
    dp[0] = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= n; ++j) {
        double cur = dp[i * (n + 1) + j];
        if (cur == inf || cur >= cutoff) continue;
        std::size_t gmax = std::min(span, n - i);
        for (std::size_t dg = 1; dg <= gmax; ++dg) {
          std::size_t fmax = std::min(span, n - j);
          for (std::size_t df = 1; df <= fmax; ++df) {
            double slope = std::fabs(std::log(static_cast<double>(df) / static_cast<double>(dg)));
            if (slope > level + 1e-15) continue;
            // endpoints must meet jointly
            if ((i + dg == n) != (j + df == n)) continue;
            double sc = seg_cost(i, j, dg, df, cutoff);
            double cand = std::max(cur, sc);
            double& cellv = dp[(i + dg) * (n + 1) + (j + df)];
            if (cand < cellv) cellv = cand;
          }
        }
      }
    return dp[n * (n + 1) + n];
  };

  // candidate slope-norm levels
  std::vector<double> levels{0.0};
  for (std::size_t p = 1; p <= span; ++p)
    for (std::size_t q = 1; q <= span; ++q)
      if (p != q)
        levels.push_back(std::fabs(std::log(static_cast<double>(p) / static_cast<double>(q))));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double best = inf;
  for (double s : levels) {
    if (s >= best) break;
    double disc = disc_at_level(s, best - s > 0 ? best - s : 0.0);
    if (disc < inf) best = std::min(best, s + disc);
  }
  return best;
}

}  // namespace detail

/// Per-window distances d_{N(k)}, k = 1..count, for shared-grid paths (l = 1).
inline std::vector<double> skorohod_window_distances(const CadlagPath& f, const CadlagPath& g,
                                                     int count, NormChoice norm,
                                                     const SkorohodBudget& budget = {}) {
  if (!f.same_grid(g)) throw error(errc::incompatible_grids, "paths must share a grid");
  if (f.grid().dim_t != 1)
    throw error(errc::unsupported_dimension, "exact J1 alignment is l = 1 only");
  const std::size_t n = f.grid().cells();
  std::size_t span = budget.max_span ? budget.max_span : (n <= 16 ? n : 8);
  span = std::min(span, n);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    auto taper = detail::window_taper(f.grid(), k, budget.taper);
    out.push_back(detail::dn_aligned(f, g, taper, span, norm));
  }
  return out;
}

/// d_D(f,g) = sum_j 2^-j min(1, d_{N(j)}) with nested windows [-k,k].  Windows
/// beyond the one enclosing the grid all coincide, so the infinite tail sums
/// in closed form; the result is exact over grid-knot time changes whenever
/// the enclosing window is within budget.
inline double skorohod_distance_1d(const CadlagPath& f, const CadlagPath& g, NormChoice norm,
                                   const SkorohodBudget& budget = {}) {
  int k0 = detail::enclosing_window_index(f.grid());
  int w = std::min(k0, std::max(1, budget.max_windows));
  auto dk = skorohod_window_distances(f, g, w, norm, budget);
  double sum = 0.0;
  double pow2 = 1.0;
  for (int j = 1; j <= w; ++j) {
    pow2 *= 0.5;
    sum += pow2 * std::min(1.0, dk[static_cast<std::size_t>(j - 1)]);
  }
  sum += pow2 * std::min(1.0, dk[static_cast<std::size_t>(w - 1)]);  // tail j > w
  return sum;
}

/// Upper bound d_D(f,g) <= (f-g)*_{[-k,k]^l} + 2^-m; valid for any l >= 1.
inline double d_d_upper_bound(const CadlagPath& f, const CadlagPath& g, int k, NormChoice norm,
                              const SkorohodBudget& budget = {}) {
  if (!f.same_grid(g)) throw error(errc::incompatible_grids, "paths must share a grid");
  if (k < 1) throw error(errc::invalid_window, "window index must be >= 1");
  const GridSpec& grid = f.grid();
  CadlagPath diff = f;
  for (std::size_t i = 0; i < diff.values().size(); ++i) diff.values()[i] -= g.values()[i];
  double sup = sup_norm(diff, Window::cube(grid.dim_t, static_cast<double>(k)), norm);

  int k0 = detail::enclosing_window_index(grid);
  int w = std::min(k0, std::max(1, budget.max_windows));
  int m = (k >= k0) ? w : std::min(w, k - 1);
  if (m < 0) m = 0;
  return sup + std::ldexp(1.0, -m);
}

}  // namespace tailrv

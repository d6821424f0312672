#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/norms.hpp"
#include "tailrv/path.hpp"

namespace tailrv {

/// f*_K = max over grid points in K of ||f(t)||; 0 when K holds no grid point.
inline double sup_norm(const CadlagPath& f, const Window& k, NormChoice norm) {
  auto cells = cells_in_window(f.grid(), k);
  double m = 0.0;
  for (auto c : cells) m = std::max(m, f.norm_at(c, norm));
  return m;
}

inline double sup_norm(const CadlagPath& f, NormChoice norm) {
  return sup_norm(f, full_window(f.grid()), norm);
}

/// Membership test for the boundedness B0: f*_K > eps, strictly.
inline bool b0_separated(const CadlagPath& f, const Window& k, double eps, NormChoice norm) {
  return sup_norm(f, k, norm) > eps;
}

namespace detail {

inline double pair_dist(const CadlagPath& f, std::size_t a, std::size_t b, NormChoice norm) {
  const int d = f.grid().dim_x;
  const double* x = f.at(a);
  const double* y = f.at(b);
  if (d == 1) return std::fabs(x[0] - y[0]);
  double buf[64];
  std::vector<double> heap;
  double* diff = buf;
  if (d > 64) {
    heap.resize(d);
    diff = heap.data();
  }
  for (int j = 0; j < d; ++j) diff[j] = x[j] - y[j];
  return norm_eval(norm, diff, static_cast<std::size_t>(d));
}

/// Oscillation over an explicit set of cells (max pairwise distance).
inline double oscillation(const CadlagPath& f, const std::vector<std::size_t>& cells,
                          std::size_t from, std::size_t to, NormChoice norm) {
  if (f.grid().dim_x == 1) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (std::size_t i = from; i < to; ++i) {
      double v = f.at(cells[i])[0];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    return to > from ? mx - mn : 0.0;
  }
  double m = 0.0;
  for (std::size_t i = from; i < to; ++i)
    for (std::size_t j = i + 1; j < to; ++j)
      m = std::max(m, pair_dist(f, cells[i], cells[j], norm));
  return m;
}

inline void require_1d(const CadlagPath& f, const char* op) {
  if (f.grid().dim_t != 1)
    throw error(errc::unsupported_dimension, std::string(op) + " requires l = 1");
}

}  // namespace detail

/// w(f,K) = sup_{s,t in K} ||f(t) - f(s)|| over grid points of K.
inline double modulus_w(const CadlagPath& f, const Window& k, NormChoice norm) {
  auto cells = cells_in_window(f.grid(), k);
  return detail::oscillation(f, cells, 0, cells.size(), norm);
}

/// w'(f,K,eta): exact infimum over grid-aligned partitions of K into intervals
/// of length strictly exceeding eta of the maximal within-part oscillation.
/// Parts are half-open; a cut placed exactly at a jump neutralises it.
inline double modulus_w_prime(const CadlagPath& f, const Window& k, double eta, NormChoice norm) {
  detail::require_1d(f, "modulus_w_prime");
  k.validate(1);
  if (!(eta > 0.0) || eta >= k.length())
    throw error(errc::invalid_eta, "eta must lie in (0, length(K))");
  auto cells = cells_in_window(f.grid(), k);
  const std::size_t m = cells.size();
  if (m <= 1) return 0.0;

  const GridSpec& g = f.grid();
  const double w = g.width(0);
  // Boundary positions: K.lo, the interior grid edges, K.hi.  A part is a run
  // of grid points between consecutive chosen boundaries.
  std::vector<double> pos(m + 1);
  pos[0] = k.lo[0];
  for (std::size_t i = 1; i < m; ++i) pos[i] = g.lo[0] + static_cast<double>(g.unflatten(cells[i])[0]) * w;
  pos[m] = k.hi[0];

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(m + 1, inf);
  dp[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    // part covers points [i, j) with boundaries pos[i], pos[j]
    if (g.dim_x == 1) {
      double mn = inf, mx = -inf;
      for (std::size_t i = j; i-- > 0;) {
        double v = f.at(cells[i])[0];
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        if (!(pos[j] - pos[i] > eta)) continue;
        if (dp[i] == inf) continue;
        dp[j] = std::min(dp[j], std::max(dp[i], mx - mn));
      }
    } else {
      for (std::size_t i = j; i-- > 0;) {
        if (!(pos[j] - pos[i] > eta)) continue;
        if (dp[i] == inf) continue;
        double osc = detail::oscillation(f, cells, i, j, norm);
        dp[j] = std::min(dp[j], std::max(dp[i], osc));
      }
    }
  }
  if (dp[m] == inf) {
    // K too short to split: the single part [K.lo, K.hi] always qualifies
    // since eta < length(K).
    return detail::oscillation(f, cells, 0, m, norm);
  }
  return dp[m];
}

/// w''(f,K,delta) = sup over grid triples s <= t <= u <= s+delta in K of
/// min(||f(t)-f(s)||, ||f(u)-f(t)||).
inline double modulus_w_doubleprime(const CadlagPath& f, const Window& k, double delta,
                                    NormChoice norm) {
  detail::require_1d(f, "modulus_w_doubleprime");
  if (!(delta > 0.0)) throw error(errc::invalid_eta, "delta must be positive");
  auto cells = cells_in_window(f.grid(), k);
  const std::size_t m = cells.size();
  if (m < 3) return 0.0;
  const double w = f.grid().width(0);
  // positions are uniform: u <= s + delta  <=>  (iu - is) * w <= delta
  const auto max_gap = static_cast<std::size_t>(std::floor(delta / w + 1e-9));
  double best = 0.0;
  for (std::size_t is = 0; is + 2 < m; ++is) {
    std::size_t iu_max = std::min(m - 1, is + max_gap);
    for (std::size_t it = is + 1; it < iu_max; ++it) {
      double a = detail::pair_dist(f, cells[it], cells[is], norm);
      if (a <= best) continue;  // min(a, b) <= a
      for (std::size_t iu = it + 1; iu <= iu_max; ++iu) {
        double b = detail::pair_dist(f, cells[iu], cells[it], norm);
        best = std::max(best, std::min(a, b));
      }
    }
  }
  return best;
}

}  // namespace tailrv

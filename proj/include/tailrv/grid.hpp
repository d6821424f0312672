#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tailrv/errors.hpp"

namespace tailrv {

/// Hypercube grid on [a,b) per axis.  Grid points are the left cell edges;
/// they stand in for the countable dense index set of the function space.
struct GridSpec {
  int dim_t = 1;                  // l
  int dim_x = 1;                  // d
  std::vector<double> lo, hi;     // window corners, lo < hi componentwise
  std::vector<std::size_t> res;   // cells per axis

  std::size_t cells() const {
    std::size_t n = 1;
    for (auto r : res) n *= r;
    return n;
  }

  double width(int axis) const {
    return (hi[axis] - lo[axis]) / static_cast<double>(res[axis]);
  }

  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim_t; ++i) v *= width(i);
    return v;
  }

  void validate() const {
    if (dim_t < 1 || dim_x < 1) throw error(errc::config, "dimensions must be positive");
    if (static_cast<int>(lo.size()) != dim_t || static_cast<int>(hi.size()) != dim_t ||
        static_cast<int>(res.size()) != dim_t)
      throw error(errc::config, "window/resolution size mismatch with dim_t");
    for (int i = 0; i < dim_t; ++i) {
      if (!(hi[i] - lo[i] > 0.0)) throw error(errc::invalid_window, "degenerate grid window");
      if (res[i] < 1) throw error(errc::config, "resolution must be >= 1");
    }
  }

  /// Multi-index of flat cell index (lexicographic, first axis major).
  std::vector<std::size_t> unflatten(std::size_t idx) const {
    std::vector<std::size_t> mi(dim_t);
    for (int i = dim_t - 1; i >= 0; --i) {
      mi[i] = idx % res[i];
      idx /= res[i];
    }
    return mi;
  }

  std::size_t flatten(const std::vector<std::size_t>& mi) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim_t; ++i) idx = idx * res[i] + mi[i];
    return idx;
  }

  /// Coordinates of the grid point (left edge) of a cell.
  std::vector<double> point(std::size_t idx) const {
    auto mi = unflatten(idx);
    std::vector<double> t(dim_t);
    for (int i = 0; i < dim_t; ++i) t[i] = lo[i] + static_cast<double>(mi[i]) * width(i);
    return t;
  }

  std::vector<double> cell_center(std::size_t idx) const {
    auto t = point(idx);
    for (int i = 0; i < dim_t; ++i) t[i] += 0.5 * width(i);
    return t;
  }

  /// Cell containing t (right-continuous convention, clamped at the top edge).
  std::size_t locate(const std::vector<double>& t) const {
    std::vector<std::size_t> mi(dim_t);
    for (int i = 0; i < dim_t; ++i) {
      double rel = (t[i] - lo[i]) / width(i);
      auto k = static_cast<long long>(std::floor(rel + 1e-12));
      if (k < 0) k = 0;
      if (k >= static_cast<long long>(res[i])) k = static_cast<long long>(res[i]) - 1;
      mi[static_cast<std::size_t>(i)] = static_cast<std::size_t>(k);
    }
    return flatten(mi);
  }

  bool operator==(const GridSpec& o) const {
    return dim_t == o.dim_t && dim_x == o.dim_x && lo == o.lo && hi == o.hi && res == o.res;
  }
};

/// Closed sub-window [lo, hi] used as the compact set K.
struct Window {
  std::vector<double> lo, hi;

  static Window box(std::vector<double> lo, std::vector<double> hi) { return Window{std::move(lo), std::move(hi)}; }

  static Window interval(double a, double b) { return Window{{a}, {b}}; }

  /// Cube [-k,k]^l.
  static Window cube(int l, double k) {
    return Window{std::vector<double>(l, -k), std::vector<double>(l, k)};
  }

  void validate(int dim_t) const {
    if (static_cast<int>(lo.size()) != dim_t || static_cast<int>(hi.size()) != dim_t)
      throw error(errc::invalid_window, "window dimension mismatch");
    for (int i = 0; i < dim_t; ++i)
      if (!(lo[i] < hi[i])) throw error(errc::invalid_window, "window has lo >= hi");
  }

  bool contains(const std::vector<double>& t) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (t[i] < lo[i] - 1e-12 || t[i] > hi[i] + 1e-12) return false;
    return true;
  }

  double length(int axis = 0) const { return hi[axis] - lo[axis]; }
};

/// Flat indices of grid points inside K, in lexicographic order.
inline std::vector<std::size_t> cells_in_window(const GridSpec& g, const Window& k) {
  k.validate(g.dim_t);
  std::vector<std::size_t> klo(g.dim_t), khi(g.dim_t);
  for (int i = 0; i < g.dim_t; ++i) {
    double w = g.width(i);
    // smallest / largest grid index whose point lies in [lo, hi]
    double a = std::ceil((k.lo[i] - g.lo[i]) / w - 1e-9);
    double b = std::floor((k.hi[i] - g.lo[i]) / w + 1e-9);
    if (a < 0) a = 0;
    if (b > static_cast<double>(g.res[i]) - 1) b = static_cast<double>(g.res[i]) - 1;
    if (a > b) return {};
    klo[i] = static_cast<std::size_t>(a);
    khi[i] = static_cast<std::size_t>(b);
  }
  std::vector<std::size_t> out;
  std::vector<std::size_t> mi = klo;
  while (true) {
    out.push_back(g.flatten(mi));
    int axis = g.dim_t - 1;
    while (axis >= 0) {
      if (++mi[axis] <= khi[axis]) break;
      mi[axis] = klo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

/// Whole grid window as a Window object.
inline Window full_window(const GridSpec& g) { return Window{g.lo, g.hi}; }

}  // namespace tailrv

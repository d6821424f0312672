#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/norms.hpp"

namespace tailrv {

/// Step function on a grid: constant on each half-open cell, values in R^d.
/// This is the finite stand-in for a cadlag path.
class CadlagPath {
 public:
  CadlagPath() = default;

  CadlagPath(GridSpec grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.cells() * static_cast<std::size_t>(grid_.dim_x))
      throw error(errc::config, "values length != cells * dim_x");
  }

  static CadlagPath zero(const GridSpec& g) {
    return CadlagPath(g, std::vector<double>(g.cells() * g.dim_x, 0.0));
  }

  static CadlagPath constant(const GridSpec& g, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != g.dim_x) throw error(errc::config, "constant value dim mismatch");
    std::vector<double> vals(g.cells() * g.dim_x);
    for (std::size_t c = 0; c < g.cells(); ++c)
      for (int j = 0; j < g.dim_x; ++j) vals[c * g.dim_x + j] = v[j];
    return CadlagPath(g, std::move(vals));
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  const double* at(std::size_t cell) const { return values_.data() + cell * grid_.dim_x; }
  double* at(std::size_t cell) { return values_.data() + cell * grid_.dim_x; }

  /// Value at a time point inside the window (right-continuous by construction).
  std::vector<double> evaluate(const std::vector<double>& t) const {
    std::size_t c = grid_.locate(t);
    return std::vector<double>(at(c), at(c) + grid_.dim_x);
  }

  double norm_at(std::size_t cell, NormChoice n) const {
    return norm_eval(n, at(cell), static_cast<std::size_t>(grid_.dim_x));
  }

  CadlagPath scaled(double c) const {
    CadlagPath out = *this;
    for (auto& v : out.values_) v *= c;
    return out;
  }

  void scale_in_place(double c) {
    for (auto& v : values_) v *= c;
  }

  bool same_grid(const CadlagPath& o) const { return grid_ == o.grid_; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Backshift B^h f(.) = f(. - h); h must be grid aligned per axis.  Cells whose
/// preimage leaves the window take the fill value.
inline CadlagPath shift(const CadlagPath& f, const std::vector<double>& h,
                        const std::vector<double>* fill = nullptr) {
  const GridSpec& g = f.grid();
  if (static_cast<int>(h.size()) != g.dim_t) throw error(errc::alignment, "shift dimension mismatch");
  std::vector<long long> steps(g.dim_t);
  for (int i = 0; i < g.dim_t; ++i) {
    double r = h[i] / g.width(i);
    double rr = std::round(r);
    if (std::fabs(r - rr) > 1e-9) throw error(errc::alignment, "shift is not a multiple of the grid step");
    steps[i] = static_cast<long long>(rr);
  }
  std::vector<double> fillv(g.dim_x, 0.0);
  if (fill) {
    if (static_cast<int>(fill->size()) != g.dim_x) throw error(errc::config, "fill dim mismatch");
    fillv = *fill;
  }
  CadlagPath out = CadlagPath::zero(g);
  const std::size_t cells = g.cells();
  for (std::size_t c = 0; c < cells; ++c) {
    auto mi = g.unflatten(c);
    bool inside = true;
    for (int i = 0; i < g.dim_t; ++i) {
      long long src = static_cast<long long>(mi[i]) - steps[i];
      if (src < 0 || src >= static_cast<long long>(g.res[i])) {
        inside = false;
        break;
      }
      mi[i] = static_cast<std::size_t>(src);
    }
    double* dst = out.at(c);
    if (inside) {
      const double* src = f.at(g.flatten(mi));
      for (int j = 0; j < g.dim_x; ++j) dst[j] = src[j];
    } else {
      for (int j = 0; j < g.dim_x; ++j) dst[j] = fillv[j];
    }
  }
  return out;
}

/// Path draw carrying an importance weight.  Direct samplers emit weight 1;
/// tilted constructions emit the unnormalized Radon-Nikodym factor.
struct WeightedPath {
  CadlagPath path;
  double weight = 1.0;
};

}  // namespace tailrv

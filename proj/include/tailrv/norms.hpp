#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "tailrv/errors.hpp"

namespace tailrv {

/// 1-homogeneous norm on the value space R^d.
enum class NormChoice { sup, euclidean, l1 };

inline double norm_eval(NormChoice n, const double* x, std::size_t d) {
  switch (n) {
    case NormChoice::sup: {
      double m = 0.0;
      for (std::size_t i = 0; i < d; ++i) m = std::max(m, std::fabs(x[i]));
      return m;
    }
    case NormChoice::euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += x[i] * x[i];
      return std::sqrt(s);
    }
    case NormChoice::l1: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += std::fabs(x[i]);
      return s;
    }
  }
  return 0.0;
}

inline NormChoice norm_from_string(const std::string& s) {
  if (s == "sup") return NormChoice::sup;
  if (s == "euclidean") return NormChoice::euclidean;
  if (s == "l1") return NormChoice::l1;
  throw error(errc::config, "unknown norm: " + s);
}

inline const char* norm_to_string(NormChoice n) {
  switch (n) {
    case NormChoice::sup: return "sup";
    case NormChoice::euclidean: return "euclidean";
    case NormChoice::l1: return "l1";
  }
  return "?";
}

}  // namespace tailrv

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "tailrv/grid.hpp"
#include "tailrv/moduli.hpp"
#include "tailrv/path.hpp"

namespace tailrv {

/// Evaluatable map H: D -> R with declared homogeneity, boundedness and
/// compact-support data (K_H, eps_H):  H(f) = 0 whenever f*_{K_H} <= eps_H.
struct Functional {
  std::function<double(const CadlagPath&)> eval;
  std::optional<double> homogeneity_degree;
  bool bounded = false;
  struct Support {
    Window k_h;
    double eps_h;
  };
  std::optional<Support> support;
  std::string name = "H";
};

inline Functional functional_one() {
  Functional h;
  h.eval = [](const CadlagPath&) { return 1.0; };
  h.homogeneity_degree = 0.0;
  h.bounded = true;
  h.name = "one";
  return h;
}

inline Functional functional_zero() {
  Functional h;
  h.eval = [](const CadlagPath&) { return 0.0; };
  h.homogeneity_degree = 0.0;
  h.bounded = true;
  h.name = "zero";
  return h;
}

/// H(f) = 1{ f*_K > level }; supported on (K, level).
inline Functional functional_sup_indicator(const Window& k, double level, NormChoice norm) {
  Functional h;
  h.eval = [k, level, norm](const CadlagPath& f) {
    return sup_norm(f, k, norm) > level ? 1.0 : 0.0;
  };
  h.bounded = true;
  h.support = Functional::Support{k, level};
  h.name = "sup_indicator";
  return h;
}

}  // namespace tailrv

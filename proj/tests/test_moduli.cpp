#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tailrv/moduli.hpp"
#include "tailrv/rng.hpp"

using namespace tailrv;

namespace {

GridSpec grid1d(std::size_t cells, double lo = 0.0, double hi = 1.0, int d = 1) {
  GridSpec g;
  g.dim_t = 1;
  g.dim_x = d;
  g.lo = {lo};
  g.hi = {hi};
  g.res = {cells};
  g.validate();
  return g;
}

CadlagPath from_values(const GridSpec& g, const std::vector<double>& v) {
  return CadlagPath(g, v);
}

CadlagPath step_at(const GridSpec& g, double where) {
  CadlagPath p = CadlagPath::zero(g);
  for (std::size_t c = 0; c < g.cells(); ++c)
    p.at(c)[0] = g.point(c)[0] >= where - 1e-12 ? 1.0 : 0.0;
  return p;
}

// ---- independent oracles (value arrays + positions, no library calls) ----

struct Line {
  std::vector<double> pos;  // grid point positions inside K
  std::vector<double> val;  // scalar values
  double klo, khi;
};

Line extract(const CadlagPath& p, const Window& k) {
  Line ln;
  ln.klo = k.lo[0];
  ln.khi = k.hi[0];
  const GridSpec& g = p.grid();
  for (std::size_t c = 0; c < g.cells(); ++c) {
    double t = g.point(c)[0];
    if (t >= k.lo[0] - 1e-12 && t <= k.hi[0] + 1e-12) {
      ln.pos.push_back(t);
      ln.val.push_back(p.at(c)[0]);
    }
  }
  return ln;
}

double oracle_osc(const Line& ln, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t i = from; i < to; ++i)
    for (std::size_t j = from; j < to; ++j) m = std::max(m, std::fabs(ln.val[i] - ln.val[j]));
  return m;
}

/// Exhaustive enumeration over grid-aligned partitions (bitmask over interior
/// cut positions), min length strictly > eta.
double oracle_w_prime(const Line& ln, double eta) {
  const std::size_t m = ln.pos.size();
  if (m <= 1) return 0.0;
  std::vector<double> bounds;  // candidate interior cuts = grid points except the first
  for (std::size_t i = 1; i < m; ++i) bounds.push_back(ln.pos[i]);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t nb = bounds.size();
  for (std::size_t mask = 0; mask < (1ULL << nb); ++mask) {
    // boundaries: klo, chosen cuts, khi
    std::vector<double> cut{ln.klo};
    for (std::size_t b = 0; b < nb; ++b)
      if (mask & (1ULL << b)) cut.push_back(bounds[b]);
    cut.push_back(ln.khi);
    bool ok = true;
    for (std::size_t i = 1; i < cut.size(); ++i)
      if (!(cut[i] - cut[i - 1] > eta)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    double worst = 0.0;
    std::size_t idx = 0;
    for (std::size_t part = 1; part < cut.size(); ++part) {
      std::size_t start = idx;
      while (idx < m && (part == cut.size() - 1 ? ln.pos[idx] <= cut[part] + 1e-12
                                                : ln.pos[idx] < cut[part] - 1e-12))
        ++idx;
      worst = std::max(worst, oracle_osc(ln, start, idx));
    }
    best = std::min(best, worst);
  }
  return best;
}

double oracle_w2(const Line& ln, double delta) {
  double best = 0.0;
  const std::size_t m = ln.pos.size();
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = s; t < m; ++t)
      for (std::size_t u = t; u < m; ++u) {
        if (ln.pos[u] > ln.pos[s] + delta + 1e-12) break;
        best = std::max(best, std::min(std::fabs(ln.val[t] - ln.val[s]),
                                       std::fabs(ln.val[u] - ln.val[t])));
      }
  return best;
}

CadlagPath random_path(const GridSpec& g, Rng& rng) {
  CadlagPath p = CadlagPath::zero(g);
  for (auto& v : p.values()) v = std::floor(rng.uniform() * 5.0);  // small discrete values
  return p;
}

}  // namespace

TEST_CASE("sup_norm fixtures") {
  GridSpec g = grid1d(4, 0.0, 1.0, 2);
  CadlagPath p = CadlagPath::constant(g, {3.0, -4.0});
  CHECK(sup_norm(p, Window::interval(0.0, 1.0), NormChoice::euclidean) == 5.0);

  GridSpec g2 = grid1d(2);  // points 0, 0.5
  CadlagPath q = step_at(g2, 0.5);
  CHECK(sup_norm(q, Window::interval(0.6, 0.9), NormChoice::sup) == 0.0);  // no grid point

  GridSpec g8 = grid1d(8);
  CadlagPath r = step_at(g8, 0.5);
  CHECK(sup_norm(r, Window::interval(0.0, 0.4), NormChoice::sup) == 0.0);  // path is 0 on K
}

TEST_CASE("sup_norm is exactly 1-homogeneous and monotone in K") {
  GridSpec g = grid1d(6, 0.0, 1.0, 2);
  Rng rng(3);
  CadlagPath p = CadlagPath::zero(g);
  for (auto& v : p.values()) v = rng.normal();
  for (double c : {0.5, 2.0, 3.7}) {
    double lhs = sup_norm(p.scaled(c), Window::interval(0.0, 1.0), NormChoice::sup);
    double rhs = c * sup_norm(p, Window::interval(0.0, 1.0), NormChoice::sup);
    CHECK(lhs == rhs);  // sup norm: scaling commutes with max under monotone rounding
  }
  double small = sup_norm(p, Window::interval(0.2, 0.6), NormChoice::euclidean);
  double large = sup_norm(p, Window::interval(0.0, 1.0), NormChoice::euclidean);
  CHECK(small <= large);
}

TEST_CASE("b0 membership is strict") {
  GridSpec g = grid1d(4);
  CadlagPath zero = CadlagPath::zero(g);
  CHECK_FALSE(b0_separated(zero, Window::interval(0.0, 1.0), 0.5, NormChoice::sup));
  CadlagPath two = CadlagPath::constant(g, {2.0});
  CHECK(b0_separated(two, Window::interval(0.0, 1.0), 1.0, NormChoice::sup));
  CHECK_FALSE(b0_separated(two, Window::interval(0.0, 1.0), 2.0, NormChoice::sup));  // boundary
}

TEST_CASE("modulus_w fixtures") {
  GridSpec g = grid1d(4);
  CHECK(modulus_w(CadlagPath::constant(g, {7.0}), Window::interval(0.0, 1.0), NormChoice::sup) ==
        0.0);
  GridSpec g8 = grid1d(8);
  CHECK(modulus_w(step_at(g8, 0.5), Window::interval(0.0, 1.0), NormChoice::sup) == 1.0);

  // f(t) = t rounded to grid, K = [0.25, 0.75], step 0.25
  CadlagPath ramp = CadlagPath::zero(g);
  for (std::size_t c = 0; c < g.cells(); ++c) ramp.at(c)[0] = g.point(c)[0];
  Window k = Window::interval(0.25, 0.75);
  double expected = oracle_osc(extract(ramp, k), 0, extract(ramp, k).pos.size());
  CHECK(expected == 0.5);
  CHECK(modulus_w(ramp, k, NormChoice::sup) == expected);
}

TEST_CASE("modulus_w_prime fixtures") {
  GridSpec g8 = grid1d(8);
  CHECK(modulus_w_prime(step_at(g8, 0.5), Window::interval(0.0, 1.0), 0.25, NormChoice::sup) ==
        0.0);  // cut exactly at the jump
  CHECK(modulus_w_prime(CadlagPath::constant(g8, {3.0}), Window::interval(0.0, 1.0), 0.3,
                        NormChoice::sup) == 0.0);

  // jumps at 0.30 and 0.31: no eta-partition can separate both
  GridSpec g100 = grid1d(100);
  CadlagPath two_jumps = CadlagPath::zero(g100);
  for (std::size_t c = 0; c < 100; ++c) {
    double t = g100.point(c)[0];
    two_jumps.at(c)[0] = (t >= 0.30 - 1e-12 ? 1.0 : 0.0) + (t >= 0.31 - 1e-12 ? 1.0 : 0.0);
  }
  double w1 = modulus_w_prime(two_jumps, Window::interval(0.0, 1.0), 0.05, NormChoice::sup);
  CHECK(w1 == 1.0);

  CHECK_THROWS_AS(
      modulus_w_prime(step_at(g8, 0.5), Window::interval(0.0, 1.0), 1.0, NormChoice::sup), error);
  CHECK_THROWS_AS(
      modulus_w_prime(step_at(g8, 0.5), Window::interval(0.0, 1.0), 1.5, NormChoice::sup), error);
}

TEST_CASE("modulus_w_doubleprime fixtures") {
  GridSpec g8 = grid1d(8);
  CHECK(modulus_w_doubleprime(step_at(g8, 0.5), Window::interval(0.0, 1.0), 0.4,
                              NormChoice::sup) == 0.0);  // single jump
  CHECK(modulus_w_doubleprime(CadlagPath::constant(g8, {2.0}), Window::interval(0.0, 1.0), 0.4,
                              NormChoice::sup) == 0.0);

  GridSpec g100 = grid1d(100);
  CadlagPath two_jumps = CadlagPath::zero(g100);
  for (std::size_t c = 0; c < 100; ++c) {
    double t = g100.point(c)[0];
    two_jumps.at(c)[0] = (t >= 0.30 - 1e-12 ? 1.0 : 0.0) + (t >= 0.31 - 1e-12 ? 1.0 : 0.0);
  }
  CHECK(modulus_w_doubleprime(two_jumps, Window::interval(0.0, 1.0), 0.02, NormChoice::sup) ==
        1.0);  // straddling triple yields min(1,1)
}

TEST_CASE("unsupported dimension errors for the 1-d moduli") {
  GridSpec g;
  g.dim_t = 2;
  g.dim_x = 1;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 1.0};
  g.res = {2, 2};
  CadlagPath p = CadlagPath::zero(g);
  Window k{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(modulus_w_prime(p, k, 0.1, NormChoice::sup), error);
  CHECK_THROWS_AS(modulus_w_doubleprime(p, k, 0.1, NormChoice::sup), error);
}

TEST_CASE("moduli match the brute-force oracles on random small paths") {
  Rng rng(2024);
  Window k = Window::interval(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t cells = 3 + static_cast<std::size_t>(rng.uniform() * 10.0);  // <= 12
    GridSpec g = grid1d(cells);
    CadlagPath p = random_path(g, rng);
    Line ln = extract(p, k);

    double eta = 0.05 + rng.uniform() * 0.8;
    double w1 = modulus_w_prime(p, k, eta, NormChoice::sup);
    CHECK(w1 == Catch::Approx(oracle_w_prime(ln, eta)).margin(1e-12));

    double delta = 0.05 + rng.uniform() * 0.9;
    double w2 = modulus_w_doubleprime(p, k, delta, NormChoice::sup);
    CHECK(w2 == Catch::Approx(oracle_w2(ln, delta)).margin(1e-12));
  }
}

TEST_CASE("w'' <= w' at matched argument (billingsley 12.28 direction)") {
  Rng rng(515);
  Window k = Window::interval(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::size_t cells = 3 + static_cast<std::size_t>(rng.uniform() * 10.0);
    GridSpec g = grid1d(cells);
    CadlagPath p = random_path(g, rng);
    double eta = 0.05 + rng.uniform() * 0.8;
    Line ln = extract(p, k);
    double w2 = oracle_w2(ln, eta);
    double w1 = oracle_w_prime(ln, eta);
    CHECK(w2 <= w1 + 1e-12);
    CHECK(modulus_w_doubleprime(p, k, eta, NormChoice::sup) <=
          modulus_w_prime(p, k, eta, NormChoice::sup) + 1e-12);
  }
}

TEST_CASE("w'' vanishes once delta drops below the grid step") {
  Rng rng(99);
  GridSpec g = grid1d(10);
  CadlagPath p = random_path(g, rng);
  // triples need u - s >= 2 steps; delta below one step leaves only degenerate triples
  CHECK(modulus_w_doubleprime(p, Window::interval(0.0, 1.0), 0.05, NormChoice::sup) == 0.0);
}

TEST_CASE("monotonicity of the moduli") {
  Rng rng(7);
  GridSpec g = grid1d(12);
  Window k = Window::interval(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    CadlagPath p = random_path(g, rng);
    // w is nondecreasing in K
    CHECK(modulus_w(p, Window::interval(0.2, 0.7), NormChoice::sup) <=
          modulus_w(p, k, NormChoice::sup) + 1e-15);
    // w' is nondecreasing in eta (coarser partitions are scarcer)
    double a = modulus_w_prime(p, k, 0.1, NormChoice::sup);
    double b = modulus_w_prime(p, k, 0.3, NormChoice::sup);
    CHECK(a <= b + 1e-15);
    // w'' is nondecreasing in delta
    double c = modulus_w_doubleprime(p, k, 0.2, NormChoice::sup);
    double d = modulus_w_doubleprime(p, k, 0.5, NormChoice::sup);
    CHECK(c <= d + 1e-15);
  }
}

TEST_CASE("two-axis sup-functional and oscillation") {
  GridSpec g;
  g.dim_t = 2;
  g.dim_x = 1;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 1.0};
  g.res = {3, 3};
  g.validate();
  CadlagPath p = CadlagPath::zero(g);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    auto t = g.point(c);
    p.at(c)[0] = t[0] + 2.0 * t[1];
  }
  Window full{{0.0, 0.0}, {1.0, 1.0}};
  CHECK(sup_norm(p, full, NormChoice::sup) == Catch::Approx(2.0));      // at (2/3, 2/3)
  CHECK(modulus_w(p, full, NormChoice::sup) == Catch::Approx(2.0));     // corner spread
  Window quadrant{{0.0, 0.0}, {0.3, 0.3}};
  CHECK(sup_norm(p, quadrant, NormChoice::sup) == 0.0);                 // only the origin cell
}

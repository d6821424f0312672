#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tailrv/empirics.hpp"
#include "tailrv/representer.hpp"
#include "tailrv/scaling.hpp"

using namespace tailrv;

namespace {

GridSpec grid1d(std::size_t cells, double lo = 0.0, double hi = 1.0) {
  GridSpec g;
  g.dim_t = 1;
  g.dim_x = 1;
  g.lo = {lo};
  g.hi = {hi};
  g.res = {cells};
  g.validate();
  return g;
}

std::vector<CadlagPath> constant_pareto_batch(const GridSpec& g, double alpha, std::uint64_t n,
                                              std::uint64_t seed) {
  auto z = representer_constant(g, {1.0}, TailIndex{alpha}, NormChoice::sup);
  return sample_scaled_pareto(z, n, McOptions{.seed = seed, .workers = 2, .threads = 2});
}

}  // namespace

TEST_CASE("hill estimator hand fixture {8,4,2}, k = 2") {
  auto h = hill_estimator({8.0, 4.0, 2.0}, 2);
  // 2 / (ln 4 + ln 2) = 2 / (3 ln 2)
  CHECK(h.alpha_hat == Catch::Approx(2.0 / (3.0 * std::log(2.0))).epsilon(1e-15));
  CHECK(h.ci_lo < h.alpha_hat);
  CHECK(h.ci_hi > h.alpha_hat);
}

TEST_CASE("hill estimator scale invariance") {
  Rng rng(12);
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(std::pow(rng.uniform_open(), -1.0));
  auto base = hill_estimator(xs, 50);
  for (double c : {0.5, 2.0, 1024.0}) {  // dyadic scalings are exact in floating point
    std::vector<double> ys;
    for (double v : xs) ys.push_back(c * v);
    auto h = hill_estimator(ys, 50);
    CHECK(h.alpha_hat == base.alpha_hat);
  }
  std::vector<double> ys;
  for (double v : xs) ys.push_back(1.7 * v);
  CHECK(hill_estimator(ys, 50).alpha_hat == Catch::Approx(base.alpha_hat).epsilon(1e-12));
}

TEST_CASE("hill estimator rejects ties and bad arguments") {
  CHECK_THROWS_AS(hill_estimator({3.0, 3.0, 3.0}, 2), error);
  CHECK_THROWS_AS(hill_estimator({1.0, 2.0}, 2), error);
  CHECK_THROWS_AS(hill_estimator({1.0, -2.0, 3.0}, 1), error);
}

TEST_CASE("hill estimator covers the true index on exact Pareto samples") {
  ParetoSampler p(TailIndex{1.7});
  Rng rng = Rng(2718).derive(role::pareto);
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(p.draw(rng));
  auto h = hill_estimator(xs, 500);
  CHECK(h.ci_lo <= 1.7);
  CHECK(1.7 <= h.ci_hi);
}

TEST_CASE("conditional exceedance on constant scaled-Pareto paths") {
  GridSpec g = grid1d(4);
  double alpha = 1.3;
  const std::uint64_t n = 50000;
  auto batch = constant_pareto_batch(g, alpha, n, 33);
  std::vector<double> norms;
  for (const auto& p : batch) norms.push_back(p.norm_at(1, NormChoice::sup));
  EmpiricalCDF e(norms);
  double u = e.quantile(0.95);
  auto cond = conditional_exceedance(batch, 1, u, NormChoice::sup);

  // conditioning event holds exactly on the output
  for (const auto& p : cond) CHECK(p.norm_at(1, NormChoice::sup) > 1.0);

  // Pareto scaling closure: u^-1 R | R > u is again alpha-Pareto
  std::vector<double> radial;
  for (const auto& p : cond) radial.push_back(p.norm_at(1, NormChoice::sup));
  EmpiricalCDF ecdf(std::move(radial));
  double ks = ks_one_sample(ecdf, [alpha](double t) { return ParetoSampler::cdf(t, alpha); });
  CHECK(ks <= 2.0 * dkw_band(cond.size(), 0.01));  // threshold itself is estimated

  CHECK_THROWS_AS(conditional_exceedance(batch, 1, e.quantile(1.0) * 2.0, NormChoice::sup), error);
}

TEST_CASE("ph_ratio fixtures") {
  GridSpec g = grid1d(2);
  double alpha = 1.5;
  // deterministic two-level spectral: ratio -> 2^alpha
  auto z = RepresenterSampler(g, TailIndex{alpha}, NormChoice::sup, 0, [g](Rng&) {
    CadlagPath p = CadlagPath::zero(g);
    p.at(0)[0] = 2.0;
    p.at(1)[0] = 1.0;
    return WeightedPath{p, 1.0};
  });
  const std::uint64_t n = 100000;
  auto batch = sample_scaled_pareto(z, n, McOptions{.seed = 44, .workers = 2, .threads = 2});

  SECTION("h = t0 gives the constant curve 1") {
    auto curve = ph_ratio(batch, 1, 1, {2.0, 5.0, 10.0}, NormChoice::sup);
    for (double v : curve) CHECK(v == 1.0);
  }
  SECTION("scaled site converges to 2^alpha at high z") {
    std::vector<double> n1;
    for (const auto& p : batch) n1.push_back(p.norm_at(1, NormChoice::sup));
    EmpiricalCDF e(n1);
    double zq = e.quantile(0.99);
    auto curve = ph_ratio(batch, 0, 1, {zq}, NormChoice::sup);
    double count_t = static_cast<double>(n) * 0.01;
    double se = ratio_stderr(curve[0] * count_t, count_t, n);
    CHECK(std::fabs(curve[0] - std::pow(2.0, alpha)) <= 3.0 * se);
  }
  SECTION("empty denominator yields NaN") {
    std::vector<double> n1;
    for (const auto& p : batch) n1.push_back(p.norm_at(1, NormChoice::sup));
    double zmax = *std::max_element(n1.begin(), n1.end());
    auto curve = ph_ratio(batch, 0, 1, {2.0 * zmax}, NormChoice::sup);
    CHECK(std::isnan(curve[0]));
  }
}

TEST_CASE("tightness diagnostic fixtures") {
  GridSpec g = grid1d(10);
  Window k = Window::interval(0.0, 1.0);

  SECTION("single separable jump gives an all-zero table") {
    // X = R . 1{t >= 0.5}: one jump, eta below its distance to the edges
    auto z = RepresenterSampler(g, TailIndex{1.0}, NormChoice::sup, 5, [g](Rng&) {
      CadlagPath p = CadlagPath::zero(g);
      for (std::size_t c = 5; c < 10; ++c) p.at(c)[0] = 1.0;
      return WeightedPath{p, 1.0};
    });
    auto batch = sample_scaled_pareto(z, 2000, McOptions{.seed = 55, .workers = 1, .threads = 1});
    auto tab = tightness_diagnostic(batch, k, 0.5, 5, {0.2, 0.3}, {1.5, 3.0}, NormChoice::sup);
    for (double v : tab.value) CHECK(v == 0.0);
  }

  SECTION("tables are monotone in eps and eta on a rough process") {
    // iid-values process has w' bounded away from 0
    auto rough = RepresenterSampler(g, TailIndex{1.0}, NormChoice::sup, 0, [g](Rng& rng) {
      CadlagPath p = CadlagPath::zero(g);
      for (std::size_t c = 0; c < 10; ++c) p.at(c)[0] = 0.5 + rng.uniform();
      return WeightedPath{p, 1.0};
    });
    auto batch = sample_scaled_pareto(rough, 4000, McOptions{.seed = 56, .workers = 2, .threads = 2});
    std::vector<double> etas{0.15, 0.35};
    std::vector<double> zs{1.0, 2.0};
    auto lo = tightness_diagnostic(batch, k, 0.25, 0, etas, zs, NormChoice::sup);
    auto hi = tightness_diagnostic(batch, k, 0.5, 0, etas, zs, NormChoice::sup);
    for (std::size_t i = 0; i < lo.value.size(); ++i) CHECK(hi.value[i] <= lo.value[i] + 1e-12);
    // w' grows with eta (coarser partitions are scarcer), so cells grow too
    for (std::size_t j = 0; j < zs.size(); ++j) CHECK(lo.at(0, j) <= lo.at(1, j) + 1e-12);
  }

  SECTION("w'' route handles the same inputs") {
    auto z = RepresenterSampler(g, TailIndex{1.0}, NormChoice::sup, 0, [g](Rng&) {
      return WeightedPath{CadlagPath::constant(g, {1.0}), 1.0};
    });
    auto batch = sample_scaled_pareto(z, 500, McOptions{.seed = 57, .workers = 1, .threads = 1});
    auto tab = tightness_diagnostic(batch, k, 0.5, 0, {0.3}, {1.5}, NormChoice::sup,
                                    TightnessRoute::w_doubleprime);
    CHECK(tab.value[0] == 0.0);  // constants oscillate nowhere
  }
}

TEST_CASE("anticoncentration diagnostic fixtures") {
  GridSpec g = grid1d(4);
  Window k = Window::interval(0.0, 1.0);
  std::vector<double> q(4, 0.25);  // sums to 1 over K
  const std::uint64_t n = 20000;
  auto batch = constant_pareto_batch(g, 1.0, n, 66);

  SECTION("constant paths excite every site: cells vanish below eta = sum q") {
    auto tab = anticoncentration_diagnostic(batch, k, 0.5, 2.0, {0.5, 0.99}, {2.0, 4.0}, q, 0,
                                            NormChoice::sup);
    for (double v : tab.value) CHECK(v == 0.0);
  }
  SECTION("eta >= sum q reduces to the plain sup ratio") {
    std::vector<double> etas{1.0};
    std::vector<double> zs{2.0, 4.0};
    double eps = 0.5, c = 2.0;
    auto tab = anticoncentration_diagnostic(batch, k, eps, c, etas, zs, q, 0, NormChoice::sup);
    for (std::size_t j = 0; j < zs.size(); ++j) {
      double num = 0, den = 0;
      for (const auto& p : batch) {
        if (sup_norm(p, k, NormChoice::sup) > c * eps * zs[j]) num += 1.0;
        if (p.norm_at(0, NormChoice::sup) > zs[j]) den += 1.0;
      }
      CHECK(tab.at(0, j) == Catch::Approx(num / den).epsilon(1e-12));
    }
  }
  SECTION("c <= 1 is rejected") {
    CHECK_THROWS_AS(
        anticoncentration_diagnostic(batch, k, 0.5, 1.0, {1.0}, {2.0}, q, 0, NormChoice::sup),
        error);
  }
}

TEST_CASE("empirical cdf and ks helpers") {
  EmpiricalCDF e({1.0, 2.0, 3.0, 4.0});
  CHECK(e(0.5) == 0.0);
  CHECK(e(2.0) == 0.5);
  CHECK(e(9.0) == 1.0);
  CHECK(e.quantile(0.5) == 2.0);
  CHECK(e.quantile(1.0) == 4.0);

  // uniform sample against the identity CDF
  Rng rng(2025);
  std::vector<double> u;
  const std::uint64_t n = 50000;
  for (std::uint64_t i = 0; i < n; ++i) u.push_back(rng.uniform());
  EmpiricalCDF eu(std::move(u));
  double ks = ks_one_sample(eu, [](double t) { return std::clamp(t, 0.0, 1.0); });
  CHECK(ks <= dkw_band(n, 0.01));

  // two-sample KS of a distribution against itself stays below the critical value
  std::vector<double> a, b;
  for (int i = 0; i < 5000; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal());
  }
  EmpiricalCDF ea(std::move(a)), eb(std::move(b));
  CHECK(ks_two_sample(ea, eb) <= ks_two_sample_critical(5000, 5000, 0.01));
}

TEST_CASE("anticoncentration cells shrink as eta drops on a rough field") {
  GridSpec g = grid1d(16);
  auto z = RepresenterSampler(g, TailIndex{1.0}, NormChoice::sup, 0, [g](Rng& rng) {
    CadlagPath p = CadlagPath::zero(g);
    for (std::size_t c = 0; c < 16; ++c) p.at(c)[0] = 0.25 + rng.uniform();
    return WeightedPath{p, 1.0};
  });
  auto batch = sample_scaled_pareto(z, 8000, McOptions{.seed = 71, .workers = 2, .threads = 2});
  Window k = Window::interval(0.0, 1.0);
  std::vector<double> q(16, 1.0 / 16.0);
  std::vector<double> n0;
  for (const auto& p : batch) n0.push_back(p.norm_at(0, NormChoice::sup));
  EmpiricalCDF e(std::move(n0));
  std::vector<double> etas{0.125, 0.375, 0.625};
  std::vector<double> zs{e.quantile(0.9)};
  auto tab = anticoncentration_diagnostic(batch, k, 0.5, 2.0, etas, zs, q, 0, NormChoice::sup);
  // the event {e_K <= eta} nests in eta, so cells are nondecreasing in eta
  CHECK(tab.at(0, 0) <= tab.at(1, 0) + 1e-12);
  CHECK(tab.at(1, 0) <= tab.at(2, 0) + 1e-12);
}

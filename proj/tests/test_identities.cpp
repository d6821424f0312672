#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tailrv/brown_resnick.hpp"
#include "tailrv/identities.hpp"
#include "tailrv/tail_family.hpp"

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

std::vector<double> uniform_q(const GridSpec& g) {
  return std::vector<double>(g.cells(), 1.0 / static_cast<double>(g.cells()));
}

}  // namespace

TEST_CASE("deterministic representer passes every identity") {
  GridSpec g = grid1d(8);
  double alpha = 1.4, c = 2.0;
  auto z = representer_constant(g, {c}, TailIndex{alpha}, NormChoice::sup);
  double pc = std::pow(c, alpha);
  std::vector<std::size_t> sites{2, 5};
  auto fam = family_from_representer(z, sites, uniform_q(g), {pc, pc});

  IdentityConfig cfg;
  cfg.site_h = 2;
  cfg.site_t = 5;
  cfg.panel_t1 = 5;
  cfg.panel_t2 = 2;
  cfg.base_site = 2;
  cfg.n = 20000;
  cfg.identities = {"tilting", "timechange", "angular", "normalization", "radial", "shift", "homogeneity"};
  McOptions opt{.seed = 101, .workers = 2, .threads = 2};
  auto reports = identity_suite(&z, fam, cfg, opt);

  CHECK(reports.size() >= 18 + 3 + 2);
  for (const auto& r : reports) {
    INFO(r.identity << "/" << r.functional << " x=" << r.x << " lhs=" << r.lhs
                    << " rhs=" << r.rhs);
    CHECK(r.pass);
  }

  // constant angular part: the timechange sides are deterministic and exactly equal
  for (const auto& r : reports)
    if (r.identity == "timechange") {
      CHECK(r.lhs_se <= 1e-10 * std::max(1.0, std::fabs(r.lhs)));
      CHECK(std::fabs(r.lhs - r.rhs) <= 1e-9 * std::max(1.0, std::fabs(r.lhs)));
    }
}

TEST_CASE("tilting identity on x >= 1 with the ratio functional is exact for constants") {
  GridSpec g = grid1d(4);
  double alpha = 1.0, c = 3.0;
  auto z = representer_constant(g, {c}, TailIndex{alpha}, NormChoice::sup);
  double pc = std::pow(c, alpha);
  auto fam = family_from_representer(z, {0, 3}, uniform_q(g), {pc, pc});
  IdentityConfig cfg;
  cfg.site_h = 0;
  cfg.site_t = 3;
  cfg.panel_t1 = 3;
  cfg.panel_t2 = 0;
  cfg.xs = {1.0, 2.0};
  cfg.n = 5000;
  cfg.identities = {"tilting"};
  McOptions opt{.seed = 7, .workers = 1, .threads = 1};
  auto reports = identity_suite(&z, fam, cfg, opt);
  for (const auto& r : reports)
    if (r.functional == "ratio") {
      CHECK(r.pass);
      // at x = 1 both indicators are a.s. true, so both sides are means of a
      // deterministic value and agree to float noise
      if (r.x == 1.0)
        CHECK(std::fabs(r.lhs - r.rhs) <= 1e-9 * std::max(1.0, std::fabs(r.lhs)));
    }
}

TEST_CASE("brown-resnick family passes tilting and timechange at desk scale") {
  GridSpec g = grid1d(16);
  BrownResnickSpec spec{GaussianSpec::brownian(), TailIndex{1.0}};
  auto z = brown_resnick_representer(g, spec, NormChoice::sup);
  std::vector<std::size_t> sites{5, 10};
  auto fam = family_from_representer(z, sites, uniform_q(g), {1.0, 1.0});
  IdentityConfig cfg;
  cfg.site_h = 5;
  cfg.site_t = 10;
  cfg.panel_t1 = 10;
  cfg.panel_t2 = 5;
  cfg.n = 30000;
  McOptions opt{.seed = 303, .workers = 2, .threads = 2};
  auto reports = identity_suite(&z, fam, cfg, opt);
  CHECK(reports.size() == 18);
  int fails = 0;
  for (const auto& r : reports) {
    INFO(r.identity << "/" << r.functional << " x=" << r.x << " sigma=" << r.discrepancy_sigma);
    if (!r.pass) ++fails;
  }
  CHECK(fails == 0);
}

TEST_CASE("corrupting p at one site breaks the tilting identity") {
  GridSpec g = grid1d(16);
  BrownResnickSpec spec{GaussianSpec::brownian(), TailIndex{1.0}};
  auto z = brown_resnick_representer(g, spec, NormChoice::sup);
  std::vector<std::size_t> sites{5, 10};
  auto fam = family_from_representer(z, sites, uniform_q(g), {1.0, 1.0});
  auto bad = corrupt_family(fam, 0, 1.5);  // p at site 5 scaled by 1.5

  IdentityConfig cfg;
  cfg.site_h = 5;
  cfg.site_t = 10;
  cfg.panel_t1 = 10;
  cfg.panel_t2 = 5;
  cfg.n = 30000;
  cfg.identities = {"tilting"};
  McOptions opt{.seed = 404, .workers = 2, .threads = 2};
  auto reports = identity_suite(&z, bad, cfg, opt);
  int tilt_fails = 0;
  for (const auto& r : reports)
    if (r.identity == "tilting" && !r.pass) ++tilt_fails;
  CHECK(tilt_fails >= 1);
}

TEST_CASE("stationary brown-resnick family passes the shift-invariance report") {
  GridSpec g = grid1d(16);
  BrownResnickSpec spec{GaussianSpec::brownian(), TailIndex{1.0}};
  auto z = brown_resnick_representer(g, spec, NormChoice::sup);
  std::vector<std::size_t> sites{0, 4};
  auto fam = family_from_representer(z, sites, uniform_q(g), {1.0, 1.0});
  IdentityConfig cfg;
  cfg.site_h = 4;
  cfg.site_t = 0;
  cfg.panel_t1 = 4;
  cfg.panel_t2 = 0;
  cfg.base_site = 0;
  cfg.n = 20000;
  cfg.identities = {"shift"};
  McOptions opt{.seed = 505, .workers = 2, .threads = 2};
  auto reports = identity_suite(&z, fam, cfg, opt);
  REQUIRE(!reports.empty());
  for (const auto& r : reports) {
    INFO("shift-invariance fidi " << r.functional << " ks=" << r.lhs << " crit=" << r.rhs);
    CHECK(r.pass);
  }
}

TEST_CASE("report pass flags are consistent with their stored fields") {
  GridSpec g = grid1d(8);
  auto z = representer_constant(g, {2.0}, TailIndex{1.0}, NormChoice::sup);
  auto fam = family_from_representer(z, {1, 5}, uniform_q(g), {2.0, 2.0});
  IdentityConfig cfg;
  cfg.site_h = 1;
  cfg.site_t = 5;
  cfg.panel_t1 = 5;
  cfg.panel_t2 = 1;
  cfg.n = 2000;
  McOptions opt{.seed = 2222, .workers = 1, .threads = 1};
  auto reports = identity_suite(&z, fam, cfg, opt);
  for (const auto& r : reports) {
    double se = std::sqrt(r.lhs_se * r.lhs_se + r.rhs_se * r.rhs_se);
    double diff = std::fabs(r.lhs - r.rhs);
    double floor = cfg.abs_tol * std::max({1.0, std::fabs(r.lhs), std::fabs(r.rhs)});
    bool expect = diff <= std::max(cfg.threshold_sigma * se, floor);
    CHECK(r.pass == expect);
  }
}

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tailrv/empirics.hpp"
#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/functional.hpp"
#include "tailrv/pareto.hpp"
#include "tailrv/path.hpp"
#include "tailrv/representer.hpp"
#include "tailrv/tail_family.hpp"

namespace tailrv {

struct IdentityReport {
  std::string identity;
  std::string functional;
  std::size_t site_h = 0, site_t = 0;
  double x = 1.0;
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  double discrepancy_sigma = 0.0;
  bool pass = false;
};

struct IdentityConfig {
  std::size_t site_h = 0, site_t = 0;
  std::vector<double> xs = {0.5, 1.0, 2.0};
  std::uint64_t n = 100000;
  double threshold_sigma = 3.0;
  double abs_tol = 1e-9;  // float-noise floor for exactly-equal sides
  std::vector<std::string> identities = {"tilting", "timechange"};

  // versioned builtin functional panel
  std::size_t panel_t1 = 0, panel_t2 = 0;  // coordinate anchors
  double indicator_level = 0.5;
  double ratio_cap = 10.0;

  // shift-invariance configuration
  std::size_t base_site = 0;
  std::vector<std::size_t> fidi_cells;  // tau cells; auto-chosen when empty
  double ks_level = 0.01;
};

namespace detail {

struct PanelEntry {
  std::string name;
  std::function<double(const CadlagPath&)> gamma;   // member of H (bounded)
  std::function<double(const CadlagPath&)> gamma0;  // 0-homogeneous version
};

/// Fixed functional panel: coordinate indicator, clipped Lipschitz of two
/// coordinates, capped 0-homogeneous ratio.  The 0-homogeneous versions
/// normalise at t2 before evaluating.
inline std::vector<PanelEntry> builtin_panel(const IdentityConfig& cfg, NormChoice norm) {
  const std::size_t t1 = cfg.panel_t1, t2 = cfg.panel_t2;
  const double a = cfg.indicator_level, cap = cfg.ratio_cap;

  auto normalise = [t2, norm](const CadlagPath& f) -> std::optional<CadlagPath> {
    double s = f.norm_at(t2, norm);
    if (!(s > 0.0)) return std::nullopt;
    return f.scaled(1.0 / s);
  };

  std::vector<PanelEntry> panel;
  {
    PanelEntry e;
    e.name = "indicator";
    e.gamma = [t1, a, norm](const CadlagPath& f) { return f.norm_at(t1, norm) > a ? 1.0 : 0.0; };
    e.gamma0 = [t1, a, norm, normalise](const CadlagPath& f) {
      auto g = normalise(f);
      return g ? (g->norm_at(t1, norm) > a ? 1.0 : 0.0) : 0.0;
    };
    panel.push_back(std::move(e));
  }
  {
    PanelEntry e;
    e.name = "lipschitz2";
    auto lip = [t1, t2, a, norm](const CadlagPath& f) {
      double v = std::max(0.0, f.norm_at(t1, norm) - a) + std::max(0.0, f.norm_at(t2, norm) - a);
      return std::min(1.0, v);
    };
    e.gamma = lip;
    e.gamma0 = [lip, normalise](const CadlagPath& f) {
      auto g = normalise(f);
      return g ? lip(*g) : 0.0;
    };
    panel.push_back(std::move(e));
  }
  {
    PanelEntry e;
    e.name = "ratio";
    auto ratio = [t1, t2, cap, norm](const CadlagPath& f) {
      double den = f.norm_at(t2, norm);
      if (!(den > 0.0)) return 0.0;
      return std::min(cap, f.norm_at(t1, norm) / den);
    };
    e.gamma = ratio;   // already 0-homogeneous
    e.gamma0 = ratio;
    panel.push_back(std::move(e));
  }
  return panel;
}

/// Draw a pool of weighted Y^[site] paths, worker-split and deterministic.
inline std::vector<WeightedPath> draw_pool(const TailProcessFamily& fam, std::size_t si,
                                           std::uint64_t n, const McOptions& opt) {
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  std::vector<std::vector<WeightedPath>> parts(static_cast<std::size_t>(workers));
  Rng base = Rng(opt.seed).derive(role::site_base + fam.sites[si]);
  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    parts[static_cast<std::size_t>(w)].reserve(hi - lo);
    fam.sampler(si, hi - lo, rng, parts[static_cast<std::size_t>(w)]);
  };
  detail::parallel_workers(workers, threads, work);
  std::vector<WeightedPath> out;
  out.reserve(n);
  for (auto& p : parts)
    for (auto& wp : p) out.push_back(std::move(wp));
  return out;
}

template <class G>
inline WeightedMean pool_mean(const std::vector<WeightedPath>& pool, G&& g) {
  std::vector<double> w(pool.size()), v(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    w[i] = pool[i].weight;
    v[i] = pool[i].weight > 0.0 ? g(pool[i].path) : 0.0;
  }
  return weighted_mean(w, v);
}

inline IdentityReport make_pair_report(std::string identity, std::string functional,
                                       std::size_t h, std::size_t t, double x, double lhs,
                                       double lhs_se, double rhs, double rhs_se,
                                       const IdentityConfig& cfg) {
  IdentityReport r;
  r.identity = std::move(identity);
  r.functional = std::move(functional);
  r.site_h = h;
  r.site_t = t;
  r.x = x;
  r.lhs = lhs;
  r.lhs_se = lhs_se;
  r.rhs = rhs;
  r.rhs_se = rhs_se;
  double se = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
  double diff = std::fabs(lhs - rhs);
  double floor = cfg.abs_tol * std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
  r.discrepancy_sigma = se > 0.0 ? diff / se : (diff <= floor ? 0.0 : std::numeric_limits<double>::infinity());
  r.pass = diff <= std::max(cfg.threshold_sigma * se, floor);
  return r;
}

}  // namespace detail

inline TailProcessFamily corrupt_family(TailProcessFamily fam, std::size_t site_index,
                                        double factor) {
  if (site_index >= fam.p.size()) throw error(errc::config, "corrupt site index out of range");
  fam.p[site_index] *= factor;
  return fam;
}

/// One report per identity per configuration point.  Failures are reports,
/// not errors.  `z` may be null when no representer-side identity is run.
inline std::vector<IdentityReport> identity_suite(const RepresenterSampler* z,
                                                  const TailProcessFamily& fam,
                                                  const IdentityConfig& cfg, const McOptions& opt) {
  fam.validate();
  const double alpha = fam.alpha.alpha;
  const NormChoice norm = fam.norm;

  // locate config sites within the family's site list
  auto site_index = [&](std::size_t cell) -> std::size_t {
    for (std::size_t si = 0; si < fam.sites.size(); ++si)
      if (fam.sites[si] == cell) return si;
    throw error(errc::config, "identity site is not a family site");
  };
  const std::size_t si_h = site_index(cfg.site_h);
  const std::size_t si_t = site_index(cfg.site_t);
  const double p_h = fam.p[si_h], p_t = fam.p[si_t];

  McOptions o_h = opt, o_t = opt;
  o_h.seed = seed_mix(opt.seed, 0xA1);
  o_t.seed = seed_mix(opt.seed, 0xA2);
  auto pool_h = detail::draw_pool(fam, si_h, cfg.n, o_h);
  auto pool_t = detail::draw_pool(fam, si_t, cfg.n, o_t);

  auto panel = detail::builtin_panel(cfg, norm);
  std::vector<IdentityReport> reports;

  auto want = [&](const std::string& name) {
    for (const auto& id : cfg.identities)
      if (id == name) return true;
    return false;
  };

  if (want("tilting")) {
    for (double x : cfg.xs)
      for (const auto& pe : panel) {
        auto lhs = detail::pool_mean(pool_h, [&](const CadlagPath& y) {
          double ind = x * y.norm_at(cfg.site_t, norm) > 1.0 ? 1.0 : 0.0;
          return ind > 0.0 ? pe.gamma(y.scaled(x)) : 0.0;
        });
        auto rhs = detail::pool_mean(pool_t, [&](const CadlagPath& y) {
          double ind = y.norm_at(cfg.site_h, norm) > x ? 1.0 : 0.0;
          return ind > 0.0 ? pe.gamma(y) : 0.0;
        });
        double xa = std::pow(x, alpha);
        reports.push_back(detail::make_pair_report(
            "tilting", pe.name, cfg.site_h, cfg.site_t, x, p_h * lhs.mean, p_h * lhs.se,
            p_t * xa * rhs.mean, p_t * xa * rhs.se, cfg));
      }
  }

  if (want("timechange")) {
    for (double x : cfg.xs)
      for (const auto& pe : panel) {
        auto lhs = detail::pool_mean(pool_h, [&](const CadlagPath& y) {
          double sh = y.norm_at(cfg.site_h, norm);
          if (!(sh > 0.0)) return 0.0;
          CadlagPath theta = y.scaled(1.0 / sh);
          double st = theta.norm_at(cfg.site_t, norm);
          return std::pow(st, alpha) * pe.gamma0(theta.scaled(x));
        });
        auto rhs = detail::pool_mean(pool_t, [&](const CadlagPath& y) {
          double st = y.norm_at(cfg.site_t, norm);
          if (!(st > 0.0)) return 0.0;
          CadlagPath theta = y.scaled(1.0 / st);
          if (!(theta.norm_at(cfg.site_h, norm) > 0.0)) return 0.0;
          return pe.gamma0(theta.scaled(x));
        });
        reports.push_back(detail::make_pair_report("timechange", pe.name, cfg.site_h, cfg.site_t, x,
                                                   p_h * lhs.mean, p_h * lhs.se, p_t * rhs.mean,
                                                   p_t * rhs.se, cfg));
      }
  }

  if (want("angular") && z != nullptr) {
    McOptions o_z = opt;
    o_z.seed = seed_mix(opt.seed, 0xA3);
    for (const auto& pe : panel) {
      auto lhs = mc_estimate(o_z, role::representer, cfg.n, [&](Rng& rng, McCtx&) {
        WeightedPath wp = z->draw(rng);
        if (wp.weight == 0.0) return 0.0;
        double s = wp.path.norm_at(cfg.site_h, norm);
        return wp.weight * std::pow(s, alpha) * pe.gamma0(wp.path);
      });
      auto rhs = detail::pool_mean(pool_h, [&](const CadlagPath& y) {
        double sh = y.norm_at(cfg.site_h, norm);
        if (!(sh > 0.0)) return 0.0;
        return pe.gamma0(y.scaled(1.0 / sh));
      });
      reports.push_back(detail::make_pair_report("angular", pe.name, cfg.site_h, cfg.site_h, 1.0,
                                                 lhs.value, lhs.stderr_, p_h * rhs.mean,
                                                 p_h * rhs.se, cfg));
    }
  }

  if (want("normalization")) {
    for (auto [si, pool] : {std::pair{si_h, &pool_h}, std::pair{si_t, &pool_t}}) {
      std::size_t cell = fam.sites[si];
      double min_norm = std::numeric_limits<double>::infinity();
      double max_unit_err = 0.0;
      for (const auto& wp : *pool) {
        if (wp.weight <= 0.0) continue;
        double s = wp.path.norm_at(cell, norm);
        min_norm = std::min(min_norm, s);
        CadlagPath theta = wp.path.scaled(1.0 / s);
        max_unit_err = std::max(max_unit_err, std::fabs(theta.norm_at(cell, norm) - 1.0));
      }
      IdentityReport r;
      r.identity = "normalization";
      r.functional = "radial/spectral";
      r.site_h = cell;
      r.site_t = cell;
      r.lhs = min_norm;
      r.rhs = max_unit_err;
      r.pass = min_norm > 1.0 && max_unit_err <= 1e-12;
      r.discrepancy_sigma = r.pass ? 0.0 : std::numeric_limits<double>::infinity();
      reports.push_back(std::move(r));
    }
  }

  if (want("radial")) {
    WeightedSampleSet set;
    set.paths.reserve(pool_h.size());
    for (const auto& wp : pool_h) {
      set.paths.push_back(wp.path);
      set.weights.push_back(wp.weight);
    }
    auto draws = resample_to_paths(set, cfg.n, Rng(seed_mix(opt.seed, 0xA4)).derive(role::resample));
    std::vector<double> radial;
    radial.reserve(draws.size());
    for (const auto& p : draws) radial.push_back(p.norm_at(cfg.site_h, norm));
    EmpiricalCDF ecdf(std::move(radial));
    double ks = ks_one_sample(ecdf, [alpha](double t) { return ParetoSampler::cdf(t, alpha); });
    double band = dkw_band(cfg.n, 0.01);
    IdentityReport r;
    r.identity = "radial";
    r.functional = "pareto-cdf";
    r.site_h = cfg.site_h;
    r.site_t = cfg.site_h;
    r.lhs = ks;
    r.rhs = band;
    r.pass = ks <= band;
    r.discrepancy_sigma = band > 0 ? ks / band : 0.0;
    reports.push_back(std::move(r));
  }

  if (want("shift")) {
    const std::size_t si_0 = site_index(cfg.base_site);
    McOptions o_0 = opt;
    o_0.seed = seed_mix(opt.seed, 0xA5);
    auto pool_0 = (cfg.base_site == cfg.site_h) ? pool_h : detail::draw_pool(fam, si_0, cfg.n, o_0);
    const GridSpec& g = fam.grid;
    auto delta = static_cast<long long>(cfg.site_h) - static_cast<long long>(cfg.base_site);
    std::vector<std::size_t> taus = cfg.fidi_cells;
    if (taus.empty()) {
      // three interior cells whose preimage under the shift stays in range
      for (std::size_t c : {g.cells() / 4, g.cells() / 2, 3 * g.cells() / 4}) {
        auto src = static_cast<long long>(c) - delta;
        if (src >= 0 && src < static_cast<long long>(g.cells())) taus.push_back(c);
      }
    }
    auto resample_norms = [&](const std::vector<WeightedPath>& pool, std::size_t cell,
                              std::uint64_t salt) {
      WeightedSampleSet set;
      for (const auto& wp : pool) {
        set.paths.push_back(wp.path);
        set.weights.push_back(wp.weight);
      }
      auto draws = resample_to_paths(set, cfg.n, Rng(seed_mix(opt.seed, salt)).derive(role::resample));
      std::vector<double> vals;
      vals.reserve(draws.size());
      for (const auto& p : draws) vals.push_back(p.norm_at(cell, norm));
      return vals;
    };
    for (std::size_t tau : taus) {
      auto src = static_cast<std::size_t>(static_cast<long long>(tau) - delta);
      EmpiricalCDF a(resample_norms(pool_h, tau, 0xB0 + tau));
      EmpiricalCDF b(resample_norms(pool_0, src, 0xC0 + tau));
      double ks = ks_two_sample(a, b);
      double crit = ks_two_sample_critical(a.size(), b.size(), cfg.ks_level);
      IdentityReport r;
      r.identity = "shift";
      r.functional = "fidi@" + std::to_string(tau);
      r.site_h = cfg.site_h;
      r.site_t = cfg.base_site;
      r.lhs = ks;
      r.rhs = crit;
      r.pass = ks <= crit;
      r.discrepancy_sigma = crit > 0 ? ks / crit : 0.0;
      reports.push_back(std::move(r));
    }
  }

  if (want("homogeneity") && z != nullptr) {
    // sample-level M0: est(z eps; seed) = z^-alpha est(eps; seed), bit-exact
    McOptions o_m = opt;
    o_m.seed = seed_mix(opt.seed, 0xA6);
    auto h1 = functional_one();
    std::uint64_t nh = std::min<std::uint64_t>(cfg.n, 4096);
    MCEstimate base = representer_functional(*z, h1, cfg.site_h, 1.0, nh, o_m);
    bool all_exact = true;
    double worst = 0.0;
    for (double zz : {0.5, 2.0, 10.0}) {
      MCEstimate scaled = representer_functional(*z, h1, cfg.site_h, zz, nh, o_m);
      double expect = std::pow(zz, -alpha) * base.value;
      if (scaled.value != expect) {
        all_exact = false;
        worst = std::max(worst, std::fabs(scaled.value - expect));
      }
    }
    IdentityReport r;
    r.identity = "homogeneity";
    r.functional = "one";
    r.site_h = cfg.site_h;
    r.site_t = cfg.site_h;
    r.lhs = worst;
    r.rhs = 0.0;
    r.pass = all_exact;
    r.discrepancy_sigma = all_exact ? 0.0 : std::numeric_limits<double>::infinity();
    reports.push_back(std::move(r));
  }

  return reports;
}

}  // namespace tailrv

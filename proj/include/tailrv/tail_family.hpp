#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <thread>
#include <utility>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/functional.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/norms.hpp"
#include "tailrv/pareto.hpp"
#include "tailrv/path.hpp"
#include "tailrv/representer.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

enum class BaseMeasure { counting, lebesgue };

/// Weighted samplers of local tail processes Y^[h] with site weights p_h and
/// mixing weights q_t > 0 over the grid.
struct TailProcessFamily {
  GridSpec grid;
  TailIndex alpha;
  NormChoice norm = NormChoice::sup;
  std::vector<std::size_t> sites;  // cell indices with declared p > 0
  std::vector<double> p;           // one per site
  std::vector<double> q;           // one per grid cell, q_t > 0

  /// Draw n weighted Y^[sites[si]] paths into out (appended).
  std::function<void(std::size_t si, std::uint64_t n, Rng& rng, std::vector<WeightedPath>& out)>
      sampler;

  void validate() const {
    grid.validate();
    alpha.validate();
    if (sites.empty()) throw error(errc::config, "family needs at least one site");
    if (p.size() != sites.size()) throw error(errc::config, "p/sites size mismatch");
    if (q.size() != grid.cells()) throw error(errc::config, "q must cover every grid cell");
    bool some_positive = false;
    for (double v : p) {
      if (v < 0) throw error(errc::config, "p must be >= 0");
      if (v > 0) some_positive = true;
    }
    if (!some_positive) throw error(errc::degenerate_site, "family has no site with p > 0");
    for (double v : q)
      if (!(v > 0)) throw error(errc::config, "q must be > 0 on the grid");
  }

  std::size_t site_cell(std::size_t si) const { return sites[si]; }
};

/// e_K(f) = sum_{t in K} 1{||f(t)|| > 1} q_t lambda(t); lambda is counting
/// measure by default, cell volume under the Lebesgue variant.
inline double exceedance_e_k(const CadlagPath& f, const Window& k, const std::vector<double>& q,
                             NormChoice norm, BaseMeasure lambda = BaseMeasure::counting) {
  auto cells = cells_in_window(f.grid(), k);
  const double lam = lambda == BaseMeasure::counting ? 1.0 : f.grid().cell_volume();
  double s = 0.0;
  for (auto c : cells)
    if (f.norm_at(c, norm) > 1.0) s += q[c] * lam;
  return s;
}

/// Family backed by a representer: Y^[h] = (R/||Z||_h) . Z with importance
/// weight ||Z||_h^alpha.  Pass exact p when known (e.g. Brown-Resnick with
/// d = 1 has p = 1 at every site); otherwise a pilot run estimates it.
inline TailProcessFamily family_from_representer(const RepresenterSampler& z,
                                                 std::vector<std::size_t> sites,
                                                 std::vector<double> q,
                                                 std::vector<double> known_p = {},
                                                 std::uint64_t pilot_n = 20000,
                                                 std::uint64_t pilot_seed = 99991) {
  TailProcessFamily fam;
  fam.grid = z.grid();
  fam.alpha = z.alpha();
  fam.norm = z.norm();
  fam.sites = std::move(sites);
  fam.q = std::move(q);
  const double alpha = fam.alpha.alpha;

  if (!known_p.empty()) {
    fam.p = std::move(known_p);
  } else {
    fam.p.reserve(fam.sites.size());
    for (std::size_t si = 0; si < fam.sites.size(); ++si) {
      std::size_t cell = fam.sites[si];
      McOptions po;
      po.seed = seed_mix(pilot_seed, cell);
      auto est = mc_estimate(po, role::representer, pilot_n, [&](Rng& rng, McCtx&) {
        WeightedPath wp = z.draw(rng);
        return wp.weight * std::pow(wp.path.norm_at(cell, z.norm()), alpha);
      });
      fam.p.push_back(est.value);
    }
  }

  ParetoSampler pareto(fam.alpha);
  NormChoice norm = fam.norm;
  auto sites_copy = fam.sites;
  fam.sampler = [z, pareto, alpha, norm, sites_copy](std::size_t si, std::uint64_t n, Rng& rng,
                                                     std::vector<WeightedPath>& out) {
    std::size_t cell = sites_copy[si];
    for (std::uint64_t i = 0; i < n; ++i) {
      WeightedPath wp = z.draw(rng);
      double r = pareto.draw(rng);
      double s = wp.path.norm_at(cell, norm);
      if (!(s > 0.0) || wp.weight == 0.0) {
        out.push_back(WeightedPath{wp.path, 0.0});
        continue;
      }
      double w = wp.weight * std::pow(s, alpha);
      wp.path.scale_in_place(r / s);
      out.push_back(WeightedPath{std::move(wp.path), w});
    }
  };
  fam.validate();
  return fam;
}

/// As TailProcessFamily but emitted paths satisfy ||Theta||_h = 1.
struct SpectralTailFamily {
  TailProcessFamily base;

  void draw(std::size_t si, std::uint64_t n, Rng& rng, std::vector<WeightedPath>& out) const {
    std::size_t cell = base.sites[si];
    std::vector<WeightedPath> buf;
    buf.reserve(n);
    base.sampler(si, n, rng, buf);
    for (auto& wp : buf) {
      if (wp.weight > 0.0) {
        double s = wp.path.norm_at(cell, base.norm);
        if (!(s > 0.0)) throw error(errc::division_by_zero_norm, "||Y||_h = 0 in spectral map");
        wp.path.scale_in_place(1.0 / s);
      }
      out.push_back(std::move(wp));
    }
  }
};

inline SpectralTailFamily spectral_family(const TailProcessFamily& fam) {
  return SpectralTailFamily{fam};
}

/// Y^[h] = R . Theta^[h] with R independent of Theta.
inline WeightedPath y_from_spectral(const SpectralTailFamily& theta, std::size_t si,
                                    const ParetoSampler& pareto, Rng& rng) {
  std::vector<WeightedPath> buf;
  theta.draw(si, 1, rng, buf);
  double r = pareto.draw(rng);
  if (buf[0].weight > 0.0) buf[0].path.scale_in_place(r);
  return std::move(buf[0]);
}

/// Stochastic representer Z_N = p_N^{1/alpha} Y^[N] / S^q(Y^[N])^{1/alpha},
/// N ~ q restricted to sites with p > 0.  Emitted draws carry weight
/// w_Y / p_N so that downstream estimators reproduce the family's measure.
inline RepresenterSampler build_representer_zn(const TailProcessFamily& fam) {
  fam.validate();
  const double alpha = fam.alpha.alpha;

  // degenerate-site policy: drop sites with p below 1e-12 x max p
  double pmax = 0.0;
  for (double v : fam.p) pmax = std::max(pmax, v);
  std::vector<std::size_t> live;
  for (std::size_t si = 0; si < fam.sites.size(); ++si)
    if (fam.p[si] > 1e-12 * pmax) live.push_back(si);
  if (live.empty()) throw error(errc::degenerate_site, "no live sites for the q mixture");

  std::vector<double> cdf(live.size());
  double total = 0.0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    total += fam.q[fam.sites[live[i]]];
    cdf[i] = total;
  }

  auto fam_copy = fam;
  auto draw_fn = [fam_copy, live, cdf, total, alpha](Rng& rng) -> WeightedPath {
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < cdf.size() && cdf[pick] <= u) ++pick;
    std::size_t si = live[pick];

    std::vector<WeightedPath> buf;
    fam_copy.sampler(si, 1, rng, buf);
    WeightedPath wp = std::move(buf[0]);
    if (wp.weight == 0.0) return wp;

    double s_q = 0.0;
    const auto cells = wp.path.grid().cells();
    for (std::size_t c = 0; c < cells; ++c)
      s_q += std::pow(wp.path.norm_at(c, fam_copy.norm), alpha) * fam_copy.q[c];
    if (!(s_q > 0.0))
      throw error(errc::tail_family_violation, "S^q(Y) = 0: not a tail-process family");

    double scale = std::pow(fam_copy.p[si], 1.0 / alpha) / std::pow(s_q, 1.0 / alpha);
    wp.path.scale_in_place(scale);
    wp.weight /= fam_copy.p[si];
    return wp;
  };

  return RepresenterSampler(fam.grid, fam.alpha, fam.norm, fam.sites[0], draw_fn,
                            /*unit_weight=*/false);
}

namespace detail {

struct SiteEstimate {
  WeightedMean wm;
  double m_quarter = 0.0, m_half = 0.0;  // running weighted means
  std::uint64_t zero_ek = 0;
};

/// Weighted per-site estimate of E[ G(Y^[site]) ] with deterministic worker
/// splitting; G sees the weighted draw and may throw.
template <class G>
inline SiteEstimate site_weighted_estimate(const TailProcessFamily& fam, std::size_t si,
                                           std::uint64_t n, const McOptions& opt,
                                           std::uint64_t role_tag, G&& g) {
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  std::vector<std::vector<double>> ws(static_cast<std::size_t>(workers));
  std::vector<std::vector<double>> gs(static_cast<std::size_t>(workers));
  Rng base = Rng(opt.seed).derive(role_tag);

  parallel_workers(workers, threads, [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    std::vector<WeightedPath> buf;
    buf.reserve(hi - lo);
    fam.sampler(si, hi - lo, rng, buf);
    auto& wv = ws[static_cast<std::size_t>(w)];
    auto& gv = gs[static_cast<std::size_t>(w)];
    wv.reserve(buf.size());
    gv.reserve(buf.size());
    for (auto& wp : buf) {
      wv.push_back(wp.weight);
      gv.push_back(wp.weight > 0.0 ? g(wp.path) : 0.0);
    }
  });

  std::vector<double> w_all, g_all;
  for (int w = 0; w < workers; ++w) {
    w_all.insert(w_all.end(), ws[static_cast<std::size_t>(w)].begin(), ws[static_cast<std::size_t>(w)].end());
    g_all.insert(g_all.end(), gs[static_cast<std::size_t>(w)].begin(), gs[static_cast<std::size_t>(w)].end());
  }
  SiteEstimate out;
  out.wm = weighted_mean(w_all, g_all);
  auto prefix_mean = [&](std::size_t m) {
    double sw = 0, swg = 0;
    for (std::size_t i = 0; i < m && i < w_all.size(); ++i) {
      sw += w_all[i];
      swg += w_all[i] * g_all[i];
    }
    return sw > 0 ? swg / sw : 0.0;
  };
  out.m_quarter = prefix_mean(w_all.size() / 4);
  out.m_half = prefix_mean(w_all.size() / 2);
  return out;
}

}  // namespace detail

/// nu[H] = eps^-alpha sum_{t in K} E[ H(eps Y^[t]) / e_K(Y^[t]) ] p_t q_t lambda(t)
/// with n draws per site.  H must declare compact support (K_H, eps_H) with
/// K_H inside K and eps <= eps_H.
inline MCEstimate measure_functional_local(const TailProcessFamily& fam, const Functional& h,
                                           const Window& k, double eps, std::uint64_t n,
                                           const McOptions& opt,
                                           BaseMeasure lambda = BaseMeasure::counting) {
  fam.validate();
  if (!h.support) throw error(errc::support_mismatch, "H must declare compact support");
  k.validate(fam.grid.dim_t);
  const auto& sup = *h.support;
  for (int i = 0; i < fam.grid.dim_t; ++i)
    if (sup.k_h.lo[i] < k.lo[i] - 1e-12 || sup.k_h.hi[i] > k.hi[i] + 1e-12)
      throw error(errc::support_mismatch, "K_H must be contained in K");
  if (eps > sup.eps_h + 1e-15) throw error(errc::support_mismatch, "eps must be <= eps_H");

  const double alpha = fam.alpha.alpha;
  const double lam = lambda == BaseMeasure::counting ? 1.0 : fam.grid.cell_volume();
  const double pref = std::pow(eps, -alpha);

  MCEstimate est;
  est.seed = opt.seed;
  double var_sum = 0.0;
  const double cap = opt.clip_cap;
  std::atomic<std::uint64_t> clipped{0};
  for (std::size_t si = 0; si < fam.sites.size(); ++si) {
    std::size_t cell = fam.sites[si];
    if (!k.contains(fam.grid.point(cell))) continue;
    auto g = [&](const CadlagPath& y) -> double {
      double ek = exceedance_e_k(y, k, fam.q, fam.norm, lambda);
      if (!(ek > 0.0))
        throw error(errc::tail_family_violation,
                    "e_K(Y^[t]) = 0 for a draw at a site inside K: the sampler is not a tail-process family");
      double hv = h.eval(y.scaled(eps));
      if (hv > cap || hv < -cap) {
        clipped.fetch_add(1, std::memory_order_relaxed);
        hv = std::clamp(hv, -cap, cap);
      }
      return hv / ek;
    };
    auto se = detail::site_weighted_estimate(fam, si, n, opt, role::site_base + cell, g);
    double coef = pref * fam.p[si] * fam.q[cell] * lam;
    est.value += coef * se.wm.mean;
    var_sum += coef * coef * se.wm.se * se.wm.se;
    est.n += se.wm.n;
  }
  est.clipped = clipped.load();
  est.stderr_ = std::sqrt(var_sum);
  return est;
}

/// Family-route finiteness diagnostic: the reconstruction integral
/// sum_{t in K} p_t q_t lambda E[1/e_K(Y^[t])] with the doubling heuristic.
inline BoundednessReport compact_boundedness_family(const TailProcessFamily& fam, const Window& k,
                                                    std::uint64_t n, const McOptions& opt,
                                                    BaseMeasure lambda = BaseMeasure::counting) {
  fam.validate();
  const double lam = lambda == BaseMeasure::counting ? 1.0 : fam.grid.cell_volume();
  BoundednessReport rep;
  rep.estimate.seed = opt.seed;
  double var_sum = 0.0;
  double q1 = 0.0, q2 = 0.0;
  for (std::size_t si = 0; si < fam.sites.size(); ++si) {
    std::size_t cell = fam.sites[si];
    if (!k.contains(fam.grid.point(cell))) continue;
    auto g = [&](const CadlagPath& y) -> double {
      double ek = exceedance_e_k(y, k, fam.q, fam.norm, lambda);
      if (!(ek > 0.0)) throw error(errc::tail_family_violation, "e_K(Y^[t]) = 0 inside K");
      return 1.0 / ek;
    };
    auto se = detail::site_weighted_estimate(fam, si, n, opt, role::site_base + cell, g);
    double coef = fam.p[si] * fam.q[cell] * lam;
    rep.estimate.value += coef * se.wm.mean;
    var_sum += coef * coef * se.wm.se * se.wm.se;
    rep.estimate.n += se.wm.n;
    q1 += coef * se.m_quarter;
    q2 += coef * se.m_half;
  }
  rep.estimate.stderr_ = std::sqrt(var_sum);
  rep.means = RunningMeans{q1, q2, rep.estimate.value};
  bool grew1 = q1 <= 0.0 ? q2 > 0.0 : q2 >= 2.0 * q1;
  bool grew2 = q2 <= 0.0 ? rep.estimate.value > 0.0 : rep.estimate.value >= 2.0 * q2;
  rep.pass = !(grew1 && grew2);
  return rep;
}

}  // namespace tailrv

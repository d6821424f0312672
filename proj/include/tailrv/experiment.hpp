#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailrv/brown_resnick.hpp"
#include "tailrv/dehaan.hpp"
#include "tailrv/empirics.hpp"
#include "tailrv/errors.hpp"
#include "tailrv/identities.hpp"
#include "tailrv/scaling.hpp"
#include "tailrv/serialize.hpp"
#include "tailrv/skorohod.hpp"
#include "tailrv/tail_family.hpp"
#include "tailrv/version.hpp"

namespace tailrv {

// exit codes of the experiment runner
constexpr int exit_ok = 0;
constexpr int exit_report_failure = 2;  // --strict only
constexpr int exit_config = 64;
constexpr int exit_runtime = 65;

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ExperimentSpec {
  GridSpec grid;
  TailIndex alpha;
  NormChoice norm = NormChoice::sup;
  nlohmann::json process;
  std::vector<nlohmann::json> tasks;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = "out";
  std::string spec_hash;
};

inline ExperimentSpec parse_experiment(const nlohmann::json& j, const std::string& raw) {
  ExperimentSpec s;
  try {
    s.grid = grid_from_json(j.at("grid"));
    s.alpha = TailIndex{j.at("alpha").get<double>()};
    s.alpha.validate();
    s.norm = norm_from_string(j.value("norm", "sup"));
    s.process = j.at("process");
    if (!s.process.contains("type")) throw error(errc::config, "process.type missing");
    for (const auto& t : j.at("tasks")) {
      if (!t.contains("type")) throw error(errc::config, "task.type missing");
      s.tasks.push_back(t);
    }
    s.seed = j.value("seed", 1ULL);
    s.workers = j.value("workers", 1);
    if (s.workers < 1) throw error(errc::config, "workers must be >= 1");
    s.output_dir = j.value("output_dir", "out");
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::config, std::string("experiment spec: ") + e.what());
  }
  if (const char* env = std::getenv("TAILRV_SEED")) s.seed = std::strtoull(env, nullptr, 10);
  s.spec_hash = fnv1a_hex(raw);
  return s;
}

/// A wired process: a plain path sampler for simulation plus, when the type
/// supports it, the representer of its tail measure.
struct Process {
  std::string type;
  PathSampler sampler;
  std::shared_ptr<RepresenterSampler> representer;
  std::vector<double> exact_p;  // per grid cell; empty = unknown (pilot-estimate)
};

inline Process build_process(const ExperimentSpec& spec, const nlohmann::json& j);

namespace detail {

inline GaussianSpec gaussian_from_json(const nlohmann::json& j) {
  GaussianSpec g;
  std::string kind = j.value("type", "brownian");
  if (kind == "brownian") {
    g.kernel = GaussianSpec::Kernel::brownian;
  } else if (kind == "fbm") {
    g.kernel = GaussianSpec::Kernel::fbm;
    g.hurst = j.value("hurst", 0.5);
  } else if (kind == "squared_exponential") {
    g.kernel = GaussianSpec::Kernel::squared_exponential;
    g.sigma2 = j.value("sigma2", 1.0);
    g.length = j.value("length", 1.0);
  } else {
    throw error(errc::config, "unknown kernel type: " + kind);
  }
  if (j.contains("cross")) g.cross = j.at("cross").get<std::vector<double>>();
  return g;
}

inline CadlagPath path_param(const ExperimentSpec& spec, const nlohmann::json& j, int dim_x) {
  GridSpec g = spec.grid;
  g.dim_x = dim_x;
  if (j.is_number())
    return CadlagPath::constant(g, std::vector<double>(static_cast<std::size_t>(dim_x), j.get<double>()));
  auto vals = j.get<std::vector<double>>();
  if (static_cast<int>(vals.size()) == dim_x) return CadlagPath::constant(g, vals);
  if (vals.size() == g.cells() * static_cast<std::size_t>(dim_x)) return CadlagPath(g, vals);
  throw error(errc::config, "path parameter must be a constant or cells*dim_x values");
}

}  // namespace detail

inline Process build_process(const ExperimentSpec& spec, const nlohmann::json& j) {
  Process p;
  p.type = j.at("type").get<std::string>();
  const double alpha = spec.alpha.alpha;

  if (p.type == "constant") {
    auto value = j.at("value").get<std::vector<double>>();
    if (static_cast<int>(value.size()) != spec.grid.dim_x)
      throw error(errc::config, "constant value must have dim_x entries");
    auto rep = std::make_shared<RepresenterSampler>(
        representer_constant(spec.grid, value, spec.alpha, spec.norm));
    p.representer = rep;
    p.sampler = [rep](Rng& rng) { return rep->draw(rng).path; };
    double pv = std::pow(norm_eval(spec.norm, value.data(), value.size()), alpha);
    p.exact_p.assign(spec.grid.cells(), pv);
    return p;
  }
  if (p.type == "brown_resnick") {
    BrownResnickSpec brs;
    brs.gaussian = detail::gaussian_from_json(j.value("kernel", nlohmann::json{{"type", "brownian"}}));
    brs.alpha = spec.alpha;
    auto rep = std::make_shared<RepresenterSampler>(
        brown_resnick_representer(spec.grid, brs, spec.norm));
    p.representer = rep;
    p.sampler = [rep](Rng& rng) { return rep->draw(rng).path; };
    if (spec.grid.dim_x == 1) p.exact_p.assign(spec.grid.cells(), 1.0);  // lognormal identity
    return p;
  }
  if (p.type == "scaled_pareto") {
    Process inner = build_process(spec, j.at("spectral"));
    if (!inner.representer) throw error(errc::config, "scaled_pareto needs a spectral representer");
    p.representer = inner.representer;
    p.exact_p = inner.exact_p;
    p.sampler = scaled_pareto_sampler(*inner.representer);
    return p;
  }
  if (p.type == "dehaan") {
    Process inner = build_process(spec, j.at("spectral"));
    if (!inner.representer) throw error(errc::config, "dehaan needs a spectral representer");
    DeHaanConfig cfg;
    cfg.truncation_tol = j.value("truncation_tol", 1e-3);
    cfg.max_terms = j.value("max_terms", 100000ULL);
    auto rep = inner.representer;
    p.representer = rep;
    p.exact_p = inner.exact_p;
    p.sampler = [rep, cfg](Rng& rng) { return sample_dehaan_one(*rep, cfg, rng).path; };
    return p;
  }
  if (p.type == "scale_shift") {
    Process base = build_process(spec, j.at("base"));
    CadlagPath sigma = detail::path_param(spec, j.value("sigma", nlohmann::json(1.0)), 1);
    CadlagPath shift_f = detail::path_param(spec, j.value("shift", nlohmann::json(0.0)), spec.grid.dim_x);
    auto inner = base.sampler;
    p.sampler = [inner, sigma, shift_f](Rng& rng) {
      return transform_scale_shift(inner(rng), sigma, shift_f);
    };
    return p;
  }
  if (p.type == "random_scale") {
    Process base = build_process(spec, j.at("base"));
    GridSpec sg = spec.grid;
    sg.dim_x = 1;
    ExperimentSpec sub = spec;
    sub.grid = sg;
    Process scaler = build_process(sub, j.at("scaler"));
    auto xs = base.sampler;
    auto ss = scaler.sampler;
    p.sampler = [xs, ss](Rng& rng) {
      CadlagPath x = xs(rng);
      CadlagPath s = ss(rng);
      const GridSpec& g = x.grid();
      for (std::size_t c = 0; c < g.cells(); ++c) {
        double sv = s.at(c)[0];
        for (int k = 0; k < g.dim_x; ++k) x.at(c)[k] *= sv;
      }
      return x;
    };
    return p;
  }
  throw error(errc::config, "unknown process type: " + p.type);
}

struct RunFlags {
  bool strict = false;
  int threads = 0;                 // execution threads; 0 = spec.workers
  std::optional<std::uint64_t> seed_override;
  std::optional<std::uint64_t> n_override;
  std::optional<std::string> out_override;
};

namespace detail {

inline std::size_t site_cell(const ExperimentSpec& spec, const nlohmann::json& v) {
  if (v.is_number()) {
    if (spec.grid.dim_t != 1) throw error(errc::config, "scalar site needs l = 1");
    return spec.grid.locate({v.get<double>()});
  }
  return spec.grid.locate(v.get<std::vector<double>>());
}

inline Window window_param(const ExperimentSpec& spec, const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw error(errc::config, "window must be [lo, hi]");
  auto get_side = [&](const nlohmann::json& side) -> std::vector<double> {
    if (side.is_number()) return {side.get<double>()};
    return side.get<std::vector<double>>();
  };
  Window w{get_side(j.at(0)), get_side(j.at(1))};
  w.validate(spec.grid.dim_t);
  return w;
}

inline Meta artifact_meta(const ExperimentSpec& spec) {
  return Meta{{"spec_hash", spec.spec_hash},
              {"seed", std::to_string(spec.seed)},
              {"workers", std::to_string(spec.workers)},
              {"version", TAILRV_VERSION}};
}

inline void attach_meta(nlohmann::json& j, const ExperimentSpec& spec) {
  j["meta"] = {{"spec_hash", spec.spec_hash},
               {"seed", spec.seed},
               {"workers", spec.workers},
               {"version", TAILRV_VERSION}};
}

inline std::ofstream open_artifact(const ExperimentSpec& spec, const std::string& name) {
  std::filesystem::create_directories(spec.output_dir);
  auto path = std::filesystem::path(spec.output_dir) / name;
  std::ofstream os(path);
  if (!os) throw error(errc::config, "cannot open output file " + path.string());
  return os;
}

inline TailProcessFamily family_for_task(const ExperimentSpec& spec, const Process& proc,
                                         const std::vector<std::size_t>& cells,
                                         const McOptions& opt) {
  if (!proc.representer)
    throw error(errc::config, "process '" + proc.type + "' exposes no representer");
  std::vector<double> q(spec.grid.cells(), 1.0 / static_cast<double>(spec.grid.cells()));
  std::vector<double> known;
  if (!proc.exact_p.empty())
    for (auto c : cells) known.push_back(proc.exact_p[c]);
  return family_from_representer(*proc.representer, cells, q, known, 20000,
                                 seed_mix(opt.seed, 0x7071));
}

inline Functional functional_param(const ExperimentSpec& spec, const nlohmann::json& j) {
  std::string type = j.value("type", "one");
  if (type == "one") return functional_one();
  if (type == "sup_indicator") {
    Window w = j.contains("window") ? window_param(spec, j.at("window")) : full_window(spec.grid);
    return functional_sup_indicator(w, j.value("level", 1.0), spec.norm);
  }
  throw error(errc::config, "unknown functional type: " + type);
}

}  // namespace detail

/// Executes tasks in order, one artifact per task.  Identity failures are
/// reported, not fatal; --strict turns them into exit code 2.
inline int run_experiment(const ExperimentSpec& spec_in, const RunFlags& flags) {
  ExperimentSpec spec = spec_in;
  if (flags.seed_override) spec.seed = *flags.seed_override;

  Process proc = build_process(spec, spec.process);  // config errors -> 64 upstream

  McOptions opt;
  opt.seed = spec.seed;
  opt.workers = spec.workers;
  opt.threads = flags.threads;

  bool any_report_failed = false;
  for (std::size_t ti = 0; ti < spec.tasks.size(); ++ti) {
    nlohmann::json task = spec.tasks[ti];
    std::string type = task.at("type").get<std::string>();
    if (flags.n_override) task["n"] = *flags.n_override;
    if (flags.out_override) task["out"] = *flags.out_override;
    std::string default_out = std::to_string(ti) + "_" + type;
    try {
      if (type == "simulate") {
        auto n = task.value("n", 1000ULL);
        auto batch = sample_paths(proc.sampler, n, opt, role::representer);
        auto os = detail::open_artifact(spec, task.value("out", default_out + ".csv"));
        write_batch_csv(os, batch, detail::artifact_meta(spec));
      } else if (type == "estimate") {
        std::string est = task.value("estimator", "representer_functional");
        auto n = task.value("n", 100000ULL);
        nlohmann::json out;
        if (est == "representer_functional") {
          if (!proc.representer) throw error(errc::config, "estimator needs a representer");
          auto h = detail::functional_param(spec, task.value("functional", nlohmann::json{{"type", "one"}}));
          auto site = detail::site_cell(spec, task.value("site", nlohmann::json(spec.grid.lo[0])));
          double eps = task.value("eps", 1.0);
          out = estimate_to_json(representer_functional(*proc.representer, h, site, eps, n, opt));
        } else if (est == "measure_local") {
          auto h = detail::functional_param(spec, task.at("functional"));
          if (!h.support) throw error(errc::config, "measure_local needs a supported functional");
          Window k = task.contains("window") ? detail::window_param(spec, task.at("window"))
                                             : h.support->k_h;
          auto cells = cells_in_window(spec.grid, k);
          auto fam = detail::family_for_task(spec, proc, cells, opt);
          double eps = task.value("eps", h.support->eps_h);
          out = estimate_to_json(measure_functional_local(fam, h, k, eps, n, opt));
        } else if (est == "boundedness_representer") {
          if (!proc.representer) throw error(errc::config, "estimator needs a representer");
          Window k = task.contains("window") ? detail::window_param(spec, task.at("window"))
                                             : full_window(spec.grid);
          auto rep = compact_boundedness_representer(*proc.representer, k, n, opt);
          out = estimate_to_json(rep.estimate);
          out["pass"] = rep.pass;
        } else if (est == "boundedness_family") {
          Window k = task.contains("window") ? detail::window_param(spec, task.at("window"))
                                             : full_window(spec.grid);
          auto cells = cells_in_window(spec.grid, k);
          auto fam = detail::family_for_task(spec, proc, cells, opt);
          auto rep = compact_boundedness_family(fam, k, n, opt);
          out = estimate_to_json(rep.estimate);
          out["pass"] = rep.pass;
        } else {
          throw error(errc::config, "unknown estimator: " + est);
        }
        detail::attach_meta(out, spec);
        auto os = detail::open_artifact(spec, task.value("out", default_out + ".json"));
        os << out.dump(2) << "\n";
      } else if (type == "identities") {
        IdentityConfig cfg;
        cfg.site_h = detail::site_cell(spec, task.at("site_h"));
        cfg.site_t = detail::site_cell(spec, task.at("site_t"));
        cfg.n = task.value("n", 100000ULL);
        if (task.contains("xs")) cfg.xs = task.at("xs").get<std::vector<double>>();
        if (task.contains("identities"))
          cfg.identities = task.at("identities").get<std::vector<std::string>>();
        cfg.panel_t1 = task.contains("panel_t1") ? detail::site_cell(spec, task.at("panel_t1"))
                                                 : cfg.site_t;
        cfg.panel_t2 = task.contains("panel_t2") ? detail::site_cell(spec, task.at("panel_t2"))
                                                 : cfg.site_h;
        cfg.base_site = task.contains("base_site") ? detail::site_cell(spec, task.at("base_site"))
                                                   : cfg.site_h;
        std::vector<std::size_t> cells{cfg.site_h, cfg.site_t, cfg.base_site};
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        auto fam = detail::family_for_task(spec, proc, cells, opt);
        if (task.contains("corrupt_site")) {
          auto cell = detail::site_cell(spec, task.at("corrupt_site"));
          for (std::size_t si = 0; si < fam.sites.size(); ++si)
            if (fam.sites[si] == cell)
              fam = corrupt_family(fam, si, task.value("corrupt_factor", 1.5));
        }
        auto reports = identity_suite(proc.representer.get(), fam, cfg, opt);
        for (const auto& r : reports) any_report_failed = any_report_failed || !r.pass;
        nlohmann::json out;
        out["reports"] = reports_to_json(reports);
        detail::attach_meta(out, spec);
        auto os = detail::open_artifact(spec, task.value("out", default_out + ".json"));
        os << out.dump(2) << "\n";
        print_reports_table(std::cout, reports);
      } else if (type == "diagnostics") {
        std::string kind = task.value("kind", "tightness");
        auto n = task.value("n", 10000ULL);
        Window k = task.contains("window") ? detail::window_param(spec, task.at("window"))
                                           : full_window(spec.grid);
        if (kind == "boundedness") {
          nlohmann::json out;
          if (proc.representer) {
            auto rep = compact_boundedness_representer(*proc.representer, k, n, opt);
            out = estimate_to_json(rep.estimate);
            out["pass"] = rep.pass;
          } else {
            throw error(errc::config, "boundedness diagnostic needs a representer");
          }
          detail::attach_meta(out, spec);
          auto os = detail::open_artifact(spec, task.value("out", default_out + ".json"));
          os << out.dump(2) << "\n";
        } else {
          auto batch = sample_paths(proc.sampler, n, opt, role::representer);
          auto t0 = detail::site_cell(spec, task.value("site_t0", nlohmann::json(spec.grid.lo[0])));
          std::vector<double> norms;
          norms.reserve(batch.size());
          for (const auto& x : batch) norms.push_back(x.norm_at(t0, spec.norm));
          EmpiricalCDF ecdf(norms);
          std::vector<double> qs = task.value("z_quantiles", std::vector<double>{0.9, 0.99});
          std::vector<double> zs;
          for (double q : qs) zs.push_back(ecdf.quantile(q));
          std::vector<double> etas =
              task.value("etas", std::vector<double>{0.25, 0.125, 0.0625});
          double eps = task.value("eps", 1.0);
          DiagnosticTable tab;
          if (kind == "tightness") {
            auto route = task.value("route", "w_prime") == std::string("w_doubleprime")
                             ? TightnessRoute::w_doubleprime
                             : TightnessRoute::w_prime;
            tab = tightness_diagnostic(batch, k, eps, t0, etas, zs, spec.norm, route);
          } else if (kind == "anticoncentration") {
            double c = task.value("c", 2.0);
            std::vector<double> q(spec.grid.cells(),
                                  1.0 / static_cast<double>(spec.grid.cells()));
            tab = anticoncentration_diagnostic(batch, k, eps, c, etas, zs, q, t0, spec.norm);
          } else {
            throw error(errc::config, "unknown diagnostics kind: " + kind);
          }
          auto os = detail::open_artifact(spec, task.value("out", default_out + ".csv"));
          write_table_csv(os, tab, detail::artifact_meta(spec));
        }
      } else if (type == "metric") {
        CadlagPath f = read_path_file(task.at("f").get<std::string>());
        CadlagPath g = read_path_file(task.at("g").get<std::string>());
        double d = skorohod_distance_1d(f, g, spec.norm);
        int k0 = detail::enclosing_window_index(f.grid());
        double ub = d_d_upper_bound(f, g, k0, spec.norm);
        std::cout << "skorohod_distance_1d = " << fmt_double(d) << "\n";
        std::cout << "d_D_upper_bound      = " << fmt_double(ub) << "\n";
        nlohmann::json out{{"skorohod_distance_1d", d}, {"d_D_upper_bound", ub}};
        detail::attach_meta(out, spec);
        auto os = detail::open_artifact(spec, task.value("out", default_out + ".json"));
        os << out.dump(2) << "\n";
      } else {
        throw error(errc::config, "unknown task type: " + type);
      }
    } catch (const error& e) {
      if (e.kind() == errc::config) throw;  // config problems are exit 64
      std::cerr << "task " << ti << " (" << type << ") failed: " << e.what() << "\n";
      return exit_runtime;
    }
  }
  if (flags.strict && any_report_failed) return exit_report_failure;
  return exit_ok;
}

inline int run_experiment_file(const std::string& path, const RunFlags& flags) {
  std::ifstream is(path);
  if (!is) {
    std::cerr << "cannot open spec file: " << path << "\n";
    return exit_config;
  }
  std::string raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    nlohmann::json j = nlohmann::json::parse(raw);
    ExperimentSpec spec = parse_experiment(j, raw);
    return run_experiment(spec, flags);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "spec parse error: " << e.what() << "\n";
    return exit_config;
  } catch (const error& e) {
    if (e.kind() == errc::config) {
      std::cerr << "spec error: " << e.what() << "\n";
      return exit_config;
    }
    std::cerr << "runtime error: " << e.what() << "\n";
    return exit_runtime;
  }
}

}  // namespace tailrv

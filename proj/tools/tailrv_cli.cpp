// tailrv experiment runner.
//
// Subcommands: run, simulate, estimate, identities, diagnostics, metric.
// Exit codes: 0 ok, 2 strict-mode report failure, 64 config error,
// 65 runtime error.  TAILRV_SEED overrides the spec seed.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tailrv/experiment.hpp"
#include "tailrv/tailrv.hpp"

namespace {

struct CommonFlags {
  std::string spec_path;
  bool strict = false;
  int threads = 0;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::string out;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_spec) {
  if (needs_spec) cmd->add_option("spec", f.spec_path, "experiment spec (JSON)")->required();
  cmd->add_flag("--strict", f.strict, "failed identity reports exit with code 2");
  cmd->add_option("--workers", f.threads, "execution threads (results unchanged)");
  f.seed_opt = cmd->add_option("--seed", f.seed, "override the spec seed");
  f.n_opt = cmd->add_option("--n", f.n, "override task sample counts");
  f.out_opt = cmd->add_option("--out", f.out, "override task output file");
}

tailrv::RunFlags to_run_flags(const CommonFlags& f) {
  tailrv::RunFlags rf;
  rf.strict = f.strict;
  rf.threads = f.threads;
  if (f.seed_opt && f.seed_opt->count() > 0) rf.seed_override = f.seed;
  if (f.n_opt && f.n_opt->count() > 0) rf.n_override = f.n;
  if (f.out_opt && f.out_opt->count() > 0) rf.out_override = f.out;
  return rf;
}

/// Restrict the spec to tasks of one type (subcommand form of run).
int run_restricted(const CommonFlags& f, const std::string& task_type) {
  std::ifstream is(f.spec_path);
  if (!is) {
    std::cerr << "cannot open spec file: " << f.spec_path << "\n";
    return tailrv::exit_config;
  }
  std::string raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    nlohmann::json j = nlohmann::json::parse(raw);
    auto spec = tailrv::parse_experiment(j, raw);
    std::vector<nlohmann::json> keep;
    for (const auto& t : spec.tasks)
      if (t.at("type").get<std::string>() == task_type) keep.push_back(t);
    if (keep.empty()) {
      std::cerr << "spec has no '" << task_type << "' task\n";
      return tailrv::exit_config;
    }
    spec.tasks = keep;
    return tailrv::run_experiment(spec, to_run_flags(f));
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "spec parse error: " << e.what() << "\n";
    return tailrv::exit_config;
  } catch (const tailrv::error& e) {
    if (e.kind() == tailrv::errc::config) {
      std::cerr << "spec error: " << e.what() << "\n";
      return tailrv::exit_config;
    }
    std::cerr << "runtime error: " << e.what() << "\n";
    return tailrv::exit_runtime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tail-measure calculus: simulate, estimate, verify"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TAILRV_VERSION);

  CommonFlags run_f, sim_f, est_f, id_f, diag_f;
  auto* run_cmd = app.add_subcommand("run", "run every task in an experiment spec");
  add_common(run_cmd, run_f, true);
  auto* sim_cmd = app.add_subcommand("simulate", "run the spec's simulate tasks");
  add_common(sim_cmd, sim_f, true);
  auto* est_cmd = app.add_subcommand("estimate", "run the spec's estimate tasks");
  add_common(est_cmd, est_f, true);
  auto* id_cmd = app.add_subcommand("identities", "run the spec's identity tasks");
  add_common(id_cmd, id_f, true);
  auto* diag_cmd = app.add_subcommand("diagnostics", "run the spec's diagnostics tasks");
  add_common(diag_cmd, diag_f, true);

  // metric works directly on two path files; no spec needed
  std::string metric_f, metric_g, metric_norm = "sup";
  auto* metric_cmd = app.add_subcommand("metric", "J1 distance between two stored paths");
  metric_cmd->add_option("--f", metric_f, "first path (CSV or JSON)")->required();
  metric_cmd->add_option("--g", metric_g, "second path (CSV or JSON)")->required();
  metric_cmd->add_option("--norm", metric_norm, "value-space norm (sup|euclidean|l1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : tailrv::exit_config;
  }

  try {
    if (run_cmd->parsed()) return tailrv::run_experiment_file(run_f.spec_path, to_run_flags(run_f));
    if (sim_cmd->parsed()) return run_restricted(sim_f, "simulate");
    if (est_cmd->parsed()) return run_restricted(est_f, "estimate");
    if (id_cmd->parsed()) return run_restricted(id_f, "identities");
    if (diag_cmd->parsed()) return run_restricted(diag_f, "diagnostics");
    if (metric_cmd->parsed()) {
      auto f = tailrv::read_path_file(metric_f);
      auto g = tailrv::read_path_file(metric_g);
      auto norm = tailrv::norm_from_string(metric_norm);
      double d = tailrv::skorohod_distance_1d(f, g, norm);
      int k0 = tailrv::detail::enclosing_window_index(f.grid());
      double ub = tailrv::d_d_upper_bound(f, g, k0, norm);
      std::cout << "skorohod_distance_1d = " << tailrv::fmt_double(d) << "\n";
      std::cout << "d_D_upper_bound      = " << tailrv::fmt_double(ub) << "\n";
      return tailrv::exit_ok;
    }
  } catch (const tailrv::error& e) {
    if (e.kind() == tailrv::errc::config) {
      std::cerr << "error: " << e.what() << "\n";
      return tailrv::exit_config;
    }
    std::cerr << "error: " << e.what() << "\n";
    return tailrv::exit_runtime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tailrv::exit_runtime;
  }
  return tailrv::exit_config;
}

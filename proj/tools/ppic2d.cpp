// Benchmark CLI: runs the reconstruction and advection experiments and
// writes CSV error tables.
//
//   ppic2d <experiment> --method <m> --resolutions 32,64,128 --period T
//          --courant c --out file.csv [--long] [--velocity analytic|staggered]
//          [--check] [--seed s] [--zero-walltime]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 convergence-order miss under --check.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppic2d/harness.hpp"

namespace {

using namespace ppic2d;

int run(const ExperimentConfig& cfg) {
  ExperimentResult result;
  if (cfg.experiment == "geometry-selftest") {
    const SelfTestReport rep = geometry_selftest(cfg.seed);
    std::printf("geometry-selftest: %lld trials, %lld failures\n", rep.trials,
                rep.failures);
    std::printf("  closed-form clip oracle: %s\n", rep.oracle_ok ? "ok" : "FAILED");
    std::printf("  worst complement identity error: %.3g\n", rep.worst_complement);
    std::printf("  worst straight-line reduction error: %.3g\n", rep.worst_reduction);
    return rep.failures == 0 ? 0 : 3;
  }

  if (cfg.experiment == "recon-convergence")
    result = run_recon_convergence(cfg);
  else if (cfg.experiment == "vortex-reverse")
    result = run_vortex_reverse(cfg);
  else if (cfg.experiment == "curvature-static")
    result = run_curvature_static(cfg);
  else {
    std::fprintf(stderr, "unknown experiment: %s\n", cfg.experiment.c_str());
    return 2;
  }

  const std::string table = csv_table(result.rows);
  if (!cfg.output_path.empty())
    write_csv(cfg.output_path, result.rows);
  else
    std::fputs(table.c_str(), stdout);

  std::printf("# method=%s cells=%lld failures=%lld mean_cost_evals=%.2f "
              "mean_brent_evals=%.2f max_volume_error=%.3g\n",
              method_name(cfg.method), result.recon.cells, result.failed_cells,
              result.recon.mean_cost_evaluations(),
              result.recon.mean_shift_evaluations(), result.recon.max_volume_error);
  for (double ConvergenceRow::*col :
       {&ConvergenceRow::symm_diff, &ConvergenceRow::frac_linf,
        &ConvergenceRow::m1_linf, &ConvergenceRow::kappa_linf}) {
    const FitResult fit = fit_order(result.rows, col);
    const char* name = col == &ConvergenceRow::symm_diff  ? "symm_diff"
                       : col == &ConvergenceRow::frac_linf ? "frac_linf"
                       : col == &ConvergenceRow::m1_linf   ? "m1_linf"
                                                           : "kappa_linf";
    if (fit.defined)
      std::printf("# order %-10s %+.3f (%d points)\n", name, fit.slope, fit.points);
    else
      std::printf("# order %-10s undefined\n", name);
  }

  if (result.interface_cells > 0 &&
      result.failed_cells * 100 > result.interface_cells) {
    std::fprintf(stderr, "more than 1%% of reconstructions failed\n");
    return 3;
  }
  if (cfg.check) {
    const std::vector<std::string> bad = check_orders(cfg, result);
    for (const std::string& msg : bad)
      std::fprintf(stderr, "check failed: %s\n", msg.c_str());
    if (!bad.empty()) return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D volume-of-fluid interface reconstruction benchmarks"};
  app.require_subcommand(1);

  ppic2d::ExperimentConfig cfg;
  std::string method = "elvira";
  std::string velocity = "analytic";
  std::string resolutions = "32,64,128,256";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--method", method, "lvira|elvira|mof|plvira|pmof|prost");
    sub->add_option("--resolutions", resolutions, "comma-separated grid sizes");
    sub->add_option("--period", cfg.period, "deformation period T");
    sub->add_option("--courant", cfg.courant, "CFL number in (0,1]");
    sub->add_option("--out", cfg.output_path, "CSV output path");
    sub->add_option("--seed", cfg.seed, "seed for randomized suites");
    sub->add_flag("--long", cfg.long_run, "allow hours-scale configurations");
    sub->add_flag("--check", cfg.check, "verify convergence-order windows");
    sub->add_flag("--zero-walltime", cfg.zero_walltime,
                  "write wall_time_s as 0 (reproducible output files)");
    sub->add_option("--velocity", velocity, "analytic|staggered");
  };
  for (const char* name : {"recon-convergence", "vortex-reverse", "curvature-static",
                           "geometry-selftest"})
    add_common(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.experiment = app.get_subcommands().front()->get_name();

    if (method == "lvira") cfg.method = ppic2d::Method::LVIRA;
    else if (method == "elvira") cfg.method = ppic2d::Method::ELVIRA;
    else if (method == "mof") cfg.method = ppic2d::Method::MOF;
    else if (method == "plvira") cfg.method = ppic2d::Method::PLVIRA;
    else if (method == "pmof") cfg.method = ppic2d::Method::PMOF;
    else if (method == "prost") cfg.method = ppic2d::Method::PROST;
    else throw std::invalid_argument("unknown method: " + method);

    if (velocity == "staggered") cfg.use_staggered = true;
    else if (velocity != "analytic")
      throw std::invalid_argument("unknown velocity provider: " + velocity);

    cfg.resolutions.clear();
    std::string tok;
    std::istringstream rs(resolutions);
    while (std::getline(rs, tok, ',')) cfg.resolutions.push_back(std::stoi(tok));
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  }

  try {
    return run(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

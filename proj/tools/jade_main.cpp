// Command-line front end: statistical-dimension queries, transition
// predictions, single solves on instance files, and experiment sweeps.
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jade/harness.hpp"
#include "jade/instance_io.hpp"
#include "jade/model.hpp"
#include "jade/solvers.hpp"
#include "jade/statdim.hpp"

namespace {

int cmd_statdim(double rho, int M, int N, double mu, double sigma_real) {
  const auto [a_bar, b_bar] = jade::statdim::gaussian_moments(M, sigma_real);
  const auto sd = jade::statdim::statdim_smoothed(rho, M, N, mu, a_bar, b_bar);
  std::printf("rho=%.10g M=%d N=%d mu=%.10g\n", rho, M, N, mu);
  std::printf("tau_star=%.10g\n", sd.tau_star);
  std::printf("delta=%.10g\n", sd.delta);
  std::printf("delta_seq=%.10g\n", sd.delta_seq);
  return 0;
}

int cmd_predict(int N, int M, int S, double eta, int L, double sigma2) {
  const auto tp = jade::statdim::predict_transition(N, M, S, eta);
  const auto sd = jade::statdim::statdim_plain(static_cast<double>(S) / N, M, N);
  std::printf("N=%d M=%d S=%d eta=%.10g a_eta=%.10g\n", N, M, S, eta, tp.a_eta);
  std::printf("delta_seq=%.10g\n", sd.delta_seq);
  std::printf("L_success=%d\nL_fail=%d\n", tp.L_success, tp.L_fail);
  if (L > 0) {
    const auto np = jade::statdim::predict_noisy_error(L, sd.delta_seq);
    std::printf("L=%d worst_case_ratio=%.10g empirical_limit_ratio=%.10g%s\n", L,
                np.worst_case_ratio, np.empirical_limit_ratio,
                np.at_boundary ? " (boundary)" : "");
    if (sigma2 > 0.0 && 2.0 * L * M > sd.delta)
      std::printf("epsilon=%.10g\n", jade::statdim::epsilon_rule(sigma2, L, M, sd.delta));
  }
  return 0;
}

int cmd_solve(const std::string& instance_path, const jade::solvers::SolverOptions& opts,
              const std::string& out_theta, const std::string& out_trace) {
  const auto inst = jade::io::read_instance(instance_path);
  jade::solvers::SolverOptions o = opts;
  o.record_trace = true;
  const auto est = jade::solvers::solve_smoothed_dual(inst.Qt, inst.Yt, o);
  if (!out_theta.empty()) jade::io::write_matrix_csv(out_theta, est.theta_hat);
  if (!out_trace.empty()) {
    std::ofstream os(out_trace);
    if (!os) throw std::runtime_error("cannot open " + out_trace);
    os << "iter,gap,dual_objective,elapsed_ns\n";
    os << std::setprecision(17);
    for (const auto& t : est.trace)
      os << t.iter << ',' << t.gap << ',' << t.dual_objective << ',' << t.elapsed_ns << '\n';
  }
  std::printf("iterations=%d final_gap=%.10g converged=%d\n", est.iterations, est.final_gap,
              est.converged ? 1 : 0);
  return est.converged ? 0 : 2;
}

int cmd_gen_instance(int N, int M, int L, int S, double sigma2, std::uint64_t seed,
                     const std::string& out) {
  jade::SystemConfig cfg;
  cfg.N = N;
  cfg.M = M;
  cfg.L = L;
  cfg.S = S;
  cfg.sigma2 = sigma2;
  cfg.master_seed = seed;
  const auto [gt, obs] = jade::model::generate_system(cfg, 0);
  jade::io::write_instance(out, jade::model::complex_to_real_operator(obs.Q),
                           jade::model::complex_to_real_stack(obs.Y));
  std::printf("wrote %s (2L=%d 2N=%d M=%d)\n", out.c_str(), 2 * L, 2 * N, M);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-sparse joint activity detection and channel estimation toolkit"};
  app.require_subcommand(1);

  // statdim
  double rho = 0.1, mu = 0.0, sigma_real = 0.70710678118654752;
  int sd_M = 2, sd_N = 100;
  auto* sd = app.add_subcommand("statdim", "statistical-dimension bound for given sparsity");
  sd->add_option("--rho", rho, "normalized sparsity S/N")->required();
  sd->add_option("--M", sd_M, "antenna count")->required();
  sd->add_option("--N", sd_N, "device count")->required();
  sd->add_option("--mu", mu, "smoothing parameter (default 0)");
  sd->add_option("--sigma-real", sigma_real, "per-component std of active rows");

  // predict
  int p_N = 100, p_M = 2, p_S = 10, p_L = 0;
  double p_eta = 0.05, p_sigma2 = 0.0;
  auto* pr = app.add_subcommand("predict", "transition lengths and noisy-error ratios");
  pr->add_option("--N", p_N)->required();
  pr->add_option("--M", p_M)->required();
  pr->add_option("--S", p_S)->required();
  pr->add_option("--eta", p_eta, "tolerance (default 0.05)");
  pr->add_option("--L", p_L, "also report error ratios at this length");
  pr->add_option("--sigma2", p_sigma2, "real-component noise variance for the epsilon rule");

  // solve
  std::string instance_path, out_theta = "theta_hat.csv", out_trace = "trace.csv";
  std::string variant = "lipschitz_scaled";
  jade::solvers::SolverOptions opts;
  auto* so = app.add_subcommand("solve", "run the smoothed dual solver on an instance file");
  so->add_option("--instance", instance_path, "instance file path")->required();
  so->add_option("--mu", opts.mu, "smoothing parameter (default 0.01)");
  so->add_option("--epsilon", opts.epsilon, "constraint radius (default 0)");
  so->add_option("--gamma-stop", opts.gamma_stop, "relative feasibility-gap tolerance");
  so->add_option("--max-iter", opts.max_iter, "iteration cap");
  so->add_option("--variant", variant, "z step variant: lipschitz_scaled | paper_literal");
  so->add_option("--out-theta", out_theta, "estimate output CSV");
  so->add_option("--out-trace", out_trace, "iteration trace output CSV");

  // experiment
  std::string exp_name, config_path, preset_name, out_path;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int trials_override = 0;
  auto* ex = app.add_subcommand("experiment", "run a Monte Carlo sweep, write CSV");
  ex->add_option("name", exp_name, "experiment name")->required();
  ex->add_option("--config", config_path, "JSON sweep config");
  ex->add_option("--preset", preset_name, "named preset");
  ex->add_option("--out", out_path, "override output CSV path");
  ex->add_option("--trials", trials_override, "override trials per point");
  ex->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { seed_override = s; seed_given = true; },
      "override master seed");

  // gen-instance
  int g_N = 20, g_M = 2, g_L = 16, g_S = 2;
  double g_sigma2 = 0.0;
  std::uint64_t g_seed = 1;
  std::string g_out = "instance.txt";
  auto* gi = app.add_subcommand("gen-instance", "write a synthetic instance file");
  gi->add_option("--N", g_N);
  gi->add_option("--M", g_M);
  gi->add_option("--L", g_L);
  gi->add_option("--S", g_S);
  gi->add_option("--sigma2", g_sigma2, "complex per-entry noise variance");
  gi->add_option("--seed", g_seed);
  gi->add_option("--out", g_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sd->parsed()) return cmd_statdim(rho, sd_M, sd_N, mu, sigma_real);
    if (pr->parsed()) return cmd_predict(p_N, p_M, p_S, p_eta, p_L, p_sigma2);
    if (so->parsed()) {
      if (variant == "paper_literal")
        opts.z_step_variant = jade::solvers::ZStepVariant::paper_literal;
      else if (variant == "lipschitz_scaled")
        opts.z_step_variant = jade::solvers::ZStepVariant::lipschitz_scaled;
      else
        throw std::runtime_error("unknown variant: " + variant);
      return cmd_solve(instance_path, opts, out_theta, out_trace);
    }
    if (gi->parsed()) return cmd_gen_instance(g_N, g_M, g_L, g_S, g_sigma2, g_seed, g_out);
    if (ex->parsed()) {
      jade::harness::SweepSpec spec;
      if (!config_path.empty()) {
        spec = jade::harness::spec_from_file(config_path);
        spec.experiment = jade::harness::experiment_from_name(exp_name);
      } else if (!preset_name.empty()) {
        spec = jade::harness::preset(preset_name);
        if (jade::harness::experiment_name(spec.experiment) != exp_name)
          throw std::runtime_error("preset " + preset_name + " is a " +
                                   jade::harness::experiment_name(spec.experiment) +
                                   " experiment, not " + exp_name);
      } else {
        throw std::runtime_error("experiment needs --config or --preset");
      }
      if (seed_given) spec.master_seed = seed_override;
      if (trials_override > 0) spec.trials = trials_override;
      if (!out_path.empty()) spec.output = out_path;
      if (spec.output.empty()) spec.output = exp_name + ".csv";
      spec.validate();
      jade::harness::run_experiment(spec);
      std::printf("wrote %s\n", spec.output.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

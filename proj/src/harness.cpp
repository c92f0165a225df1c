#include "jade/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "jade/detect.hpp"
#include "jade/model.hpp"
#include "jade/rng.hpp"
#include "jade/statdim.hpp"

namespace jade::harness {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::int64_t ns_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

RealMatrix real_gaussian(Eigen::Index rows, Eigen::Index cols, double var, std::uint64_t seed) {
  RealMatrix A(rows, cols);
  if (var == 0.0) {
    A.setZero();
    return A;
  }
  auto rng = make_engine(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(var));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = nd(rng);
  return A;
}

// The map-style experiments share one salt so the smoothing map's mu = 0
// column and the embedding comparison's structured column reproduce the
// plain phase map trial for trial.
std::uint64_t experiment_salt(Experiment e) {
  switch (e) {
    case Experiment::phase_map:
    case Experiment::smoothing_map:
    case Experiment::embedding_compare:
      return 0x11;
    case Experiment::noisy_error:
      return 0x22;
    case Experiment::convergence:
      return 0x33;
    default:
      return 0x44;
  }
}

SystemConfig base_config(const SweepSpec& spec, int L, int S, double sigma2) {
  SystemConfig cfg;
  cfg.N = spec.N;
  cfg.M = spec.M;
  cfg.L = L;
  cfg.S = S;
  cfg.sigma2 = sigma2;
  cfg.master_seed = spec.master_seed;
  return cfg;
}

// One noiseless recovery trial for the phase-style maps. The ground truth and
// structured signatures come from the system model; the Gaussian ensemble
// swaps the sensing operator for an i.i.d. N(0, 0.5) matrix of the same
// shape. mu > 0 solves the smoothed-regularizer problem (same ball geometry).
TrialRecord run_map_trial(const SweepSpec& spec, int point_index, int L, int S, double mu,
                          bool gaussian_ensemble, int trial) {
  TrialRecord rec;
  rec.point_index = point_index;
  rec.L = L;
  rec.S = S;
  rec.mu = mu;
  rec.trial = trial;
  rec.seed = derive_seed(derive_seed(spec.master_seed, experiment_salt(spec.experiment)),
                         static_cast<std::uint64_t>(point_index), static_cast<std::uint64_t>(trial));

  auto [gt, obs] = model::generate_system(base_config(spec, L, S, 0.0), rec.seed);
  const RealMatrix theta0t = model::complex_to_real_stack(gt.theta0);
  RealMatrix Qt, Yt;
  if (gaussian_ensemble) {
    Qt = model::gaussian_real_sensing(L, spec.N, 0.5, derive_seed(rec.seed, 0xE17));
    Yt.noalias() = Qt * theta0t;
  } else {
    Qt = model::complex_to_real_operator(obs.Q);
    Yt = model::complex_to_real_stack(obs.Y);
  }

  const auto start = Clock::now();
  solvers::Estimate est;
  if (spec.solver == "smoothed_dual") {
    solvers::SolverOptions opts = spec.dual;
    opts.mu = (mu > 0.0) ? mu : spec.dual.mu;
    opts.epsilon = spec.dual_epsilon_rel * Yt.norm();
    est = solvers::solve_smoothed_dual(Qt, Yt, opts);
  } else {
    const double radius = (mu > 0.0) ? solvers::smoothed_regularizer_value(theta0t, mu)
                                     : solvers::group_l1_norm(theta0t);
    est = (spec.solver == "projected_gradient")
              ? solvers::solve_pb_projected_gradient(Qt, Yt, radius, spec.pg.tol,
                                                     spec.pg.max_iter, mu)
              : solvers::solve_pb_accelerated(Qt, Yt, radius, spec.pg.tol, spec.pg.max_iter, mu);
  }
  rec.wall_ns = ns_since(start);
  rec.converged = est.converged;
  rec.iterations = est.iterations;
  rec.success = detect::recovery_success(model::real_to_complex_stack(est.theta_hat), gt.theta0,
                                         spec.success_tol, spec.success_tol_relative);
  rec.R = detect::prediction_error(Qt, est.theta_hat, theta0t, L, spec.M);
  rec.R_hat = detect::empirical_error(Qt, est.theta_hat, Yt, L, spec.M);
  return rec;
}

struct MapPoint {
  int L = 0;
  int S = 0;
  double mu = 0.0;
};

ExperimentResult make_result(const SweepSpec& spec) {
  ExperimentResult res;
  res.experiment = spec.experiment;
  res.master_seed = spec.master_seed;
  res.config_hash = config_hash(spec);
  return res;
}

}  // namespace

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::phase_map: return "phase_map";
    case Experiment::noisy_error: return "noisy_error";
    case Experiment::smoothing_map: return "smoothing_map";
    case Experiment::convergence: return "convergence";
    case Experiment::error_vs_mu: return "error_vs_mu";
    case Experiment::embedding_compare: return "embedding_compare";
    case Experiment::statdim_table: return "statdim_table";
  }
  return "unknown";
}

Experiment experiment_from_name(const std::string& name) {
  for (auto e : {Experiment::phase_map, Experiment::noisy_error, Experiment::smoothing_map,
                 Experiment::convergence, Experiment::error_vs_mu, Experiment::embedding_compare,
                 Experiment::statdim_table})
    if (experiment_name(e) == name) return e;
  throw std::runtime_error("unknown experiment: " + name);
}

int thread_count() {
  if (const char* env = std::getenv("JADE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void SweepSpec::validate() const {
  if (N < 1 || M < 1) throw std::runtime_error("spec: N and M must be >= 1");
  if (trials < 1) throw std::runtime_error("spec: trials must be >= 1");
  const bool needs_ls = experiment == Experiment::phase_map ||
                        experiment == Experiment::smoothing_map ||
                        experiment == Experiment::embedding_compare ||
                        experiment == Experiment::noisy_error ||
                        experiment == Experiment::convergence ||
                        experiment == Experiment::error_vs_mu;
  if (needs_ls) {
    if (L_values.empty()) throw std::runtime_error("spec: L_values must be non-empty");
    if (S_values.empty()) throw std::runtime_error("spec: S_values must be non-empty");
    for (int L : L_values)
      if (L < 1) throw std::runtime_error("spec: L values must be >= 1");
    for (int S : S_values)
      if (S < 0 || S > N) throw std::runtime_error("spec: S values must be in [0, N]");
  }
  if ((experiment == Experiment::smoothing_map || experiment == Experiment::convergence ||
       experiment == Experiment::error_vs_mu) &&
      mu_values.empty())
    throw std::runtime_error("spec: mu_values must be non-empty");
  if (experiment == Experiment::statdim_table) {
    if (rho_values.empty()) throw std::runtime_error("spec: rho_values must be non-empty");
    if (mu_values.empty()) throw std::runtime_error("spec: mu_values must be non-empty");
  }
  if (sigma2 < 0.0) throw std::runtime_error("spec: sigma2 must be >= 0");
  if (solver != "projected_gradient" && solver != "smoothed_dual" && solver != "accelerated")
    throw std::runtime_error("spec: solver must be accelerated, projected_gradient or smoothed_dual");
}

std::vector<double> ExperimentResult::column(const std::string& name) const {
  for (std::size_t j = 0; j < summary_columns.size(); ++j)
    if (summary_columns[j] == name) {
      std::vector<double> out;
      out.reserve(summary_rows.size());
      for (const auto& row : summary_rows) out.push_back(row[j]);
      return out;
    }
  throw std::runtime_error("no such summary column: " + name);
}

ExperimentResult run_phase_map(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);

  std::vector<MapPoint> points;
  for (int S : spec.S_values)
    for (int L : spec.L_values) points.push_back({L, S, 0.0});

  const int n_points = static_cast<int>(points.size());
  res.trials.resize(static_cast<std::size_t>(n_points) * spec.trials);
  parallel_for(n_points * spec.trials, [&](int item) {
    const int p = item / spec.trials, t = item % spec.trials;
    res.trials[item] = run_map_trial(spec, p, points[p].L, points[p].S, 0.0, false, t);
  });

  res.summary_columns = {"point",      "L",         "S",           "mu",
                         "trials",     "successes", "success_prob", "delta_seq",
                         "pred_L_success", "pred_L_fail"};
  for (int p = 0; p < n_points; ++p) {
    int succ = 0;
    for (int t = 0; t < spec.trials; ++t) succ += res.trials[p * spec.trials + t].success;
    const auto sd = statdim::statdim_plain(static_cast<double>(points[p].S) / spec.N, spec.M, spec.N);
    const auto tp = statdim::predict_transition(spec.N, spec.M, points[p].S, spec.eta);
    res.summary_rows.push_back({static_cast<double>(p), static_cast<double>(points[p].L),
                                static_cast<double>(points[p].S), 0.0,
                                static_cast<double>(spec.trials), static_cast<double>(succ),
                                static_cast<double>(succ) / spec.trials, sd.delta_seq,
                                static_cast<double>(tp.L_success), static_cast<double>(tp.L_fail)});
  }
  return res;
}

ExperimentResult run_smoothing_map(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);
  const int S = spec.S_values.front();
  const auto [a_bar, b_bar] = statdim::gaussian_moments(spec.M, spec.sigma_real_theta);

  std::vector<MapPoint> points;
  for (double mu : spec.mu_values)
    for (int L : spec.L_values) points.push_back({L, S, mu});

  const int n_points = static_cast<int>(points.size());
  res.trials.resize(static_cast<std::size_t>(n_points) * spec.trials);
  parallel_for(n_points * spec.trials, [&](int item) {
    const int p = item / spec.trials, t = item % spec.trials;
    res.trials[item] = run_map_trial(spec, p, points[p].L, S, points[p].mu, false, t);
  });

  res.summary_columns = {"point",  "L",         "S",            "mu",
                         "trials", "successes", "success_prob", "delta_seq"};
  for (int p = 0; p < n_points; ++p) {
    int succ = 0;
    for (int t = 0; t < spec.trials; ++t) succ += res.trials[p * spec.trials + t].success;
    const auto sd = statdim::statdim_smoothed(static_cast<double>(S) / spec.N, spec.M, spec.N,
                                              points[p].mu, a_bar, b_bar);
    res.summary_rows.push_back({static_cast<double>(p), static_cast<double>(points[p].L),
                                static_cast<double>(S), points[p].mu,
                                static_cast<double>(spec.trials), static_cast<double>(succ),
                                static_cast<double>(succ) / spec.trials, sd.delta_seq});
  }
  return res;
}

ExperimentResult run_embedding_compare(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);

  std::vector<MapPoint> points;
  for (int S : spec.S_values)
    for (int L : spec.L_values) points.push_back({L, S, 0.0});

  const int n_points = static_cast<int>(points.size());
  res.trials.resize(static_cast<std::size_t>(n_points) * spec.trials * 2);
  parallel_for(n_points * spec.trials * 2, [&](int item) {
    const bool gaussian = item % 2;
    const int pair = item / 2;
    const int p = pair / spec.trials, t = pair % spec.trials;
    TrialRecord rec = run_map_trial(spec, p, points[p].L, points[p].S, 0.0, gaussian, t);
    rec.tag = gaussian ? "gaussian" : "structured";
    res.trials[item] = rec;
  });

  res.summary_columns = {"point",
                         "L",
                         "S",
                         "trials",
                         "success_prob_structured",
                         "success_prob_gaussian",
                         "delta_seq",
                         "pred_L_success",
                         "pred_L_fail"};
  for (int p = 0; p < n_points; ++p) {
    int succ_s = 0, succ_g = 0;
    for (int t = 0; t < spec.trials; ++t) {
      succ_s += res.trials[(p * spec.trials + t) * 2].success;
      succ_g += res.trials[(p * spec.trials + t) * 2 + 1].success;
    }
    const auto sd = statdim::statdim_plain(static_cast<double>(points[p].S) / spec.N, spec.M, spec.N);
    const auto tp = statdim::predict_transition(spec.N, spec.M, points[p].S, spec.eta);
    res.summary_rows.push_back(
        {static_cast<double>(p), static_cast<double>(points[p].L), static_cast<double>(points[p].S),
         static_cast<double>(spec.trials), static_cast<double>(succ_s) / spec.trials,
         static_cast<double>(succ_g) / spec.trials, sd.delta_seq, static_cast<double>(tp.L_success),
         static_cast<double>(tp.L_fail)});
  }
  return res;
}

ExperimentResult run_noisy_error(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);
  const int S = spec.S_values.front();
  const double sigma2 = spec.sigma2;  // per-real-component variance

  const int n_points = static_cast<int>(spec.L_values.size());
  res.trials.resize(static_cast<std::size_t>(n_points) * spec.trials);
  parallel_for(n_points * spec.trials, [&](int item) {
    const int p = item / spec.trials, t = item % spec.trials;
    const int L = spec.L_values[p];
    TrialRecord rec;
    rec.point_index = p;
    rec.L = L;
    rec.S = S;
    rec.trial = t;
    rec.seed = derive_seed(derive_seed(spec.master_seed, experiment_salt(spec.experiment)),
                           static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(t));

    auto [gt, obs] = model::generate_system(base_config(spec, L, S, 0.0), rec.seed);
    const RealMatrix theta0t = model::complex_to_real_stack(gt.theta0);
    const RealMatrix Qb = model::row_orthonormalize(
        model::gaussian_real_sensing(L, spec.N, 0.5, derive_seed(rec.seed, 0xE17)));
    RealMatrix Yt = Qb * theta0t;
    if (sigma2 > 0.0) Yt += real_gaussian(2 * L, spec.M, sigma2, derive_seed(rec.seed, 0x4001));

    const auto start = Clock::now();
    const double radius = solvers::group_l1_norm(theta0t);
    const auto est =
        (spec.solver == "projected_gradient")
            ? solvers::solve_pb_projected_gradient(Qb, Yt, radius, spec.pg.tol, spec.pg.max_iter)
            : solvers::solve_pb_accelerated(Qb, Yt, radius, spec.pg.tol, spec.pg.max_iter);
    rec.wall_ns = ns_since(start);
    rec.converged = est.converged;
    rec.iterations = est.iterations;
    rec.success = detect::recovery_success(model::real_to_complex_stack(est.theta_hat), gt.theta0,
                                           spec.success_tol, spec.success_tol_relative);
    rec.R = detect::prediction_error(Qb, est.theta_hat, theta0t, L, spec.M);
    rec.R_hat = detect::empirical_error(Qb, est.theta_hat, Yt, L, spec.M);
    res.trials[item] = rec;
  });

  const auto sd = statdim::statdim_plain(static_cast<double>(S) / spec.N, spec.M, spec.N);
  res.summary_columns = {"point",
                         "L",
                         "S",
                         "trials",
                         "mean_R",
                         "mean_R_over_sigma2",
                         "mean_R_over_sigma2_complex",
                         "mean_Rhat_over_sigma2",
                         "pred_worst_ratio",
                         "pred_limit_ratio",
                         "delta_seq"};
  for (int p = 0; p < n_points; ++p) {
    double mean_R = 0.0, mean_Rhat = 0.0;
    for (int t = 0; t < spec.trials; ++t) {
      mean_R += res.trials[p * spec.trials + t].R;
      mean_Rhat += res.trials[p * spec.trials + t].R_hat;
    }
    mean_R /= spec.trials;
    mean_Rhat /= spec.trials;
    const auto pred = statdim::predict_noisy_error(spec.L_values[p], sd.delta_seq);
    const double inv_s2 = sigma2 > 0.0 ? 1.0 / sigma2 : 0.0;
    res.summary_rows.push_back({static_cast<double>(p), static_cast<double>(spec.L_values[p]),
                                static_cast<double>(S), static_cast<double>(spec.trials), mean_R,
                                mean_R * inv_s2, mean_R * inv_s2 * 0.5, mean_Rhat * inv_s2,
                                pred.worst_case_ratio, pred.empirical_limit_ratio, sd.delta_seq});
  }
  return res;
}

ExperimentResult run_convergence(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);
  const int S = spec.S_values.front();
  const int L = spec.L_values.front();
  const auto [a_bar, b_bar] = statdim::gaussian_moments(spec.M, spec.sigma_real_theta);

  const int n_points = static_cast<int>(spec.mu_values.size());
  res.trials.resize(n_points);
  std::vector<std::vector<TraceRow>> traces(n_points);
  std::vector<double> final_gaps(n_points, 0.0);

  parallel_for(n_points, [&](int p) {
    const double mu = spec.mu_values[p];
    TrialRecord rec;
    rec.point_index = p;
    rec.L = L;
    rec.S = S;
    rec.mu = mu;
    rec.trial = 0;
    rec.seed = derive_seed(derive_seed(spec.master_seed, experiment_salt(spec.experiment)),
                           static_cast<std::uint64_t>(p), 0);

    auto [gt, obs] = model::generate_system(base_config(spec, L, S, spec.sigma2), rec.seed);
    const RealMatrix Qt = model::complex_to_real_operator(obs.Q);
    const RealMatrix Yt = model::complex_to_real_stack(obs.Y);
    const RealMatrix theta0t = model::complex_to_real_stack(gt.theta0);

    const double delta = statdim::statdim_smoothed(static_cast<double>(S) / spec.N, spec.M,
                                                   spec.N, mu, a_bar, b_bar).delta;
    solvers::SolverOptions opts = spec.dual;
    opts.mu = mu;
    opts.epsilon = statdim::epsilon_rule(spec.sigma2 / 2.0, L, spec.M, delta);
    opts.record_trace = true;

    const auto start = Clock::now();
    const auto est = solvers::solve_smoothed_dual(Qt, Yt, opts);
    rec.wall_ns = ns_since(start);
    rec.converged = est.converged;
    rec.iterations = est.iterations;
    rec.success = detect::recovery_success(model::real_to_complex_stack(est.theta_hat), gt.theta0,
                                           spec.success_tol, spec.success_tol_relative);
    rec.R = detect::prediction_error(Qt, est.theta_hat, theta0t, L, spec.M);
    rec.R_hat = detect::empirical_error(Qt, est.theta_hat, Yt, L, spec.M);
    res.trials[p] = rec;
    final_gaps[p] = est.final_gap;
    for (const auto& tp : est.trace)
      traces[p].push_back({mu, tp.iter, tp.gap, tp.dual_objective, tp.elapsed_ns});
  });

  for (auto& tr : traces)
    for (auto& row : tr) res.traces.push_back(row);

  res.summary_columns = {"point", "mu",      "L",          "S",        "iterations",
                         "converged", "final_gap", "epsilon", "delta_smoothed", "delta_seq"};
  for (int p = 0; p < n_points; ++p) {
    const double mu = spec.mu_values[p];
    const auto sd = statdim::statdim_smoothed(static_cast<double>(S) / spec.N, spec.M, spec.N, mu,
                                              a_bar, b_bar);
    const double eps = statdim::epsilon_rule(spec.sigma2 / 2.0, L, spec.M, sd.delta);
    res.summary_rows.push_back({static_cast<double>(p), mu, static_cast<double>(L),
                                static_cast<double>(S),
                                static_cast<double>(res.trials[p].iterations),
                                res.trials[p].converged ? 1.0 : 0.0, final_gaps[p], eps, sd.delta,
                                sd.delta_seq});
  }
  return res;
}

ExperimentResult run_error_vs_mu(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);
  const int S = spec.S_values.front();
  const int L = spec.L_values.front();
  const auto [a_bar, b_bar] = statdim::gaussian_moments(spec.M, spec.sigma_real_theta);

  const int n_points = static_cast<int>(spec.mu_values.size());
  res.trials.resize(static_cast<std::size_t>(n_points) * spec.trials);
  parallel_for(n_points * spec.trials, [&](int item) {
    const int p = item / spec.trials, t = item % spec.trials;
    const double mu = spec.mu_values[p];
    TrialRecord rec;
    rec.point_index = p;
    rec.L = L;
    rec.S = S;
    rec.mu = mu;
    rec.trial = t;
    rec.seed = derive_seed(derive_seed(spec.master_seed, experiment_salt(spec.experiment)),
                           static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(t));

    auto [gt, obs] = model::generate_system(base_config(spec, L, S, spec.sigma2), rec.seed);
    const RealMatrix Qt = model::complex_to_real_operator(obs.Q);
    const RealMatrix Yt = model::complex_to_real_stack(obs.Y);
    const RealMatrix theta0t = model::complex_to_real_stack(gt.theta0);

    const double delta = statdim::statdim_smoothed(static_cast<double>(S) / spec.N, spec.M,
                                                   spec.N, mu, a_bar, b_bar).delta;
    solvers::SolverOptions opts = spec.dual;
    opts.mu = mu;
    opts.epsilon = statdim::epsilon_rule(spec.sigma2 / 2.0, L, spec.M, delta);

    const auto start = Clock::now();
    const auto est = solvers::solve_smoothed_dual(Qt, Yt, opts);
    rec.wall_ns = ns_since(start);
    rec.converged = est.converged;
    rec.iterations = est.iterations;
    rec.success = detect::recovery_success(model::real_to_complex_stack(est.theta_hat), gt.theta0,
                                           spec.success_tol, spec.success_tol_relative);
    rec.R = detect::prediction_error(Qt, est.theta_hat, theta0t, L, spec.M);
    rec.R_hat = detect::empirical_error(Qt, est.theta_hat, Yt, L, spec.M);
    res.trials[item] = rec;
  });

  res.summary_columns = {"point",   "mu",        "L",          "S",
                         "trials",  "mean_R",    "se_R",       "mean_iterations",
                         "epsilon", "delta_smoothed", "converged_count"};
  for (int p = 0; p < n_points; ++p) {
    const double mu = spec.mu_values[p];
    double mean_R = 0.0, mean_it = 0.0;
    int conv = 0;
    for (int t = 0; t < spec.trials; ++t) {
      const auto& rec = res.trials[p * spec.trials + t];
      mean_R += rec.R;
      mean_it += rec.iterations;
      conv += rec.converged;
    }
    mean_R /= spec.trials;
    mean_it /= spec.trials;
    double var = 0.0;
    for (int t = 0; t < spec.trials; ++t) {
      const double d = res.trials[p * spec.trials + t].R - mean_R;
      var += d * d;
    }
    const double se = spec.trials > 1 ? std::sqrt(var / (spec.trials - 1.0) / spec.trials) : 0.0;
    const auto sd = statdim::statdim_smoothed(static_cast<double>(S) / spec.N, spec.M, spec.N, mu,
                                              a_bar, b_bar);
    const double eps = statdim::epsilon_rule(spec.sigma2 / 2.0, L, spec.M, sd.delta);
    res.summary_rows.push_back({static_cast<double>(p), mu, static_cast<double>(L),
                                static_cast<double>(S), static_cast<double>(spec.trials), mean_R,
                                se, mean_it, eps, sd.delta, static_cast<double>(conv)});
  }
  return res;
}

ExperimentResult run_statdim_table(const SweepSpec& spec) {
  spec.validate();
  ExperimentResult res = make_result(spec);
  const std::vector<int> Ms = spec.M_values.empty() ? std::vector<int>{spec.M} : spec.M_values;
  res.summary_columns = {"rho", "M", "mu", "tau_star", "delta", "delta_seq"};
  for (double rho : spec.rho_values)
    for (int M : Ms)
      for (double mu : spec.mu_values) {
        const auto [a_bar, b_bar] = statdim::gaussian_moments(M, spec.sigma_real_theta);
        const auto sd = statdim::statdim_smoothed(rho, M, spec.N, mu, a_bar, b_bar);
        res.summary_rows.push_back(
            {rho, static_cast<double>(M), mu, sd.tau_star, sd.delta, sd.delta_seq});
      }
  return res;
}

ExperimentResult run_experiment(const SweepSpec& spec) {
  ExperimentResult res;
  switch (spec.experiment) {
    case Experiment::phase_map: res = run_phase_map(spec); break;
    case Experiment::noisy_error: res = run_noisy_error(spec); break;
    case Experiment::smoothing_map: res = run_smoothing_map(spec); break;
    case Experiment::convergence: res = run_convergence(spec); break;
    case Experiment::error_vs_mu: res = run_error_vs_mu(spec); break;
    case Experiment::embedding_compare: res = run_embedding_compare(spec); break;
    case Experiment::statdim_table: res = run_statdim_table(spec); break;
  }
  if (!spec.output.empty()) write_csv(res, spec.output);
  return res;
}

namespace {

std::string trials_path(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + "_trials.csv";
  return path.substr(0, dot) + "_trials.csv";
}

void write_comment(std::ofstream& os, const ExperimentResult& res) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(res.config_hash));
  os << "# config_hash=" << buf << " master_seed=" << res.master_seed
     << " experiment=" << experiment_name(res.experiment) << '\n';
}

}  // namespace

void write_csv(const ExperimentResult& res, const std::string& path) {
  {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    write_comment(os, res);
    if (res.experiment == Experiment::convergence) {
      os << "mu,iter,gap,dual_objective,elapsed_ns\n";
      for (const auto& row : res.traces)
        os << fmt(row.mu) << ',' << row.iter << ',' << fmt(row.gap) << ','
           << fmt(row.dual_objective) << ',' << row.elapsed_ns << '\n';
    } else {
      for (std::size_t j = 0; j < res.summary_columns.size(); ++j) {
        if (j) os << ',';
        os << res.summary_columns[j];
      }
      os << '\n';
      for (const auto& row : res.summary_rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
          if (j) os << ',';
          os << fmt(row[j]);
        }
        os << '\n';
      }
    }
  }
  if (!res.trials.empty()) {
    std::ofstream os(trials_path(path));
    if (!os) throw std::runtime_error("write_csv: cannot open " + trials_path(path));
    write_comment(os, res);
    os << "experiment,tag,point,L,S,mu,trial,seed,converged,success,R,R_hat,iterations,wall_ns\n";
    for (const auto& r : res.trials)
      os << experiment_name(res.experiment) << ',' << r.tag << ',' << r.point_index << ',' << r.L
         << ',' << r.S << ',' << fmt(r.mu) << ',' << r.trial << ',' << r.seed << ','
         << (r.converged ? 1 : 0) << ',' << (r.success ? 1 : 0) << ',' << fmt(r.R) << ','
         << fmt(r.R_hat) << ',' << r.iterations << ',' << r.wall_ns << '\n';
  }
  // convergence runs also dump their per-mu summary next to the traces
  if (res.experiment == Experiment::convergence && !res.summary_rows.empty()) {
    const std::string spath = trials_path(path).substr(0, trials_path(path).size() - 11) +
                              "_summary.csv";
    std::ofstream os(spath);
    if (!os) throw std::runtime_error("write_csv: cannot open " + spath);
    write_comment(os, res);
    for (std::size_t j = 0; j < res.summary_columns.size(); ++j) {
      if (j) os << ',';
      os << res.summary_columns[j];
    }
    os << '\n';
    for (const auto& row : res.summary_rows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) os << ',';
        os << fmt(row[j]);
      }
      os << '\n';
    }
  }
}

std::string spec_to_json(const SweepSpec& spec) {
  json j;
  j["experiment"] = experiment_name(spec.experiment);
  j["N"] = spec.N;
  j["M"] = spec.M;
  j["L_values"] = spec.L_values;
  j["S_values"] = spec.S_values;
  j["mu_values"] = spec.mu_values;
  j["rho_values"] = spec.rho_values;
  j["M_values"] = spec.M_values;
  j["sigma2"] = spec.sigma2;
  j["trials"] = spec.trials;
  j["master_seed"] = spec.master_seed;
  j["output"] = spec.output;
  j["success_tol"] = spec.success_tol;
  j["success_tol_relative"] = spec.success_tol_relative;
  j["eta"] = spec.eta;
  j["solver"] = spec.solver;
  j["pg"] = {{"tol", spec.pg.tol}, {"max_iter", spec.pg.max_iter}};
  j["dual"] = {{"mu", spec.dual.mu},
               {"epsilon", spec.dual.epsilon},
               {"gamma_stop", spec.dual.gamma_stop},
               {"max_iter", spec.dual.max_iter},
               {"variant", spec.dual.z_step_variant == solvers::ZStepVariant::paper_literal
                               ? "paper_literal"
                               : "lipschitz_scaled"}};
  j["dual_epsilon_rel"] = spec.dual_epsilon_rel;
  j["sigma_real_theta"] = spec.sigma_real_theta;
  return j.dump();
}

SweepSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  SweepSpec spec;
  try {
    spec.experiment = experiment_from_name(j.at("experiment").get<std::string>());
    if (j.contains("N")) spec.N = j["N"].get<int>();
    if (j.contains("M")) spec.M = j["M"].get<int>();
    if (j.contains("L_values")) spec.L_values = j["L_values"].get<std::vector<int>>();
    if (j.contains("S_values")) spec.S_values = j["S_values"].get<std::vector<int>>();
    if (j.contains("mu_values")) spec.mu_values = j["mu_values"].get<std::vector<double>>();
    if (j.contains("rho_values")) spec.rho_values = j["rho_values"].get<std::vector<double>>();
    if (j.contains("M_values")) spec.M_values = j["M_values"].get<std::vector<int>>();
    if (j.contains("sigma2")) spec.sigma2 = j["sigma2"].get<double>();
    if (j.contains("trials")) spec.trials = j["trials"].get<int>();
    if (j.contains("master_seed")) spec.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("output")) spec.output = j["output"].get<std::string>();
    if (j.contains("success_tol")) spec.success_tol = j["success_tol"].get<double>();
    if (j.contains("success_tol_relative"))
      spec.success_tol_relative = j["success_tol_relative"].get<bool>();
    if (j.contains("eta")) spec.eta = j["eta"].get<double>();
    if (j.contains("solver")) spec.solver = j["solver"].get<std::string>();
    if (j.contains("pg")) {
      const auto& p = j["pg"];
      if (p.contains("tol")) spec.pg.tol = p["tol"].get<double>();
      if (p.contains("max_iter")) spec.pg.max_iter = p["max_iter"].get<int>();
    }
    if (j.contains("dual")) {
      const auto& d = j["dual"];
      if (d.contains("mu")) spec.dual.mu = d["mu"].get<double>();
      if (d.contains("epsilon")) spec.dual.epsilon = d["epsilon"].get<double>();
      if (d.contains("gamma_stop")) spec.dual.gamma_stop = d["gamma_stop"].get<double>();
      if (d.contains("max_iter")) spec.dual.max_iter = d["max_iter"].get<int>();
      if (d.contains("variant")) {
        const auto v = d["variant"].get<std::string>();
        if (v == "paper_literal")
          spec.dual.z_step_variant = solvers::ZStepVariant::paper_literal;
        else if (v == "lipschitz_scaled")
          spec.dual.z_step_variant = solvers::ZStepVariant::lipschitz_scaled;
        else
          throw std::runtime_error("config: unknown dual.variant " + v);
      }
    }
    if (j.contains("dual_epsilon_rel")) spec.dual_epsilon_rel = j["dual_epsilon_rel"].get<double>();
    if (j.contains("sigma_real_theta")) spec.sigma_real_theta = j["sigma_real_theta"].get<double>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config field error: ") + e.what());
  }
  spec.validate();
  return spec;
}

SweepSpec spec_from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config file not found: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return spec_from_json(ss.str());
}

std::uint64_t config_hash(const SweepSpec& spec) {
  // identifies the experiment definition; the output path is not part of it
  json j = json::parse(spec_to_json(spec));
  j.erase("output");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SweepSpec preset(const std::string& name) {
  SweepSpec s;
  if (name == "fig2") {
    s.experiment = Experiment::phase_map;
    s.N = 100;
    s.M = 2;
    for (int L = 10; L <= 60; L += 2) s.L_values.push_back(L);
    s.S_values = {5, 10, 15, 20};
    s.trials = 50;
    s.master_seed = 1002;
    s.output = "fig2.csv";
  } else if (name == "fig4b_scaled" || name == "fig4b_full") {
    const bool full = name == "fig4b_full";
    s.experiment = Experiment::noisy_error;
    s.N = full ? 300 : 150;
    s.M = 3;
    s.S_values = {full ? 42 : 21};
    const int d = full ? 100 : 50;  // transition location for this rho and M
    s.L_values = {d * 4 / 10, d * 6 / 10, d * 8 / 10, d, d * 12 / 10,
                  d * 15 / 10, d * 2,     d * 5 / 2};
    s.sigma2 = 1e-3;
    s.trials = 50;
    s.master_seed = 1004;
    s.output = name + ".csv";
  } else if (name == "fig5") {
    s.experiment = Experiment::smoothing_map;
    s.N = 100;
    s.M = 2;
    s.S_values = {10};
    for (int L = 20; L <= 64; L += 2) s.L_values.push_back(L);
    s.mu_values = {0.0, 0.5, 1.0};
    s.trials = 50;
    s.master_seed = 1005;
    s.output = "fig5.csv";
  } else if (name == "fig6_scaled" || name == "fig6_full") {
    const bool full = name == "fig6_full";
    s.experiment = Experiment::convergence;
    s.N = full ? 2000 : 500;
    s.M = full ? 10 : 5;
    s.S_values = {full ? 100 : 25};
    s.L_values = {full ? 500 : 125};
    s.sigma2 = 0.01;
    s.mu_values = {0.01, 0.1, 1.0};
    s.trials = 1;
    s.master_seed = 1006;
    s.dual.gamma_stop = 1e-3;
    s.dual.max_iter = 2000000;
    s.output = name + ".csv";
  } else if (name == "fig7_scaled" || name == "fig7_full") {
    const bool full = name == "fig7_full";
    s.experiment = Experiment::error_vs_mu;
    s.N = full ? 2000 : 500;
    s.M = full ? 10 : 5;
    s.S_values = {full ? 100 : 25};
    s.L_values = {full ? 500 : 125};
    s.sigma2 = 0.01;
    s.mu_values = {0.01, 0.0316, 0.1, 0.316, 1.0};
    s.trials = full ? 300 : 50;
    s.master_seed = 1007;
    s.dual.gamma_stop = 1e-3;
    s.dual.max_iter = 2000000;
    s.output = name + ".csv";
  } else if (name == "embedding") {
    s.experiment = Experiment::embedding_compare;
    s.N = 100;
    s.M = 2;
    s.S_values = {10};
    for (int L = 14; L <= 50; L += 2) s.L_values.push_back(L);
    s.trials = 50;
    s.master_seed = 1009;
    s.output = "embedding.csv";
  } else {
    throw std::runtime_error("unknown preset: " + name);
  }
  return s;
}

std::vector<std::string> preset_names() {
  return {"fig2",       "fig4b_scaled", "fig4b_full", "fig5",      "fig6_scaled",
          "fig6_full",  "fig7_scaled",  "fig7_full",  "embedding"};
}

double level_crossing(const std::vector<double>& xs, const std::vector<double>& ps, double level,
                      bool last) {
  if (xs.size() != ps.size() || xs.empty())
    throw std::invalid_argument("level_crossing: size mismatch");
  const int n = static_cast<int>(xs.size());
  if (!last && ps.front() >= level) return xs.front();
  int found = -1;
  for (int i = 0; i + 1 < n; ++i) {
    if (ps[i] < level && ps[i + 1] >= level) {
      found = i;
      if (!last) break;
    }
  }
  if (found < 0) {
    if (last && ps.front() >= level) return xs.front();
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double t = (level - ps[found]) / (ps[found + 1] - ps[found]);
  return xs[found] + t * (xs[found + 1] - xs[found]);
}

}  // namespace jade::harness

// Seeded Monte Carlo experiment driver. Each experiment produces a main CSV
// (per-point summaries, or per-iteration traces for convergence runs) and a
// companion per-trial CSV. Outputs are byte-identical for a fixed master
// seed regardless of thread count; wall-time columns are the only exception.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jade/solvers.hpp"
#include "jade/types.hpp"

namespace jade::harness {

enum class Experiment {
  phase_map,
  noisy_error,
  smoothing_map,
  convergence,
  error_vs_mu,
  embedding_compare,
  statdim_table,
};

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

struct PgOptions {
  double tol = 1e-10;
  int max_iter = 50000;
};

struct SweepSpec {
  Experiment experiment = Experiment::phase_map;
  int N = 100;
  int M = 2;
  std::vector<int> L_values;
  std::vector<int> S_values;
  std::vector<double> mu_values{0.0};
  std::vector<double> rho_values;  // statdim_table only
  std::vector<int> M_values;       // statdim_table only
  double sigma2 = 0.0;  // noisy_error: per-real-component variance of the
                        // embedded noise; convergence / error_vs_mu: complex
                        // per-entry variance of the system model
  int trials = 50;
  std::uint64_t master_seed = 1;
  std::string output;  // main CSV path; empty keeps results in memory only
  double success_tol = 1e-5;
  bool success_tol_relative = false;
  double eta = 0.05;
  // ball-constrained solver for the noiseless maps and noisy-error runs:
  // "accelerated" (default), "projected_gradient", or "smoothed_dual".
  std::string solver = "accelerated";
  PgOptions pg;
  solvers::SolverOptions dual;
  double dual_epsilon_rel = 1e-6;      // phase-map dual solves: eps = rel * |Yt|
  double sigma_real_theta = 0.70710678118654752;  // per-component std of active rows

  void validate() const;
};

struct TrialRecord {
  std::string tag;  // ensemble tag for embedding_compare, else empty
  int point_index = 0;
  int L = 0;
  int S = 0;
  double mu = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  bool success = false;
  double R = 0.0;
  double R_hat = 0.0;
  int iterations = 0;
  std::int64_t wall_ns = 0;
};

struct TraceRow {
  double mu = 0.0;
  int iter = 0;
  double gap = 0.0;
  double dual_objective = 0.0;
  std::int64_t elapsed_ns = 0;
};

struct ExperimentResult {
  Experiment experiment = Experiment::phase_map;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::string> summary_columns;
  std::vector<std::vector<double>> summary_rows;
  std::vector<TrialRecord> trials;
  std::vector<TraceRow> traces;  // convergence only

  // Column accessor for tests; throws if the name is unknown.
  std::vector<double> column(const std::string& name) const;
};

ExperimentResult run_phase_map(const SweepSpec& spec);
ExperimentResult run_noisy_error(const SweepSpec& spec);
ExperimentResult run_smoothing_map(const SweepSpec& spec);
ExperimentResult run_convergence(const SweepSpec& spec);
ExperimentResult run_error_vs_mu(const SweepSpec& spec);
ExperimentResult run_embedding_compare(const SweepSpec& spec);
ExperimentResult run_statdim_table(const SweepSpec& spec);

// Dispatch on spec.experiment and write CSVs when spec.output is set.
ExperimentResult run_experiment(const SweepSpec& spec);

// Main CSV at `path`, per-trial CSV at "<path minus extension>_trials.csv".
void write_csv(const ExperimentResult& result, const std::string& path);

std::string spec_to_json(const SweepSpec& spec);
SweepSpec spec_from_json(const std::string& text);
SweepSpec spec_from_file(const std::string& path);
std::uint64_t config_hash(const SweepSpec& spec);

// Named presets: fig2, fig4b_scaled, fig4b_full, fig5, fig6_scaled,
// fig6_full, fig7_scaled, fig7_full, embedding. Throws on unknown names.
SweepSpec preset(const std::string& name);
std::vector<std::string> preset_names();

// Linearly interpolated L where the success curve crosses `level`.
// `last` picks the rightmost upward crossing instead of the first.
// Returns NaN when the curve never reaches the level; xs.front() when it
// starts at or above it.
double level_crossing(const std::vector<double>& xs, const std::vector<double>& ps, double level,
                      bool last = false);

// Worker-pool size: JADE_THREADS when set, else hardware concurrency.
int thread_count();

}  // namespace jade::harness

// First-order solvers for the real-embedded group-sparse estimation problem:
// the smoothed dual accelerated method and a projected-gradient reference
// solver on the regularizer ball, plus their proximal building blocks.
#pragma once

#include <cstdint>
#include <vector>

#include "jade/types.hpp"

namespace jade::solvers {

// Which threshold the Z-step of the accelerated dual method uses. The
// printed recipe divides the threshold by t_k; the Lipschitz-scaled form
// matches the composite gradient mapping with step 1/L_s.
enum class ZStepVariant { paper_literal, lipschitz_scaled };

struct SolverOptions {
  double mu = 1e-2;          // smoothing parameter, > 0 for the dual solver
  double epsilon = 0.0;      // constraint radius, >= 0
  double gamma_stop = 1e-3;  // relative feasibility-gap tolerance
  int max_iter = 100000;
  ZStepVariant z_step_variant = ZStepVariant::lipschitz_scaled;
  double power_iter_tol = 1e-9;
  bool record_trace = false;
};

struct TracePoint {
  int iter = 0;
  double gap = 0.0;             // stopping metric at this iterate
  double dual_objective = 0.0;  // dual composite objective (dual solver only)
  std::int64_t elapsed_ns = 0;
};

struct Estimate {
  RealMatrix theta_hat;      // 2N x M
  RealMatrix dual_point;     // dual iterate the estimate came from (dual solver)
  int iterations = 0;
  double final_gap = 0.0;    // last value of the solver's stopping metric
  bool converged = false;
  std::vector<TracePoint> trace;
};

// Group regularizer value sum_i |X_Vi|_F over blocks V_i = rows {i, i+N}.
double group_l1_norm(const RealMatrix& X);

// Smoothed regularizer value sum_i (|X_Vi|_F + mu/2 |X_Vi|_F^2).
double smoothed_regularizer_value(const RealMatrix& X, double mu);

// max{1 - t/|Z|_F, 0} * Z; returns Z itself for t = 0 and 0 when |Z|_F <= t.
RealMatrix shrink(const RealMatrix& Z, double t);

// Apply shrink to each group block V_i = rows {i, i+N} of a 2N x M matrix.
RealMatrix group_soft_threshold(const RealMatrix& X, double t);

// Largest singular value by power iteration on Qt^T Qt, to relative
// eigenvalue tolerance `tol`.
double spectral_norm(const RealMatrix& Qt, double tol = 1e-9);

// Minimizer of R_G(T) + mu/2 |T|_F^2 - <Z, Qt T>, i.e.
// mu^-1 * group_soft_threshold(Qt^T Z, 1).
RealMatrix theta_from_dual(const RealMatrix& Z, const RealMatrix& Qt, double mu);

// Gradient of the smooth dual term: Qt * theta_from_dual(Z) - Yt.
RealMatrix dual_gradient(const RealMatrix& Z, const RealMatrix& Qt, const RealMatrix& Yt,
                         double mu);

// Value of the smooth dual term at Z (used by tests and the trace):
//   -[R_G(T_Z) + mu/2 |T_Z|^2 - <Z, Qt T_Z>] - <Z, Yt>.
double dual_smooth_value(const RealMatrix& Z, const RealMatrix& Qt, const RealMatrix& Yt,
                         double mu);

// Accelerated first-order method on the smoothed dual. Stops when the
// relative primal feasibility gap | |Qt T - Yt|_F - eps | / eps reaches
// gamma_stop (for eps = 0 the rule switches to |Qt T - Yt|_F <=
// gamma_stop * |Yt|_F). When |Yt|_F <= eps the exact solution T = 0 is
// returned immediately with a zero gap.
Estimate solve_smoothed_dual(const RealMatrix& Qt, const RealMatrix& Yt,
                             const SolverOptions& options);

// Euclidean projection onto { X : sum_i |X_Vi|_F <= r }.
RealMatrix project_group_l1_ball(const RealMatrix& X, double r);

// Euclidean projection onto { X : sum_i (|X_Vi|_F + mu/2 |X_Vi|_F^2) <= r }.
// Reduces to project_group_l1_ball at mu = 0.
RealMatrix project_smoothed_group_ball(const RealMatrix& X, double r, double mu);

// Projected gradient on |Qb T - Yt|_F^2 over the group-l1 ball of radius r
// (mu > 0 swaps in the smoothed ball). Step 1/|Qb|_2^2 on the half-squared
// objective; stops when the relative iterate change reaches tol.
Estimate solve_pb_projected_gradient(const RealMatrix& Qb, const RealMatrix& Yt, double r,
                                     double tol, int max_iter, double mu = 0.0);

// Accelerated variant (Nesterov momentum with gradient-scheme restarts) of
// the same ball-constrained problem. Much faster near the transition where
// the plain method crawls; used by the experiment harness.
Estimate solve_pb_accelerated(const RealMatrix& Qb, const RealMatrix& Yt, double r, double tol,
                              int max_iter, double mu = 0.0);

}  // namespace jade::solvers

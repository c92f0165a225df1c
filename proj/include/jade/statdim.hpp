// Closed-form statistical-dimension bounds for the group regularizer and its
// smoothed variant, the tau* root-finder, a Monte Carlo oracle, and the
// derived phase-transition / error / sequence-length predictions.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "jade/types.hpp"

namespace jade::statdim {

// Normalized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s) for
// integer or half-integer s >= 1/2. Exposed for tests.
double upper_gamma_q(double s, double x);

// E[max{u - tau, 0}^2] for u chi-distributed with 2M degrees of freedom.
// Equals 2M at tau = 0 and decays to 0 as tau grows.
double chi_tail_term(int M, double tau);

// E[(u/tau - 1) 1{u > tau}] for the same chi variable; the left-hand side of
// the tau* stationarity equation. Strictly decreasing in tau.
double chi_excess_term(int M, double tau);

// tau solving chi_excess_term(M, tau) = rho / (1 - rho), by bracketed
// bisection to absolute tolerance ~1e-12. Requires rho in (0, 1).
double tau_star_plain(double rho, int M);

// Statistical-dimension bound for the plain group regularizer at normalized
// sparsity rho = S/N. delta = N * [rho (2M + tau*^2) + (1-rho) chi_tail].
StatDimResult statdim_plain(double rho, int M, int N);

// Chi moments of the active-group norms for Theta0_tilde ~ N(0, sigma_real^2):
// a_bar = sqrt(2) Gamma((2M+1)/2)/Gamma(M) * sigma_real, b_bar = 2M sigma_real^2.
std::pair<double, double> gaussian_moments(int M, double sigma_real);

// tau* for the smoothed regularizer: same equation with right-hand side
// rho (1 + 2 mu a_bar + mu^2 b_bar) / (1 - rho).
double tau_star_smoothed(double rho, int M, double mu, double a_bar, double b_bar);

// Statistical-dimension bound for the smoothed group regularizer.
// Reduces to statdim_plain at mu = 0; non-decreasing in mu.
StatDimResult statdim_smoothed(double rho, int M, int N, double mu, double a_bar, double b_bar);

// Monte Carlo estimate of E[dist^2(G, tau * subdifferential)] minimized over
// tau_grid, for the support pattern of `gt` (mu = 0 gives the plain
// regularizer). Deterministic given the seed; sample batches use derived
// sub-seeds so a future parallel split cannot change the result.
McEstimate statdim_monte_carlo(const GroundTruth& gt, const std::vector<double>& tau_grid,
                               int samples, std::uint64_t seed, double mu = 0.0);

// Integer signature lengths bracketing the transition at tolerance eta.
// eta in (0, 1) for meaningful bounds; values up to 4 are accepted so the
// degenerate a_eta = 0 midpoint can be exercised in tests.
TransitionPrediction predict_transition(int N, int M, int S, double eta);

// Worst-case and small-noise error ratios at signature length L given the
// transition location delta_seq (both in sequence-length units).
NoisyPrediction predict_noisy_error(double L, double delta_seq);

// Constraint radius epsilon = sigma * sqrt(2LM - delta_smoothed), where
// sigma2 is the per-real-component noise variance of the embedded model and
// delta_smoothed the ambient-units statistical dimension. Throws when
// 2LM <= delta_smoothed (below the transition the rule is meaningless).
double epsilon_rule(double sigma2, int L, int M, double delta_smoothed);

// Smallest L maintaining worst-case accuracy gamma1 for smoothing mu:
// ceil(delta_smoothed / (2 M gamma1)).
int plan_sequence_length(double mu, double gamma1, double rho, int M, int N,
                         double a_bar, double b_bar);

}  // namespace jade::statdim

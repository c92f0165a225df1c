#include "jade/statdim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "jade/rng.hpp"

namespace jade::statdim {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Gamma(M + 1/2) / Gamma(M), needed by the chi first-moment terms.
double gamma_half_ratio(int M) {
  return std::exp(std::lgamma(M + 0.5) - std::lgamma(static_cast<double>(M)));
}

}  // namespace

double upper_gamma_q(double s, double x) {
  if (x < 0.0) throw std::invalid_argument("upper_gamma_q: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double frac = s - std::floor(s);
  double q, base;
  if (frac == 0.0) {
    // integer s: Q(1, x) = e^-x, then Q(s+1, x) = Q(s, x) + x^s e^-x / s!
    q = std::exp(-x);
    base = 1.0;
  } else if (frac == 0.5) {
    q = std::erfc(std::sqrt(x));
    base = 0.5;
  } else {
    throw std::invalid_argument("upper_gamma_q: s must be integer or half-integer");
  }
  for (double t = base; t < s - 0.25; t += 1.0)
    q += std::exp(t * std::log(x) - x - std::lgamma(t + 1.0));
  return std::min(q, 1.0);
}

double chi_tail_term(int M, double tau) {
  if (M < 1) throw std::invalid_argument("chi_tail_term: M must be >= 1");
  if (tau < 0.0) throw std::invalid_argument("chi_tail_term: tau must be >= 0");
  const double x = 0.5 * tau * tau;
  const double t1 = 2.0 * M * upper_gamma_q(M + 1.0, x);
  const double t2 = 2.0 * kSqrt2 * tau * gamma_half_ratio(M) * upper_gamma_q(M + 0.5, x);
  const double t3 = tau * tau * upper_gamma_q(static_cast<double>(M), x);
  return std::max(t1 - t2 + t3, 0.0);
}

double chi_excess_term(int M, double tau) {
  if (M < 1) throw std::invalid_argument("chi_excess_term: M must be >= 1");
  if (tau <= 0.0) throw std::invalid_argument("chi_excess_term: tau must be > 0");
  const double x = 0.5 * tau * tau;
  return (kSqrt2 / tau) * gamma_half_ratio(M) * upper_gamma_q(M + 0.5, x) -
         upper_gamma_q(static_cast<double>(M), x);
}

namespace {

// Solve chi_excess_term(M, tau) = rhs by bisection. The left side decreases
// strictly from +inf (tau -> 0+) to 0, so a bracket always exists.
double solve_tau_star(int M, double rhs) {
  double lo = 1e-6, hi = 1.0;
  while (chi_excess_term(M, lo) < rhs) {
    lo *= 0.1;
    if (lo < 1e-300) return 0.0;
  }
  while (chi_excess_term(M, hi) > rhs) {
    hi *= 2.0;
    if (hi > 1e6) break;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi_excess_term(M, mid) > rhs)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

StatDimResult statdim_from_scale(double rho, int M, int N, double scale) {
  StatDimResult r;
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("statdim: rho must be in [0, 1]");
  if (rho == 0.0) {
    r.delta = 0.0;
    r.tau_star = std::numeric_limits<double>::infinity();
    r.delta_seq = 0.0;
    return r;
  }
  if (rho == 1.0) {
    r.tau_star = 0.0;
    r.delta = 2.0 * N * M;
    r.delta_seq = r.delta / (2.0 * M);
    return r;
  }
  const double tau = solve_tau_star(M, rho * scale / (1.0 - rho));
  const double objective = rho * (2.0 * M + tau * tau * scale) + (1.0 - rho) * chi_tail_term(M, tau);
  r.tau_star = tau;
  r.delta = std::min(N * objective, 2.0 * N * static_cast<double>(M));
  r.delta_seq = r.delta / (2.0 * M);
  return r;
}

}  // namespace

double tau_star_plain(double rho, int M) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("tau_star_plain: rho must be in (0, 1)");
  return solve_tau_star(M, rho / (1.0 - rho));
}

StatDimResult statdim_plain(double rho, int M, int N) {
  return statdim_from_scale(rho, M, N, 1.0);
}

std::pair<double, double> gaussian_moments(int M, double sigma_real) {
  if (M < 1) throw std::invalid_argument("gaussian_moments: M must be >= 1");
  if (sigma_real < 0.0) throw std::invalid_argument("gaussian_moments: sigma must be >= 0");
  const double a_bar = kSqrt2 * gamma_half_ratio(M) * sigma_real;
  const double b_bar = 2.0 * M * sigma_real * sigma_real;
  return {a_bar, b_bar};
}

double tau_star_smoothed(double rho, int M, double mu, double a_bar, double b_bar) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("tau_star_smoothed: rho must be in (0, 1)");
  const double scale = 1.0 + 2.0 * mu * a_bar + mu * mu * b_bar;
  return solve_tau_star(M, rho * scale / (1.0 - rho));
}

StatDimResult statdim_smoothed(double rho, int M, int N, double mu, double a_bar, double b_bar) {
  const double scale = 1.0 + 2.0 * mu * a_bar + mu * mu * b_bar;
  return statdim_from_scale(rho, M, N, scale);
}

McEstimate statdim_monte_carlo(const GroundTruth& gt, const std::vector<double>& tau_grid,
                               int samples, std::uint64_t seed, double mu) {
  if (tau_grid.empty()) throw std::invalid_argument("statdim_monte_carlo: empty tau grid");
  if (samples < 1) throw std::invalid_argument("statdim_monte_carlo: samples must be >= 1");
  const int N = static_cast<int>(gt.theta0.rows());
  const int M = static_cast<int>(gt.theta0.cols());
  const int S = static_cast<int>(gt.support.size());
  const int n_inactive = N - S;

  // Active-group subdifferential directions d_i = u_i + mu * Theta_i with
  // u_i the unit group direction. Only <G, d>, |d|^2 and |G|^2 enter the
  // per-sample distance, so keep d as flattened real vectors of length 2M.
  std::vector<std::vector<double>> dirs(S, std::vector<double>(2 * M));
  double dir_sq_sum = 0.0;
  for (int k = 0; k < S; ++k) {
    const int i = gt.support[k];
    const double norm = gt.theta0.row(i).norm();
    if (norm == 0.0) throw std::invalid_argument("statdim_monte_carlo: zero active row");
    for (int j = 0; j < M; ++j) {
      const auto v = gt.theta0(i, j);
      dirs[k][2 * j] = v.real() / norm + mu * v.real();
      dirs[k][2 * j + 1] = v.imag() / norm + mu * v.imag();
    }
    for (double d : dirs[k]) dir_sq_sum += d * d;
  }

  const int n_tau = static_cast<int>(tau_grid.size());
  std::vector<double> sum(n_tau, 0.0), sum_sq(n_tau, 0.0);
  std::vector<double> inactive_norm(n_inactive);
  std::vector<double> suffix(n_inactive + 1), suffix_sq(n_inactive + 1);

  constexpr int kBatch = 1024;
  int done = 0;
  for (int batch = 0; done < samples; ++batch) {
    auto rng = make_engine(derive_seed(seed, static_cast<std::uint64_t>(batch)));
    std::normal_distribution<double> nd(0.0, 1.0);
    const int count = std::min(kBatch, samples - done);
    for (int s = 0; s < count; ++s) {
      double active_sq = 0.0, active_dot = 0.0;
      for (int k = 0; k < S; ++k) {
        for (int j = 0; j < 2 * M; ++j) {
          const double g = nd(rng);
          active_sq += g * g;
          active_dot += g * dirs[k][j];
        }
      }
      for (int k = 0; k < n_inactive; ++k) {
        double sq = 0.0;
        for (int j = 0; j < 2 * M; ++j) {
          const double g = nd(rng);
          sq += g * g;
        }
        inactive_norm[k] = std::sqrt(sq);
      }
      std::sort(inactive_norm.begin(), inactive_norm.end());
      // suffix sums over sorted norms let each tau evaluate in O(log n)
      double sfx = 0.0, sfx_sq = 0.0;
      suffix[n_inactive] = 0.0;
      suffix_sq[n_inactive] = 0.0;
      for (int k = n_inactive - 1; k >= 0; --k) {
        sfx += inactive_norm[k];
        sfx_sq += inactive_norm[k] * inactive_norm[k];
        suffix[k] = sfx;
        suffix_sq[k] = sfx_sq;
      }
      for (int t = 0; t < n_tau; ++t) {
        const double tau = tau_grid[t];
        const auto it = std::upper_bound(inactive_norm.begin(), inactive_norm.end(), tau);
        const int k0 = static_cast<int>(it - inactive_norm.begin());
        const int cnt = n_inactive - k0;
        const double inact = suffix_sq[k0] - 2.0 * tau * suffix[k0] + tau * tau * cnt;
        const double d = active_sq - 2.0 * tau * active_dot + tau * tau * dir_sq_sum + inact;
        sum[t] += d;
        sum_sq[t] += d * d;
      }
    }
    done += count;
  }

  McEstimate best;
  best.delta = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_tau; ++t) {
    const double mean = sum[t] / samples;
    if (mean < best.delta) {
      const double var = std::max(sum_sq[t] / samples - mean * mean, 0.0);
      best.delta = mean;
      best.std_error = std::sqrt(var / samples);
      best.tau_at_min = tau_grid[t];
    }
  }
  return best;
}

TransitionPrediction predict_transition(int N, int M, int S, double eta) {
  if (!(eta > 0.0 && eta <= 4.0)) throw std::invalid_argument("predict_transition: eta must be in (0, 4]");
  TransitionPrediction p;
  p.eta = eta;
  p.a_eta = std::sqrt(8.0 * std::log(4.0 / eta));
  const double delta = statdim_plain(static_cast<double>(S) / N, M, N).delta;
  const double spread = p.a_eta * std::sqrt(2.0 * N * M) / M;
  p.L_success = static_cast<int>(std::ceil((delta / M + spread) / 2.0));
  p.L_fail = std::max(0, static_cast<int>(std::floor((delta / M - spread) / 2.0)));
  return p;
}

NoisyPrediction predict_noisy_error(double L, double delta_seq) {
  if (L <= 0.0) throw std::invalid_argument("predict_noisy_error: L must be > 0");
  NoisyPrediction p;
  if (L < delta_seq) {
    p.worst_case_ratio = 1.0;
    p.empirical_limit_ratio = 0.0;
  } else {
    p.worst_case_ratio = delta_seq / L;
    p.empirical_limit_ratio = 1.0 - delta_seq / L;
    p.at_boundary = (L == delta_seq);
  }
  return p;
}

double epsilon_rule(double sigma2, int L, int M, double delta_smoothed) {
  if (sigma2 < 0.0) throw std::invalid_argument("epsilon_rule: sigma2 must be >= 0");
  const double slack = 2.0 * L * M - delta_smoothed;
  if (slack <= 0.0) throw std::invalid_argument("epsilon_rule: infeasible, 2LM <= delta");
  return std::sqrt(sigma2) * std::sqrt(slack);
}

int plan_sequence_length(double mu, double gamma1, double rho, int M, int N,
                         double a_bar, double b_bar) {
  if (!(gamma1 > 0.0 && gamma1 <= 1.0))
    throw std::invalid_argument("plan_sequence_length: gamma1 must be in (0, 1]");
  const double delta = statdim_smoothed(rho, M, N, mu, a_bar, b_bar).delta;
  return static_cast<int>(std::ceil(delta / (2.0 * M * gamma1)));
}

}  // namespace jade::statdim

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "jade/model.hpp"
#include "jade/rng.hpp"
#include "jade/statdim.hpp"

using namespace jade;
using namespace jade::statdim;

namespace {

// Adaptive Simpson quadrature, the independent oracle for the closed-form
// tail expectations.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  // panelize first so narrow mass cannot hide from the initial samples
  const int panels = 200;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + (b - a) * p / panels;
    const double pb = a + (b - a) * (p + 1) / panels;
    const double m = 0.5 * (pa + pb);
    const double fa = f(pa), fm = f(m), fb = f(pb);
    const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson(f, pa, pb, fa, fm, fb, whole, tol / panels, 40);
  }
  return total;
}

// Direct quadrature of the tail expectation integrand.
double chi_tail_quadrature(int M, double tau) {
  const double coef = std::exp((1.0 - M) * std::log(2.0) - std::lgamma(static_cast<double>(M)));
  auto integrand = [&](double u) {
    if (u <= tau) return 0.0;
    const double d = u - tau;
    return coef * d * d * std::pow(u, 2 * M - 1) * std::exp(-0.5 * u * u);
  };
  const double hi = std::max(tau, std::sqrt(2.0 * M + 1.0)) + 45.0;
  return integrate(integrand, tau, hi, 1e-13);
}

double chi_excess_quadrature(int M, double tau) {
  const double coef = std::exp((1.0 - M) * std::log(2.0) - std::lgamma(static_cast<double>(M)));
  auto integrand = [&](double u) {
    if (u <= tau) return 0.0;
    return coef * (u / tau - 1.0) * std::pow(u, 2 * M - 1) * std::exp(-0.5 * u * u);
  };
  const double hi = std::max(tau, std::sqrt(2.0 * M + 1.0)) + 45.0;
  return integrate(integrand, tau, hi, 1e-13);
}

GroundTruth make_ground_truth(int N, int M, int S, std::uint64_t seed) {
  SystemConfig cfg;
  cfg.N = N;
  cfg.M = M;
  cfg.L = 1;
  cfg.S = S;
  cfg.master_seed = seed;
  return model::generate_system(cfg, 7).first;
}

std::vector<double> tau_grid_around(double center, double half_width, int steps) {
  std::vector<double> grid;
  const double lo = std::max(center - half_width, 0.0);
  for (int i = 0; i <= steps; ++i) grid.push_back(lo + (2.0 * half_width) * i / steps);
  return grid;
}

}  // namespace

TEST_CASE("chi_tail_term at tau = 0 equals the chi-square mean 2M") {
  for (int M : {1, 2, 3, 5, 8, 16}) CHECK(chi_tail_term(M, 0.0) == doctest::Approx(2.0 * M).epsilon(1e-14));
}

TEST_CASE("chi_tail_term vanishes for large tau") {
  CHECK(chi_tail_term(2, 40.0) <= 1e-10);
}

TEST_CASE("chi_tail_term matches adaptive quadrature") {
  for (int M : {1, 2, 3, 4, 6, 8, 12, 16})
    for (double tau : {0.0, 0.3, 1.0, 2.5, 5.0, 9.0, 14.0, 20.0}) {
      const double closed = chi_tail_term(M, tau);
      const double quad = chi_tail_quadrature(M, tau);
      CHECK(std::abs(closed - quad) <= 1e-8);
    }
}

TEST_CASE("chi_excess_term matches adaptive quadrature") {
  for (int M : {1, 3, 8})
    for (double tau : {0.2, 1.0, 3.0, 6.0})
      CHECK(std::abs(chi_excess_term(M, tau) - chi_excess_quadrature(M, tau)) <= 1e-8);
}

TEST_CASE("tau_star_plain satisfies the stationarity equation") {
  for (double rho : {0.05, 0.14, 0.3, 0.5})
    for (int M : {1, 2, 3, 8}) {
      const double tau = tau_star_plain(rho, M);
      CHECK(std::abs(chi_excess_term(M, tau) - rho / (1.0 - rho)) <= 1e-6);
    }
}

TEST_CASE("tau_star_plain shrinks as rho approaches one") {
  CHECK(tau_star_plain(1.0 - 1e-9, 1) < 1e-3);
}

TEST_CASE("tau_star_plain is monotone decreasing in rho") {
  CHECK(tau_star_plain(0.05, 2) > tau_star_plain(0.2, 2));
}

TEST_CASE("tau_star_plain rejects rho outside (0,1)") {
  CHECK_THROWS(tau_star_plain(0.0, 2));
  CHECK_THROWS(tau_star_plain(1.0, 2));
  CHECK_THROWS(tau_star_plain(-0.1, 2));
}

TEST_CASE("statdim_plain edge cases") {
  const auto full = statdim_plain(1.0, 3, 10);
  CHECK(full.delta == doctest::Approx(60.0));
  CHECK(full.tau_star == 0.0);
  CHECK(statdim_plain(0.0, 3, 10).delta == 0.0);
}

TEST_CASE("statdim_plain frozen anchors") {
  // Frozen from two independent oracles (adaptive quadrature of the tail
  // integrals and the Monte Carlo subdifferential distance).
  const auto a = statdim_plain(42.0 / 300.0, 3, 300);
  CHECK(a.delta_seq == doctest::Approx(91.0844).epsilon(1e-4));
  const auto b = statdim_plain(0.1, 2, 100);
  CHECK(b.delta_seq == doctest::Approx(24.48157).epsilon(1e-4));
}

TEST_CASE("statdim_plain tau_star minimizes the objective on a grid") {
  const auto sd = statdim_plain(0.1, 2, 100);
  auto objective = [&](double tau) {
    return 100.0 * (0.1 * (4.0 + tau * tau) + 0.9 * chi_tail_term(2, tau));
  };
  const double at_star = objective(sd.tau_star);
  for (double tau = 0.05; tau <= 5.0; tau += 0.05) CHECK(at_star <= objective(tau) + 1e-9);
  CHECK(sd.delta == doctest::Approx(at_star).epsilon(1e-12));
}

TEST_CASE("statdim bounds and monotonicity in rho") {
  double prev = -1.0;
  for (double rho : {0.0, 0.05, 0.1, 0.2, 0.5, 0.8, 1.0}) {
    const auto sd = statdim_plain(rho, 4, 50);
    CHECK(sd.delta >= 0.0);
    CHECK(sd.delta <= 2.0 * 50 * 4 + 1e-9);
    CHECK(sd.delta >= prev - 1e-9);
    prev = sd.delta;
  }
}

TEST_CASE("gaussian_moments closed forms") {
  const auto [a0, b0] = gaussian_moments(3, 0.0);
  CHECK(a0 == 0.0);
  CHECK(b0 == 0.0);
  const auto [a1, b1] = gaussian_moments(1, 1.0);
  CHECK(a1 == doctest::Approx(std::sqrt(std::acos(-1.0) / 2.0)).epsilon(1e-12));
  CHECK(b1 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gaussian_moments a_bar matches sampled group norms") {
  const int M = 2;
  auto rng = make_engine(42);
  std::normal_distribution<double> nd(0.0, 1.0);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    double sq = 0.0;
    for (int j = 0; j < 2 * M; ++j) {
      const double g = nd(rng);
      sq += g * g;
    }
    sum += std::sqrt(sq);
  }
  const auto [a_bar, b_bar] = gaussian_moments(M, 1.0);
  CHECK(sum / n == doctest::Approx(a_bar).epsilon(0.005));
}

TEST_CASE("tau_star_smoothed reduces to plain at mu = 0") {
  const auto [a_bar, b_bar] = gaussian_moments(2, 1.0 / std::sqrt(2.0));
  CHECK(tau_star_smoothed(0.1, 2, 0.0, a_bar, b_bar) ==
        doctest::Approx(tau_star_plain(0.1, 2)).epsilon(1e-12));
}

TEST_CASE("tau_star_smoothed decreases with mu") {
  const auto [a_bar, b_bar] = gaussian_moments(2, 1.0 / std::sqrt(2.0));
  CHECK(tau_star_smoothed(0.1, 2, 1.0, a_bar, b_bar) <
        tau_star_smoothed(0.1, 2, 0.1, a_bar, b_bar));
}

TEST_CASE("tau_star_smoothed residual check") {
  const auto [a_bar, b_bar] = gaussian_moments(2, 1.0 / std::sqrt(2.0));
  const double mu = 1.0;
  const double tau = tau_star_smoothed(0.1, 2, mu, a_bar, b_bar);
  const double scale = 1.0 + 2.0 * mu * a_bar + mu * mu * b_bar;
  CHECK(std::abs(chi_excess_term(2, tau) - 0.1 * scale / 0.9) <= 1e-6);
}

TEST_CASE("statdim_smoothed equals plain at mu = 0 and grows with mu") {
  const auto [a_bar, b_bar] = gaussian_moments(2, 1.0 / std::sqrt(2.0));
  CHECK(statdim_smoothed(0.1, 2, 100, 0.0, a_bar, b_bar).delta ==
        doctest::Approx(statdim_plain(0.1, 2, 100).delta).epsilon(1e-12));
  double prev = 0.0;
  for (double mu : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
    const double d = statdim_smoothed(0.1, 2, 100, mu, a_bar, b_bar).delta;
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("monte carlo oracle: full-dimensional support") {
  const auto gt = make_ground_truth(20, 2, 20, 5);
  const auto est = statdim_monte_carlo(gt, {0.0, 0.1}, 4000, 11);
  CHECK(std::abs(est.delta - 2.0 * 20 * 2) <= 3.0 * est.std_error + 1e-9);
}

TEST_CASE("monte carlo oracle matches statdim_plain") {
  const auto gt = make_ground_truth(100, 2, 10, 5);
  const auto sd = statdim_plain(0.1, 2, 100);
  const auto est = statdim_monte_carlo(gt, tau_grid_around(sd.tau_star, 0.5, 50), 10000, 13);
  CHECK(est.delta == doctest::Approx(sd.delta).epsilon(0.02));
}

TEST_CASE("monte carlo oracle matches statdim_smoothed with empirical moments") {
  const int N = 100, M = 2, S = 10;
  const auto gt = make_ground_truth(N, M, S, 6);
  const RealMatrix t0 = model::complex_to_real_stack(gt.theta0);
  double a_bar = 0.0, b_bar = 0.0;
  for (int i : gt.support) {
    const double n = gt.theta0.row(i).norm();
    a_bar += n;
    b_bar += n * n;
  }
  a_bar /= S;
  b_bar /= S;
  const double mu = 1.0;
  const auto sd = statdim_smoothed(static_cast<double>(S) / N, M, N, mu, a_bar, b_bar);
  const auto est = statdim_monte_carlo(gt, tau_grid_around(sd.tau_star, 0.4, 60), 10000, 17, mu);
  CHECK(est.delta == doctest::Approx(sd.delta).epsilon(0.02));
}

TEST_CASE("predict_transition degenerate eta collapses the bracket") {
  const auto tp = predict_transition(100, 2, 10, 4.0);
  CHECK(tp.a_eta == doctest::Approx(0.0));
  const auto sd = statdim_plain(0.1, 2, 100);
  CHECK(tp.L_success == static_cast<int>(std::ceil(sd.delta_seq)));
  CHECK(tp.L_success == tp.L_fail + (sd.delta_seq == std::floor(sd.delta_seq) ? 0 : 1));
}

TEST_CASE("predict_transition bracket at eta = 0.05") {
  const auto tp = predict_transition(100, 2, 10, 0.05);
  const auto sd = statdim_plain(0.1, 2, 100);
  // L_success = ceil((delta/M + a_eta sqrt(2NM)/M)/2); the failure bound is
  // negative at this scale, so L_fail clamps to zero.
  const double spread = tp.a_eta * std::sqrt(2.0 * 100 * 2) / 2.0;
  CHECK(tp.L_success == static_cast<int>(std::ceil((sd.delta / 2.0 + spread) / 2.0)));
  CHECK(tp.L_success == 55);
  CHECK(tp.L_fail == 0);
  CHECK(tp.L_fail <= tp.L_success);
}

TEST_CASE("predict_transition width shrinks as M grows with NM fixed") {
  double prev_width = 1e18;
  for (int M : {2, 8, 32}) {
    const int N = 1600 / M;
    const auto tp = predict_transition(N, M, N / 10, 0.05);
    const double width = tp.L_success - tp.L_fail;
    CHECK(width < prev_width);
    prev_width = width;
  }
}

TEST_CASE("predict_noisy_error branches and the sum identity") {
  const auto above = predict_noisy_error(2.0 * 30.0, 30.0);
  CHECK(above.worst_case_ratio == doctest::Approx(0.5));
  CHECK(above.empirical_limit_ratio == doctest::Approx(0.5));
  const auto below = predict_noisy_error(0.8 * 30.0, 30.0);
  CHECK(below.worst_case_ratio == 1.0);
  CHECK(below.empirical_limit_ratio == 0.0);
  const auto boundary = predict_noisy_error(30.0, 30.0);
  CHECK(boundary.worst_case_ratio == 1.0);
  CHECK(boundary.at_boundary);
  for (double L : {1.0, 10.0, 29.0, 30.0, 31.0, 300.0}) {
    const auto p = predict_noisy_error(L, 30.0);
    CHECK(p.worst_case_ratio + p.empirical_limit_ratio == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("epsilon_rule") {
  CHECK(epsilon_rule(0.0, 100, 2, 50.0) == 0.0);
  CHECK(epsilon_rule(1.0, 10, 1, 19.0) == doctest::Approx(1.0));
  CHECK_THROWS(epsilon_rule(1.0, 10, 1, 20.0));
  CHECK_THROWS(epsilon_rule(1.0, 10, 1, 25.0));
}

TEST_CASE("plan_sequence_length") {
  const auto [a_bar, b_bar] = gaussian_moments(2, 1.0 / std::sqrt(2.0));
  const auto sd = statdim_plain(0.1, 2, 100);
  CHECK(plan_sequence_length(0.0, 1.0, 0.1, 2, 100, a_bar, b_bar) ==
        static_cast<int>(std::ceil(sd.delta_seq)));
  CHECK(plan_sequence_length(0.0, 0.5, 0.1, 2, 100, a_bar, b_bar) ==
        static_cast<int>(std::ceil(sd.delta / (2.0 * 2 * 0.5))));
  CHECK(plan_sequence_length(0.5, 1.0, 0.1, 2, 100, a_bar, b_bar) >=
        plan_sequence_length(0.0, 1.0, 0.1, 2, 100, a_bar, b_bar));
}

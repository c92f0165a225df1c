#include <doctest.h>

#include <cmath>
#include <random>

#include "jade/detect.hpp"
#include "jade/model.hpp"
#include "jade/rng.hpp"
#include "jade/solvers.hpp"

using namespace jade;
using namespace jade::detect;

namespace {

std::pair<GroundTruth, Observation> make_instance(int N, int M, int L, int S, double sigma2,
                                                  std::uint64_t seed) {
  SystemConfig cfg;
  cfg.N = N;
  cfg.M = M;
  cfg.L = L;
  cfg.S = S;
  cfg.sigma2 = sigma2;
  cfg.master_seed = seed;
  return model::generate_system(cfg, 0);
}

}  // namespace

TEST_CASE("detect_activity on the exact ground truth") {
  const auto [gt, obs] = make_instance(30, 2, 10, 6, 0.0, 41);
  const auto res = detect_activity(gt.theta0, 1e-6, gt.activity);
  CHECK(res.missed == 0);
  CHECK(res.false_alarm == 0);
  CHECK(res.detected == gt.support);
  REQUIRE(res.H_hat.rows() == 6);
  for (int k = 0; k < 6; ++k)
    CHECK((res.H_hat.row(k) - gt.theta0.row(gt.support[k])).norm() == 0.0);
}

TEST_CASE("detect_activity on the zero estimate misses everything") {
  const auto [gt, obs] = make_instance(30, 2, 10, 6, 0.0, 42);
  const auto res = detect_activity(ComplexMatrix::Zero(30, 2), 1e-6, gt.activity);
  CHECK(res.missed == 6);
  CHECK(res.false_alarm == 0);
  CHECK(res.H_hat.rows() == 0);
}

TEST_CASE("detect_activity error counts stay within their caps") {
  const auto [gt, obs] = make_instance(40, 2, 10, 8, 0.0, 43);
  auto rng = make_engine(44);
  std::normal_distribution<double> nd(0.0, 1.0);
  ComplexMatrix noisy = gt.theta0;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 2; ++j) noisy(i, j) += std::complex<double>(nd(rng), nd(rng)) * 0.3;
  for (double g : {0.0, 0.2, 0.5, 1.0, 5.0}) {
    const auto res = detect_activity(noisy, g, gt.activity);
    CHECK(res.missed <= 8);
    CHECK(res.false_alarm <= 32);
  }
}

TEST_CASE("detect_activity is monotone in the threshold") {
  const auto [gt, obs] = make_instance(50, 3, 10, 10, 0.0, 45);
  auto rng = make_engine(46);
  std::normal_distribution<double> nd(0.0, 0.2);
  ComplexMatrix noisy = gt.theta0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 3; ++j) noisy(i, j) += std::complex<double>(nd(rng), nd(rng));
  int prev_missed = -1, prev_false = 1 << 30;
  for (double g : {0.0, 0.1, 0.3, 0.6, 1.0, 2.0, 10.0}) {
    const auto res = detect_activity(noisy, g, gt.activity);
    CHECK(res.missed >= prev_missed);
    CHECK(res.false_alarm <= prev_false);
    prev_missed = res.missed;
    prev_false = res.false_alarm;
  }
}

TEST_CASE("recovery_success absolute and relative") {
  const auto [gt, obs] = make_instance(20, 2, 10, 4, 0.0, 47);
  CHECK(recovery_success(gt.theta0, gt.theta0, 1e-5));
  ComplexMatrix off = gt.theta0;
  off(0, 0) += 2e-5;  // |E|_F = 2 tol
  CHECK_FALSE(recovery_success(off, gt.theta0, 1e-5));
  CHECK(recovery_success(off, gt.theta0, 1e-4));
  CHECK(recovery_success(off, gt.theta0, 1e-4 / gt.theta0.norm(), true));
}

TEST_CASE("prediction_error basics") {
  const auto [gt, obs] = make_instance(20, 2, 12, 4, 0.0, 48);
  CHECK(prediction_error(obs.Q, gt.theta0, gt.theta0, 12, 2) == 0.0);

  // with orthonormal rows the operator is an isometry on its row space
  const RealMatrix Qb = model::row_orthonormalize(model::gaussian_real_sensing(12, 20, 0.5, 49));
  auto rng = make_engine(50);
  std::normal_distribution<double> nd(0.0, 1.0);
  RealMatrix w(24, 2);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 2; ++j) w(i, j) = nd(rng);
  const RealMatrix dir = Qb.transpose() * w;  // lies in the row space
  const RealMatrix theta0 = RealMatrix::Zero(40, 2);
  CHECK(prediction_error(Qb, RealMatrix(theta0 + dir), theta0, 12, 2) ==
        doctest::Approx(dir.squaredNorm() / (2.0 * 12 * 2)).epsilon(1e-10));
}

TEST_CASE("empirical_error equals the noise energy at the ground truth") {
  const double sigma2 = 0.05;
  const auto [gt, obs] = make_instance(40, 2, 30, 8, sigma2, 51);
  const double rhat = empirical_error(obs.Q, gt.theta0, obs.Y, 30, 2);
  // |N|_F^2/(2LM) concentrates around sigma2/2 per real component
  CHECK(rhat == doctest::Approx(sigma2 / 2.0).epsilon(0.25));
}

TEST_CASE("errors are invariant under the complex-real round trip") {
  const auto [gt, obs] = make_instance(25, 3, 15, 5, 0.01, 52);
  auto rng = make_engine(53);
  std::normal_distribution<double> nd(0.0, 0.1);
  ComplexMatrix theta_hat = gt.theta0;
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 3; ++j) theta_hat(i, j) += std::complex<double>(nd(rng), nd(rng));

  const RealMatrix Qt = model::complex_to_real_operator(obs.Q);
  const RealMatrix tht = model::complex_to_real_stack(theta_hat);
  const RealMatrix th0 = model::complex_to_real_stack(gt.theta0);
  const RealMatrix Yt = model::complex_to_real_stack(obs.Y);

  const double r_c = prediction_error(obs.Q, theta_hat, gt.theta0, 15, 3);
  const double r_r = prediction_error(Qt, tht, th0, 15, 3);
  CHECK(r_c == doctest::Approx(r_r).epsilon(1e-12));

  const double e_c = empirical_error(obs.Q, theta_hat, obs.Y, 15, 3);
  const double e_r = empirical_error(Qt, tht, Yt, 15, 3);
  CHECK(e_c == doctest::Approx(e_r).epsilon(1e-12));
}

TEST_CASE("end-to-end: solved noiseless instance detects all devices") {
  const auto [gt, obs] = make_instance(20, 2, 16, 2, 0.0, 54);
  const RealMatrix Qt = model::complex_to_real_operator(obs.Q);
  const RealMatrix Yt = model::complex_to_real_stack(obs.Y);
  const RealMatrix th0 = model::complex_to_real_stack(gt.theta0);
  const auto est = solvers::solve_pb_accelerated(Qt, Yt, solvers::group_l1_norm(th0), 1e-12, 100000);
  REQUIRE(est.converged);
  const ComplexMatrix theta_hat = model::real_to_complex_stack(est.theta_hat);
  double max_row = 0.0;
  for (int i = 0; i < 20; ++i) max_row = std::max(max_row, theta_hat.row(i).norm());
  const auto res = detect_activity(theta_hat, 1e-3 * max_row, gt.activity);
  CHECK(res.missed == 0);
  CHECK(res.false_alarm == 0);
}

#include "jade/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "jade/rng.hpp"

namespace jade::model {

namespace {

// Fill row-major with complex Gaussians of per-entry variance `var`
// (each real/imaginary part has variance var/2).
void fill_complex_gaussian(ComplexMatrix& A, double var, std::mt19937_64& rng) {
  if (var == 0.0) {
    A.setZero();
    return;
  }
  std::normal_distribution<double> nd(0.0, std::sqrt(var / 2.0));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double re = nd(rng);
      const double im = nd(rng);
      A(i, j) = std::complex<double>(re, im);
    }
}

std::vector<int> draw_support(int N, int S, std::mt19937_64& rng) {
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates: the first S entries are a uniform sample
  for (int k = 0; k < S; ++k) {
    std::uniform_int_distribution<int> pick(k, N - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  std::vector<int> support(idx.begin(), idx.begin() + S);
  std::sort(support.begin(), support.end());
  return support;
}

}  // namespace

std::pair<GroundTruth, Observation> generate_system(const SystemConfig& config,
                                                    std::uint64_t trial_seed) {
  config.validate();
  auto rng = make_engine(derive_seed(config.master_seed, trial_seed));

  Observation obs;
  obs.Q = ComplexMatrix(config.L, config.N);
  fill_complex_gaussian(obs.Q, 1.0, rng);

  GroundTruth gt;
  gt.support = draw_support(config.N, config.S, rng);
  gt.activity.assign(config.N, 0);
  for (int i : gt.support) gt.activity[i] = 1;

  gt.theta0 = ComplexMatrix::Zero(config.N, config.M);
  {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    for (int i : gt.support)
      for (int j = 0; j < config.M; ++j)
        gt.theta0(i, j) = std::complex<double>(nd(rng), nd(rng));
  }

  obs.noise_sigma2 = config.sigma2;
  obs.Y = obs.Q * gt.theta0;
  if (config.sigma2 > 0.0) {
    ComplexMatrix noise(config.L, config.M);
    fill_complex_gaussian(noise, config.sigma2, rng);
    obs.Y += noise;
  }
  return {std::move(gt), std::move(obs)};
}

RealMatrix complex_to_real_operator(const ComplexMatrix& Q) {
  const Eigen::Index L = Q.rows(), N = Q.cols();
  RealMatrix Qt(2 * L, 2 * N);
  Qt.topLeftCorner(L, N) = Q.real();
  Qt.topRightCorner(L, N) = -Q.imag();
  Qt.bottomLeftCorner(L, N) = Q.imag();
  Qt.bottomRightCorner(L, N) = Q.real();
  return Qt;
}

RealMatrix complex_to_real_stack(const ComplexMatrix& X) {
  const Eigen::Index N = X.rows(), M = X.cols();
  RealMatrix Xt(2 * N, M);
  Xt.topRows(N) = X.real();
  Xt.bottomRows(N) = X.imag();
  return Xt;
}

ComplexMatrix real_to_complex_stack(const RealMatrix& Xt) {
  if (Xt.rows() % 2 != 0) throw std::invalid_argument("real_to_complex_stack: odd row count");
  const Eigen::Index N = Xt.rows() / 2, M = Xt.cols();
  ComplexMatrix X(N, M);
  X.real() = Xt.topRows(N);
  X.imag() = Xt.bottomRows(N);
  return X;
}

RealMatrix gaussian_real_sensing(int L, int N, double variance_per_entry, std::uint64_t seed) {
  if (L < 1 || N < 1) throw std::invalid_argument("gaussian_real_sensing: dimensions must be >= 1");
  if (variance_per_entry < 0.0) throw std::invalid_argument("gaussian_real_sensing: negative variance");
  RealMatrix Qb(2 * L, 2 * N);
  if (variance_per_entry == 0.0) {
    Qb.setZero();
    return Qb;
  }
  auto rng = make_engine(derive_seed(seed));
  std::normal_distribution<double> nd(0.0, std::sqrt(variance_per_entry));
  for (Eigen::Index i = 0; i < Qb.rows(); ++i)
    for (Eigen::Index j = 0; j < Qb.cols(); ++j) Qb(i, j) = nd(rng);
  return Qb;
}

RealMatrix row_orthonormalize(const RealMatrix& Qb) {
  const Eigen::Index rows = Qb.rows(), cols = Qb.cols();
  if (rows > cols) throw std::invalid_argument("row_orthonormalize: needs rows <= cols");
  // Modified Gram-Schmidt on rows with one re-orthogonalization pass.
  RealMatrix R = Qb;
  double leading = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < i; ++j)
        R.row(i) -= R.row(i).dot(R.row(j)) * R.row(j);
    const double norm = R.row(i).norm();
    leading = std::max(leading, norm);
    if (norm <= 1e-12 * leading)
      throw std::runtime_error("row_orthonormalize: rank-deficient input");
    R.row(i) /= norm;
  }
  return R;
}

}  // namespace jade::model

#include "jade/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "jade/rng.hpp"

namespace jade::solvers {

namespace {

void shrink_inplace(RealMatrix& Z, double t) {
  if (t <= 0.0) return;
  const double norm = Z.norm();
  if (norm <= t)
    Z.setZero();
  else
    Z *= (1.0 - t / norm);
}

void group_soft_threshold_inplace(RealMatrix& X, double t) {
  if (t <= 0.0) return;
  const Eigen::Index N = X.rows() / 2;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double sq = X.row(i).squaredNorm() + X.row(i + N).squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm <= t) {
      X.row(i).setZero();
      X.row(i + N).setZero();
    } else {
      const double scale = 1.0 - t / norm;
      X.row(i) *= scale;
      X.row(i + N) *= scale;
    }
  }
}

void scale_groups(RealMatrix& X, const std::vector<double>& scale) {
  const Eigen::Index N = X.rows() / 2;
  for (Eigen::Index i = 0; i < N; ++i) {
    X.row(i) *= scale[i];
    X.row(i + N) *= scale[i];
  }
}

}  // namespace

double group_l1_norm(const RealMatrix& X) {
  const Eigen::Index N = X.rows() / 2;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < N; ++i)
    sum += std::sqrt(X.row(i).squaredNorm() + X.row(i + N).squaredNorm());
  return sum;
}

double smoothed_regularizer_value(const RealMatrix& X, double mu) {
  const Eigen::Index N = X.rows() / 2;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double sq = X.row(i).squaredNorm() + X.row(i + N).squaredNorm();
    sum += std::sqrt(sq) + 0.5 * mu * sq;
  }
  return sum;
}

RealMatrix shrink(const RealMatrix& Z, double t) {
  if (t < 0.0) throw std::invalid_argument("shrink: t must be >= 0");
  RealMatrix out = Z;
  shrink_inplace(out, t);
  return out;
}

RealMatrix group_soft_threshold(const RealMatrix& X, double t) {
  if (t < 0.0) throw std::invalid_argument("group_soft_threshold: t must be >= 0");
  if (X.rows() % 2 != 0) throw std::invalid_argument("group_soft_threshold: odd row count");
  RealMatrix out = X;
  group_soft_threshold_inplace(out, t);
  return out;
}

double spectral_norm(const RealMatrix& Qt, double tol) {
  if (Qt.size() == 0) return 0.0;
  const Eigen::Index n = Qt.cols();
  auto rng = make_engine(0x5eedf00dULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  const double vn = v.norm();
  if (vn == 0.0) return 0.0;
  v /= vn;

  double lambda = 0.0;
  Eigen::VectorXd w(Qt.rows()), u(n);
  for (int it = 0; it < 50000; ++it) {
    w.noalias() = Qt * v;
    const double next = w.squaredNorm();  // Rayleigh quotient, |v| = 1
    u.noalias() = Qt.transpose() * w;
    const double un = u.norm();
    if (un == 0.0) return 0.0;
    v = u / un;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

RealMatrix theta_from_dual(const RealMatrix& Z, const RealMatrix& Qt, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("theta_from_dual: mu must be > 0");
  RealMatrix W = Qt.transpose() * Z;
  group_soft_threshold_inplace(W, 1.0);
  W *= 1.0 / mu;
  return W;
}

RealMatrix dual_gradient(const RealMatrix& Z, const RealMatrix& Qt, const RealMatrix& Yt,
                         double mu) {
  return Qt * theta_from_dual(Z, Qt, mu) - Yt;
}

double dual_smooth_value(const RealMatrix& Z, const RealMatrix& Qt, const RealMatrix& Yt,
                         double mu) {
  const RealMatrix T = theta_from_dual(Z, Qt, mu);
  const RealMatrix QT = Qt * T;
  const double reg = group_l1_norm(T) + 0.5 * mu * T.squaredNorm();
  return -(reg - (Z.array() * QT.array()).sum()) - (Z.array() * Yt.array()).sum();
}

Estimate solve_smoothed_dual(const RealMatrix& Qt, const RealMatrix& Yt,
                             const SolverOptions& options) {
  if (options.mu <= 0.0) throw std::invalid_argument("solve_smoothed_dual: mu must be > 0");
  if (options.epsilon < 0.0) throw std::invalid_argument("solve_smoothed_dual: epsilon must be >= 0");
  if (options.max_iter < 1) throw std::invalid_argument("solve_smoothed_dual: max_iter must be >= 1");

  const Eigen::Index rows = Yt.rows(), cols = Yt.cols();
  const double y_norm = Yt.norm();
  const double eps = options.epsilon;

  Estimate est;
  est.theta_hat = RealMatrix::Zero(Qt.cols(), cols);

  // Constraint already slack at T = 0: the regularizer minimum is the answer.
  if (y_norm <= eps || (eps == 0.0 && y_norm == 0.0)) {
    est.converged = true;
    est.final_gap = 0.0;
    est.iterations = 0;
    return est;
  }

  const double q_norm = spectral_norm(Qt, options.power_iter_tol);
  const double lips = q_norm * q_norm / options.mu;
  const auto start = std::chrono::steady_clock::now();

  RealMatrix Z = RealMatrix::Zero(rows, cols);
  RealMatrix Zbar = Z;
  RealMatrix B(rows, cols), W(Qt.cols(), cols), Theta(Qt.cols(), cols), Resid(rows, cols);
  double t = 1.0;

  for (int k = 0; k < options.max_iter; ++k) {
    B.noalias() = (1.0 - t) * Z + t * Zbar;
    W.noalias() = Qt.transpose() * B;
    group_soft_threshold_inplace(W, 1.0);
    Theta = W / options.mu;
    Resid.noalias() = Qt * Theta;
    Resid -= Yt;
    const double res_norm = Resid.norm();
    const double gap = (eps > 0.0) ? std::abs(res_norm - eps) / eps : res_norm / y_norm;

    if (options.record_trace) {
      const double reg = group_l1_norm(Theta) + 0.5 * options.mu * Theta.squaredNorm();
      const double d_smooth = -(reg - ((B.array() * (Resid + Yt).array()).sum())) -
                              (B.array() * Yt.array()).sum();
      const auto now = std::chrono::steady_clock::now();
      est.trace.push_back(
          {k, gap, d_smooth + eps * B.norm(),
           std::chrono::duration_cast<std::chrono::nanoseconds>(now - start).count()});
    }

    if (gap <= options.gamma_stop) {
      est.theta_hat = Theta;
      est.dual_point = B;
      est.iterations = k + 1;
      est.final_gap = gap;
      est.converged = true;
      return est;
    }

    Zbar -= Resid / (lips * t);
    shrink_inplace(Zbar, eps / (lips * t));
    Z = B - Resid / lips;
    shrink_inplace(Z, options.z_step_variant == ZStepVariant::lipschitz_scaled ? eps / lips
                                                                               : eps / t);
    t = 2.0 / (1.0 + std::sqrt(1.0 + 4.0 / (t * t)));

    est.theta_hat = Theta;
    est.dual_point = B;
    est.iterations = k + 1;
    est.final_gap = gap;
  }
  est.converged = false;
  return est;
}

RealMatrix project_group_l1_ball(const RealMatrix& X, double r) {
  if (r < 0.0) throw std::invalid_argument("project_group_l1_ball: r must be >= 0");
  if (X.rows() % 2 != 0) throw std::invalid_argument("project_group_l1_ball: odd row count");
  const Eigen::Index N = X.rows() / 2;
  std::vector<double> norms(N);
  double total = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    norms[i] = std::sqrt(X.row(i).squaredNorm() + X.row(i + N).squaredNorm());
    total += norms[i];
  }
  if (total <= r) return X;

  // Duchi-style threshold on the group-norm vector.
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double prefix = 0.0, lambda = sorted[0];
  bool found = false;
  for (Eigen::Index k = 0; k < N; ++k) {
    prefix += sorted[k];
    const double cand = (prefix - r) / static_cast<double>(k + 1);
    if (sorted[k] - cand > 0.0) {
      lambda = cand;
      found = true;
    } else {
      break;
    }
  }
  RealMatrix out = X;
  std::vector<double> scale(N);
  for (Eigen::Index i = 0; i < N; ++i)
    scale[i] = (found && norms[i] > lambda) ? 1.0 - lambda / norms[i] : 0.0;
  scale_groups(out, scale);
  return out;
}

RealMatrix project_smoothed_group_ball(const RealMatrix& X, double r, double mu) {
  if (mu == 0.0) return project_group_l1_ball(X, r);
  if (r < 0.0 || mu < 0.0)
    throw std::invalid_argument("project_smoothed_group_ball: r and mu must be >= 0");
  const Eigen::Index N = X.rows() / 2;
  std::vector<double> norms(N);
  double value = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double sq = X.row(i).squaredNorm() + X.row(i + N).squaredNorm();
    norms[i] = std::sqrt(sq);
    value += norms[i] + 0.5 * mu * sq;
  }
  if (value <= r) return X;

  // Bisection on the multiplier: group norms become (n - l) / (1 + l mu),
  // clipped at zero; the ball value is strictly decreasing in l.
  auto ball_value = [&](double l) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double th = std::max((norms[i] - l) / (1.0 + l * mu), 0.0);
      v += th + 0.5 * mu * th * th;
    }
    return v;
  };
  double lo = 0.0, hi = *std::max_element(norms.begin(), norms.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ball_value(mid) > r)
      lo = mid;
    else
      hi = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  RealMatrix out = X;
  std::vector<double> scale(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double th = std::max((norms[i] - lambda) / (1.0 + lambda * mu), 0.0);
    scale[i] = (norms[i] > 0.0) ? th / norms[i] : 0.0;
  }
  scale_groups(out, scale);
  return out;
}

Estimate solve_pb_accelerated(const RealMatrix& Qb, const RealMatrix& Yt, double r, double tol,
                              int max_iter, double mu) {
  if (r < 0.0) throw std::invalid_argument("solve_pb_accelerated: r must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("solve_pb_accelerated: max_iter must be >= 1");

  Estimate est;
  const Eigen::Index n = Qb.cols(), m = Yt.cols();
  est.theta_hat = RealMatrix::Zero(n, m);
  const double q_norm = spectral_norm(Qb, 1e-9);
  if (q_norm == 0.0) {
    est.converged = true;
    return est;
  }
  const double step = 1.0 / (q_norm * q_norm);

  RealMatrix X = RealMatrix::Zero(n, m), Xprev = X, Y = X;
  RealMatrix Resid(Qb.rows(), m), Grad(n, m), Next(n, m);
  double t = 1.0;
  for (int k = 0; k < max_iter; ++k) {
    Resid.noalias() = Qb * Y;
    Resid -= Yt;
    Grad.noalias() = Qb.transpose() * Resid;
    Next = Y - step * Grad;
    Next = (mu == 0.0) ? project_group_l1_ball(Next, r) : project_smoothed_group_ball(Next, r, mu);

    // gradient-scheme restart: kill momentum when it points uphill
    const double sign = ((Y - Next).array() * (Next - X).array()).sum();
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (sign > 0.0) {
      t = 1.0;
      t_next = 1.0;
    }
    const double beta = (t - 1.0) / t_next;
    Y = Next + beta * (Next - X);
    t = t_next;

    const double change = (Next - X).norm() / std::max(1.0, X.norm());
    Xprev.swap(X);
    X = Next;
    est.iterations = k + 1;
    est.final_gap = change;
    if (change <= tol) {
      est.theta_hat = X;
      est.converged = true;
      return est;
    }
  }
  est.theta_hat = X;
  est.converged = false;
  return est;
}

Estimate solve_pb_projected_gradient(const RealMatrix& Qb, const RealMatrix& Yt, double r,
                                     double tol, int max_iter, double mu) {
  if (r < 0.0) throw std::invalid_argument("solve_pb_projected_gradient: r must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("solve_pb_projected_gradient: max_iter must be >= 1");

  Estimate est;
  const Eigen::Index n = Qb.cols(), m = Yt.cols();
  est.theta_hat = RealMatrix::Zero(n, m);
  const double q_norm = spectral_norm(Qb, 1e-9);
  if (q_norm == 0.0) {
    est.converged = true;
    return est;
  }
  const double step = 1.0 / (q_norm * q_norm);

  RealMatrix Theta = RealMatrix::Zero(n, m), Resid(Qb.rows(), m), Grad(n, m), Next(n, m);
  for (int k = 0; k < max_iter; ++k) {
    Resid.noalias() = Qb * Theta;
    Resid -= Yt;
    Grad.noalias() = Qb.transpose() * Resid;
    Next = Theta - step * Grad;
    Next = (mu == 0.0) ? project_group_l1_ball(Next, r) : project_smoothed_group_ball(Next, r, mu);
    const double change = (Next - Theta).norm() / std::max(1.0, Theta.norm());
    Theta.swap(Next);
    est.iterations = k + 1;
    est.final_gap = change;
    if (change <= tol) {
      est.theta_hat = Theta;
      est.converged = true;
      return est;
    }
  }
  est.theta_hat = Theta;
  est.converged = false;
  return est;
}

}  // namespace jade::solvers

#include "jade/detect.hpp"

#include <stdexcept>

namespace jade::detect {

DetectionResult detect_activity(const ComplexMatrix& theta_hat, double gamma_act,
                                const std::vector<std::uint8_t>& truth_activity) {
  const int N = static_cast<int>(theta_hat.rows());
  if (static_cast<int>(truth_activity.size()) != N)
    throw std::invalid_argument("detect_activity: activity length mismatch");

  DetectionResult res;
  res.activity_hat.assign(N, 0);
  for (int i = 0; i < N; ++i) {
    if (theta_hat.row(i).norm() >= gamma_act) {
      res.activity_hat[i] = 1;
      res.detected.push_back(i);
    }
    if (truth_activity[i] && !res.activity_hat[i]) ++res.missed;
    if (!truth_activity[i] && res.activity_hat[i]) ++res.false_alarm;
  }
  res.H_hat = ComplexMatrix(res.detected.size(), theta_hat.cols());
  for (std::size_t k = 0; k < res.detected.size(); ++k)
    res.H_hat.row(k) = theta_hat.row(res.detected[k]);
  return res;
}

bool recovery_success(const ComplexMatrix& theta_hat, const ComplexMatrix& theta0, double tol,
                      bool relative) {
  const double err = (theta_hat - theta0).norm();
  return relative ? err <= tol * theta0.norm() : err <= tol;
}

double prediction_error(const RealMatrix& Qb, const RealMatrix& theta_hat,
                        const RealMatrix& theta0, int L, int M) {
  return (Qb * (theta_hat - theta0)).squaredNorm() / (2.0 * L * M);
}

double prediction_error(const ComplexMatrix& Q, const ComplexMatrix& theta_hat,
                        const ComplexMatrix& theta0, int L, int M) {
  return (Q * (theta_hat - theta0)).squaredNorm() / (2.0 * L * M);
}

double empirical_error(const RealMatrix& Qb, const RealMatrix& theta_hat, const RealMatrix& Yt,
                       int L, int M) {
  return (Qb * theta_hat - Yt).squaredNorm() / (2.0 * L * M);
}

double empirical_error(const ComplexMatrix& Q, const ComplexMatrix& theta_hat,
                       const ComplexMatrix& Y, int L, int M) {
  return (Q * theta_hat - Y).squaredNorm() / (2.0 * L * M);
}

}  // namespace jade::detect

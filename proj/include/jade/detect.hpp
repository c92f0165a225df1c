// Activity detection, channel extraction, and error metrics.
#pragma once

#include <cstdint>
#include <vector>

#include "jade/types.hpp"

namespace jade::detect {

struct DetectionResult {
  std::vector<std::uint8_t> activity_hat;  // length N
  std::vector<int> detected;               // indices with activity_hat = 1
  ComplexMatrix H_hat;                     // one row per detected device
  int missed = 0;
  int false_alarm = 0;
};

// Threshold row norms of theta_hat at gamma_act; detected rows are copied as
// channel estimates. Error counts are against truth_activity.
DetectionResult detect_activity(const ComplexMatrix& theta_hat, double gamma_act,
                                const std::vector<std::uint8_t>& truth_activity);

// |theta_hat - theta0|_F <= tol (or tol * |theta0|_F when relative).
bool recovery_success(const ComplexMatrix& theta_hat, const ComplexMatrix& theta0, double tol,
                      bool relative = false);

// Average squared prediction error |Qb (theta_hat - theta0)|_F^2 / (2LM),
// in the real-embedded domain or directly on the complex model.
double prediction_error(const RealMatrix& Qb, const RealMatrix& theta_hat,
                        const RealMatrix& theta0, int L, int M);
double prediction_error(const ComplexMatrix& Q, const ComplexMatrix& theta_hat,
                        const ComplexMatrix& theta0, int L, int M);

// Empirical error |Qb theta_hat - Yt|_F^2 / (2LM).
double empirical_error(const RealMatrix& Qb, const RealMatrix& theta_hat, const RealMatrix& Yt,
                       int L, int M);
double empirical_error(const ComplexMatrix& Q, const ComplexMatrix& theta_hat,
                       const ComplexMatrix& Y, int L, int M);

}  // namespace jade::detect

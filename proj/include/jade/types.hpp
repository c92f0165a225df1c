// Core value types shared across the library.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace jade {

using ComplexMatrix = Eigen::MatrixXcd;   // dense complex, column-major
using RealMatrix = Eigen::MatrixXd;       // dense real, column-major

// All scalar problem parameters for one synthetic scenario.
//
// N devices, M base-station antennas, L signature symbols, S active devices.
// sigma2 is the complex per-entry noise variance (each real/imaginary part
// carries sigma2/2). gamma_stop is the solver stopping tolerance; gamma_act
// the activity detection threshold (the two are deliberately separate knobs).
struct SystemConfig {
  int N = 0;
  int M = 0;
  int L = 0;
  int S = 0;
  double sigma2 = 0.0;
  double mu = 0.0;
  std::uint64_t master_seed = 0;
  double gamma_stop = 1e-3;
  double gamma_act = 1e-6;

  void validate() const {
    if (N < 1 || M < 1 || L < 1) throw std::invalid_argument("SystemConfig: dimensions must be >= 1");
    if (S < 0 || S > N) throw std::invalid_argument("SystemConfig: need 0 <= S <= N");
    if (sigma2 < 0.0) throw std::invalid_argument("SystemConfig: sigma2 must be >= 0");
    if (mu < 0.0) throw std::invalid_argument("SystemConfig: mu must be >= 0");
  }
};

// Ground-truth effective channel matrix with its support.
// Row i of theta0 is nonzero iff i is in `support`; `activity` is the 0/1
// indicator vector of length N.
struct GroundTruth {
  ComplexMatrix theta0;          // N x M
  std::vector<int> support;      // sorted active indices, size S
  std::vector<std::uint8_t> activity;  // length N
};

// One received block together with the signature matrix that produced it.
struct Observation {
  ComplexMatrix Y;  // L x M
  ComplexMatrix Q;  // L x N
  double noise_sigma2 = 0.0;
};

// Statistical-dimension bound of a descent cone.
// `delta` is in ambient-dimension units (0..2NM); `delta_seq` = delta/(2M)
// is the same bound expressed as a signature length.
struct StatDimResult {
  double delta = 0.0;
  double tau_star = 0.0;
  double delta_seq = 0.0;
};

// Integer signature lengths bracketing the success/failure transition at
// tolerance eta, from the approximate kinematic bounds.
struct TransitionPrediction {
  int L_success = 0;  // smallest L satisfying the success bound
  int L_fail = 0;     // largest L satisfying the failure bound (>= 0)
  double eta = 0.0;
  double a_eta = 0.0;
};

// Predicted noisy-regime error ratios. The two ratios always sum to one.
struct NoisyPrediction {
  double worst_case_ratio = 0.0;       // max over sigma of E[R]/sigma^2
  double empirical_limit_ratio = 0.0;  // lim_{sigma->0} E[R_hat]/sigma^2
  bool at_boundary = false;            // L == delta_seq exactly
};

// Monte Carlo estimate of a statistical dimension with its standard error.
struct McEstimate {
  double delta = 0.0;
  double std_error = 0.0;
  double tau_at_min = 0.0;
};

}  // namespace jade

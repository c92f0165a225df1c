// Synthetic instance generation and the complex <-> real embedding.
#pragma once

#include <cstdint>
#include <utility>

#include "jade/types.hpp"

namespace jade::model {

// Draw one synthetic instance: signatures Q with i.i.d. unit-variance complex
// Gaussian entries, a uniformly random support of size S, active channel rows
// ~ CN(0, I), noise ~ CN(0, sigma2), and Y = Q * Theta0 + N.
// Deterministic given (config.master_seed, trial_seed).
std::pair<GroundTruth, Observation> generate_system(const SystemConfig& config,
                                                    std::uint64_t trial_seed);

// Real-embedded operator of a complex matrix:
//   [[Re Q, -Im Q], [Im Q, Re Q]]  (L x N -> 2L x 2N).
RealMatrix complex_to_real_operator(const ComplexMatrix& Q);

// Stack [Re X; Im X]  (N x M -> 2N x M).
RealMatrix complex_to_real_stack(const ComplexMatrix& X);

// Exact inverse of complex_to_real_stack (2N x M -> N x M).
ComplexMatrix real_to_complex_stack(const RealMatrix& Xt);

// 2L x 2N matrix of i.i.d. real Gaussians with the given per-entry variance.
RealMatrix gaussian_real_sensing(int L, int N, double variance_per_entry, std::uint64_t seed);

// Orthonormalize the rows of a 2L x 2N matrix (2L <= 2N) while preserving the
// row space. Throws std::runtime_error if a pivot norm falls below
// 1e-12 times the leading pivot norm.
RealMatrix row_orthonormalize(const RealMatrix& Qb);

}  // namespace jade::model

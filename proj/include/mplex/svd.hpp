#pragma once

#include "mplex/common.hpp"

namespace mplex {

struct SvdResult {
  Matrix U;       // rows x rank, orthonormal columns
  Vector sigma;   // nonincreasing, nonnegative
  Matrix V;       // cols x rank, orthonormal columns
  int iterations = 0;
};

// Deterministic sign convention: in each column of U the entry of largest
// magnitude (lowest row index on ties) is made nonnegative; V follows.
void apply_sign_convention(Matrix& U, Matrix& V);

// Matrices at or below this entry count take the dense bidiagonalization
// path; larger ones the Lanczos path.
inline constexpr long kDenseEntryLimit = 20'000'000;

SvdResult truncated_svd_dense(const Matrix& A, int rank);

struct LanczosOptions {
  int max_iterations = 0;   // 0: min(rows, cols)
  double tolerance = 1e-12; // relative residual target
  int extra_vectors = 10;   // Krylov headroom beyond the requested rank
};

// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
// Deterministic (fixed start vector); intended for tall low-rank problems
// with a clear spectral gap.
SvdResult truncated_svd_lanczos(const Matrix& A, int rank,
                                const LanczosOptions& options = {});

// Path selection by kDenseEntryLimit; both paths satisfy identical
// orthogonality/residual contracts.
SvdResult truncated_svd(const Matrix& A, int rank);

struct SpectrumReport {
  Vector leading_singular_values;  // first k, nonincreasing
  std::vector<double> gap_ratios;  // sigma_k / sigma_{k+1}
  int chosen_d = 1;
  bool flat_warning = false;
};

// Scree rule: chosen_d = argmax_k sigma_k/sigma_{k+1} over 1 <= k < k_max.
// A (numerically) constant spectrum yields chosen_d = k_max with a warning.
SpectrumReport select_dimension(const Matrix& A, int k_max);

}  // namespace mplex

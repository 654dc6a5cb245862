#pragma once

// Independent reference implementations used only to check the library.
// Nothing here may call into the code paths under test.

#include <cstdint>
#include <vector>

#include "mplex/common.hpp"
#include "mplex/rng.hpp"

namespace oracle {

using mplex::Matrix;
using mplex::Vector;

struct SvdTriplet {
  Matrix U;
  Vector sigma;
  Matrix V;
};

// One-sided Jacobi SVD, full rank, built from scratch (rotations on column
// pairs until all off-diagonal Gram entries vanish).
SvdTriplet jacobi_svd(const Matrix& A);

// Direct per-row Euclidean norm maximum.
double max_row_norm_loop(const Matrix& A);

// Naive triple-loop versions of the CLT covariance sums.
Matrix covariance_C_loop(const Matrix& x_tilde, const Matrix& Y, int n_nodes, int i,
                         int m);
Matrix covariance_D_loop(const Matrix& x_tilde, const Matrix& Y, int n_nodes, int i,
                         int l);

// Pairwise Frobenius distances via explicit loops over per-node series.
Matrix trajectory_distances_loop(const std::vector<Matrix>& series);

// ARI from explicit pair counting over all item pairs.
double ari_pair_loop(const std::vector<int>& a, const std::vector<int>& b);

// Deterministic N(0,1) via Box-Muller on the library RNG (test-only).
double standard_normal(mplex::Rng& rng);

// Random orthogonal d x d (QR of a Gaussian matrix).
Matrix random_orthogonal(int d, std::uint64_t seed);

Matrix random_matrix(int rows, int cols, std::uint64_t seed);

}  // namespace oracle

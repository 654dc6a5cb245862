#pragma once

#include "mplex/binning.hpp"
#include "mplex/svd.hpp"

namespace mplex {

// DUASE factor pair: left = U Sigma^{1/2} (per-bin positions), right =
// V Sigma^{1/2} (per-layer positions).
struct Embedding {
  Matrix left;             // (N*M) x d
  Matrix right;            // (N*L) x d
  Vector singular_values;  // length d, nonincreasing
  int n_nodes = 0;
  int n_bins = 0;
  int n_layers = 0;
  int dim = 0;

  Eigen::Block<const Matrix> left_block(int m) const {
    return left.block(m * n_nodes, 0, n_nodes, dim);
  }
  Eigen::Block<const Matrix> right_block(int l) const {
    return right.block(l * n_nodes, 0, n_nodes, dim);
  }
  // Recover the orthonormal SVD factors.
  Matrix factor_u() const {
    return left * singular_values.cwiseSqrt().cwiseInverse().asDiagonal();
  }
  Matrix factor_v() const {
    return right * singular_values.cwiseSqrt().cwiseInverse().asDiagonal();
  }
};

Embedding duase(const UnfoldedIntensity& unfolded, int rank);

// Core entry point when the matrix does not come with unfolding metadata.
Embedding duase_matrix(const Matrix& A, int n_nodes, int n_bins, int n_layers, int rank);

// Assemble the factor pair from an already-computed decomposition whose rank
// is at least `rank` (extra triplets are dropped).
Embedding embedding_from_svd(const SvdResult& svd, int n_nodes, int n_bins,
                             int n_layers, int rank);

}  // namespace mplex

#include "mplex/embed.hpp"

namespace mplex {

Embedding embedding_from_svd(const SvdResult& svd, int n_nodes, int n_bins,
                             int n_layers, int rank) {
  if (rank < 1 || rank > svd.sigma.size())
    throw argument_error("embedding_from_svd: rank exceeds the decomposition");
  Embedding out;
  const Vector scale = svd.sigma.head(rank).cwiseSqrt();
  out.left.noalias() = svd.U.leftCols(rank) * scale.asDiagonal();
  out.right.noalias() = svd.V.leftCols(rank) * scale.asDiagonal();
  out.singular_values = svd.sigma.head(rank);
  out.n_nodes = n_nodes;
  out.n_bins = n_bins;
  out.n_layers = n_layers;
  out.dim = rank;
  return out;
}

Embedding duase_matrix(const Matrix& A, int n_nodes, int n_bins, int n_layers, int rank) {
  if (A.rows() != Eigen::Index(n_nodes) * n_bins || A.cols() != Eigen::Index(n_nodes) * n_layers)
    throw argument_error("duase: matrix shape does not match (N*M) x (N*L)");
  return embedding_from_svd(truncated_svd(A, rank), n_nodes, n_bins, n_layers, rank);
}

Embedding duase(const UnfoldedIntensity& unfolded, int rank) {
  return duase_matrix(unfolded.data, unfolded.n_nodes, unfolded.n_bins,
                      unfolded.n_layers, rank);
}

}  // namespace mplex

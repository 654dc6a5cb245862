#pragma once

#include "mplex/embed.hpp"

namespace mplex {

// Per-node smoothed, normalized trajectories. Each of the d dimensions of
// the stacked (N*M) x d data is centred and scaled to unit standard
// deviation before smoothing.
struct TrajectoryMatrix {
  Matrix data;   // (N*M) x d, bin-major like the embedding
  int n_nodes = 0;
  int n_bins = 0;
  RowVector center;
  RowVector scale;
  int window = 1;

  // M x d series of node i.
  Matrix node(int i) const {
    Matrix out(n_bins, data.cols());
    for (int m = 0; m < n_bins; ++m) out.row(m) = data.row(Eigen::Index(m) * n_nodes + i);
    return out;
  }
};

// Centre/scale each dimension over all N*M rows, then box-average each node
// series with a symmetric window of odd width w, truncated at the series
// boundaries and renormalized by the actual window size.
TrajectoryMatrix normalize_and_smooth(const Embedding& embedding, int window);

// D_ij = ||Xbreve_i - Xbreve_j||_F
Matrix trajectory_distances(const TrajectoryMatrix& trajectories);

struct MergeStep {
  int left = 0;    // cluster ids; leaves are 0..N-1, merges N+step
  int right = 0;
  int into = 0;
  double height = 0.0;
};

struct ClusterResult {
  std::vector<int> labels;       // k-cut labels, 0-based, ordered by smallest member
  std::vector<MergeStep> merges; // full tree, heights nondecreasing for UPGMA-metric data
};

// Bottom-up average linkage (UPGMA). Ties on the candidate distance break
// toward the pair whose (smallest-member, smallest-member) ids are lowest.
ClusterResult agglomerative_cluster(const Matrix& distances, int k);

// Adjusted Rand index between two labelings of the same items.
double compare_partitions(const std::vector<int>& a, const std::vector<int>& b);

// Row-wise Euclidean distance matrix; convenience for clustering static
// embeddings such as one layer's right factor.
Matrix row_distances(const Matrix& points);

}  // namespace mplex

#pragma once

#include "mplex/simulate.hpp"

namespace mplex {

enum class IntensityKind { empirical, exact_mean };

// The doubly unfolded (N*M) x (N*L) matrix; block (m,l) holds the per-edge
// estimates for bin B_m = ((m-1)/M, m/M] on layer l. Empirical entries are
// M times an event count.
struct UnfoldedIntensity {
  Matrix data;
  int n_nodes = 0;
  int n_bins = 0;
  int n_layers = 0;
  IntensityKind kind = IntensityKind::empirical;

  Eigen::Block<Matrix> block(int m, int l) {
    return data.block(m * n_nodes, l * n_nodes, n_nodes, n_nodes);
  }
  Eigen::Block<const Matrix> block(int m, int l) const {
    return data.block(m * n_nodes, l * n_nodes, n_nodes, n_nodes);
  }
};

// Bin-averaged positions: block m equals M * int_{B_m} X(t) dt.
struct BinnedPositions {
  Matrix data;  // (N*M) x d
  int n_nodes = 0;
  int n_bins = 0;

  Eigen::Block<Matrix> block(int m) {
    return data.block(m * n_nodes, 0, n_nodes, data.cols());
  }
  Eigen::Block<const Matrix> block(int m) const {
    return data.block(m * n_nodes, 0, n_nodes, data.cols());
  }
};

// 1-based bin index under the left-open right-closed convention, robust to
// rounding at bin boundaries. Requires 0 < t <= 1.
int bin_index(double t, int n_bins);

// Histogram estimator: entry = M * count. Event times must lie in (0,1];
// offenders are reported by record number.
UnfoldedIntensity bin_events(const EventStream& events, int n_bins);

// Exact mean and bin-averaged positions of the generating model. The
// returned pair satisfies mean.data == positions.data * Y^T by construction.
std::pair<UnfoldedIntensity, BinnedPositions> exact_binned_mean(const LatentModel& model,
                                                                int n_bins);

// Thinning simulation streamed directly into bin counts, skipping event
// storage. Equals bin_events(sample_events(model, seed), n_bins) exactly.
UnfoldedIntensity sample_binned(const LatentModel& model, std::uint64_t seed,
                                int n_bins, int n_threads = 1);

struct TimeNormalization {
  double t_min = 0.0;
  double t_max = 1.0;
  bool applied = false;
};

// Affine map of raw timestamps onto (0,1]; the minimum maps to the open
// endpoint via an upward nudge. No-op when times already fit.
TimeNormalization normalize_times(std::vector<double>& times);

}  // namespace mplex

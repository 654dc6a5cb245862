#include "mplex/binning.hpp"

#include <algorithm>
#include <cmath>

#include "mplex/parallel.hpp"

namespace mplex {

int bin_index(double t, int n_bins) {
  // ceil with exact boundary fix-up: bin m holds ((m-1)/M, m/M].
  int m = int(std::ceil(t * n_bins));
  while (m > 1 && t <= double(m - 1) / n_bins) --m;
  while (m < n_bins && t > double(m) / n_bins) ++m;
  return m;
}

UnfoldedIntensity bin_events(const EventStream& events, int n_bins) {
  if (n_bins < 1) throw argument_error("bin_events: need n_bins >= 1");
  const int n = events.n_nodes;
  const int L = events.n_layers;
  if (n < 1 || L < 1) throw argument_error("bin_events: empty stream dimensions");

  UnfoldedIntensity out;
  out.n_nodes = n;
  out.n_bins = n_bins;
  out.n_layers = L;
  out.kind = IntensityKind::empirical;
  out.data = Matrix::Zero(Eigen::Index(n) * n_bins, Eigen::Index(n) * L);

  for (std::size_t k = 0; k < events.events.size(); ++k) {
    const Event& e = events.events[k];
    if (!(e.time > 0.0 && e.time <= 1.0))
      throw data_error("bin_events: record " + std::to_string(k) + " has time " +
                       std::to_string(e.time) + " outside (0,1]");
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n || e.layer < 0 || e.layer >= L)
      throw data_error("bin_events: record " + std::to_string(k) + " has index out of range");
    const int m = bin_index(e.time, n_bins);
    out.data(Eigen::Index(m - 1) * n + e.src, Eigen::Index(e.layer) * n + e.dst) += n_bins;
  }
  return out;
}

std::pair<UnfoldedIntensity, BinnedPositions> exact_binned_mean(const LatentModel& model,
                                                                int n_bins) {
  if (n_bins < 1) throw argument_error("exact_binned_mean: need n_bins >= 1");
  const int n = model.n_nodes();
  const int d = model.dim();

  BinnedPositions pos;
  pos.n_nodes = n;
  pos.n_bins = n_bins;
  pos.data.resize(Eigen::Index(n) * n_bins, d);
  for (int m = 0; m < n_bins; ++m) {
    pos.block(m) = double(n_bins) *
                   model.trajectory().integral(double(m) / n_bins, double(m + 1) / n_bins);
  }

  UnfoldedIntensity mean;
  mean.n_nodes = n;
  mean.n_bins = n_bins;
  mean.n_layers = model.n_layers();
  mean.kind = IntensityKind::exact_mean;
  mean.data.noalias() = pos.data * model.layer_positions().transpose();
  return {std::move(mean), std::move(pos)};
}

UnfoldedIntensity sample_binned(const LatentModel& model, std::uint64_t seed,
                                int n_bins, int n_threads) {
  if (n_bins < 1) throw argument_error("sample_binned: need n_bins >= 1");
  const int n = model.n_nodes();
  const int L = model.n_layers();

  UnfoldedIntensity out;
  out.n_nodes = n;
  out.n_bins = n_bins;
  out.n_layers = L;
  out.kind = IntensityKind::empirical;
  out.data = Matrix::Zero(Eigen::Index(n) * n_bins, Eigen::Index(n) * L);

  // Tasks partitioned by destination column: disjoint writes, no merge step.
  parallel_for(n, n_threads, [&](int j) {
    for (int l = 0; l < L; ++l) {
      const Eigen::Index col = Eigen::Index(l) * n + j;
      for (int i = 0; i < n; ++i)
        sample_edge_events(model, seed, i, j, l, [&](double t) {
          out.data(Eigen::Index(bin_index(t, n_bins) - 1) * n + i, col) += n_bins;
        });
    }
  });
  return out;
}

TimeNormalization normalize_times(std::vector<double>& times) {
  TimeNormalization result;
  if (times.empty()) return result;
  auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  result.t_min = *lo;
  result.t_max = *hi;
  const bool fits = *lo > 0.0 && *hi <= 1.0;
  if (fits) return result;
  if (!(*hi > *lo))
    throw data_error("normalize_times: degenerate time range");
  const double span = *hi - *lo;
  for (double& t : times) {
    t = (t - result.t_min) / span;
    if (t <= 0.0) t = std::nextafter(0.0, 1.0);
    if (t > 1.0) t = 1.0;
  }
  result.applied = true;
  return result;
}

}  // namespace mplex

#include "mplex/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mplex/parallel.hpp"

namespace mplex {

double integrated_intensity(const LatentModel& model, int i, int j, int l,
                            double a, double b) {
  if (i < 0 || i >= model.n_nodes() || j < 0 || j >= model.n_nodes() || l < 0 ||
      l >= model.n_layers())
    throw argument_error("integrated_intensity: index out of range");
  if (!(a >= 0.0 && b <= 1.0)) throw argument_error("integrated_intensity: interval outside [0,1]");
  if (!(a < b)) throw argument_error("integrated_intensity: need a < b");
  return model.trajectory().integral_node(i, a, b).dot(model.layer_position(l, j));
}

void sample_edge_events(const LatentModel& model, std::uint64_t seed, int i, int j,
                        int l, const std::function<void(double)>& on_event) {
  const RowVector y = model.layer_position(l, j);
  const auto& traj = model.trajectory();

  std::vector<double> cuts{0.0};
  for (double c : traj.breakpoints())
    if (c > 0.0 && c < 1.0) cuts.push_back(c);
  cuts.push_back(1.0);

  Rng rng = Rng::edge_stream(seed, std::uint64_t(i), std::uint64_t(j), std::uint64_t(l));
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s];
    const double hi = cuts[s + 1];
    const double bound = traj.sup_inner(i, y, lo, hi);
    if (!(bound > 0.0)) continue;  // lambda <= 0 on the whole segment: no events
    double t = lo;
    for (;;) {
      t += rng.next_exponential(bound);
      if (t > hi) break;
      const double u = rng.next_uniform();
      const double lambda = traj.eval_node(i, t).dot(y);
      if (lambda > bound)
        throw numerical_error(
            "sample_edge_events: thinning bound " + std::to_string(bound) +
            " exceeded by intensity " + std::to_string(lambda) + " at t=" +
            std::to_string(t));
      if (u * bound < lambda) on_event(t);
    }
  }
}

EventStream sample_events(const LatentModel& model, std::uint64_t seed, int n_threads) {
  const int n = model.n_nodes();
  const int L = model.n_layers();

  // One task per destination column so workers never interleave edges; the
  // per-edge substreams make the draw sequence partition-independent anyway.
  std::vector<std::vector<Event>> per_dst(n);
  parallel_for(n, n_threads, [&](int j) {
    auto& out = per_dst[j];
    for (int l = 0; l < L; ++l)
      for (int i = 0; i < n; ++i)
        sample_edge_events(model, seed, i, j, l, [&](double t) {
          out.push_back(Event{i, j, l, t});
        });
  });

  EventStream stream;
  stream.n_nodes = n;
  stream.n_layers = L;
  stream.seed = seed;
  std::size_t total = 0;
  for (const auto& v : per_dst) total += v.size();
  stream.events.reserve(total);
  for (auto& v : per_dst) {
    stream.events.insert(stream.events.end(), v.begin(), v.end());
    v.clear();
    v.shrink_to_fit();
  }
  std::sort(stream.events.begin(), stream.events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.time, a.src, a.dst, a.layer) < std::tie(b.time, b.src, b.dst, b.layer);
  });
  return stream;
}

}  // namespace mplex

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mplex/model.hpp"
#include "mplex/rng.hpp"

namespace mplex {

struct Event {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  std::int32_t layer = 0;
  double time = 0.0;
};

inline bool operator==(const Event& a, const Event& b) {
  return a.src == b.src && a.dst == b.dst && a.layer == b.layer && a.time == b.time;
}

// Quadruple stream on (0,1], sorted by (time, src, dst, layer).
struct EventStream {
  std::vector<Event> events;
  int n_nodes = 0;
  int n_layers = 0;
  std::uint64_t seed = 0;
};

// Compensator int_a^b lambda_{lij}(u) du; closed form for block models,
// exact piecewise-linear for tables, composite Gauss-Legendre otherwise.
double integrated_intensity(const LatentModel& model, int i, int j, int l,
                            double a, double b);

// Thinning against a per-edge (per continuity segment) dominating rate.
// Events for edge (i,j,l) are drawn from an independent substream keyed by
// (seed,i,j,l); the callback sees them in time order within the edge.
// Throws numerical_error if the dominating bound is ever exceeded.
void sample_edge_events(const LatentModel& model, std::uint64_t seed, int i, int j,
                        int l, const std::function<void(double)>& on_event);

// Full stream, merged and sorted. Bit-identical output for a given
// (model, seed) regardless of n_threads.
EventStream sample_events(const LatentModel& model, std::uint64_t seed,
                          int n_threads = 1);

}  // namespace mplex

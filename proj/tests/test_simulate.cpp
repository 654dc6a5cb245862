#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mplex/binning.hpp"
#include "mplex/simulate.hpp"
#include "mplex/stats.hpp"
#include "support/models.hpp"

using namespace mplex;

TEST_CASE("integrated intensity: constant and closed-form cases") {
  // constant rate 2 over (0, 0.5]
  const LatentModel constant = testmodels::constant_model(2, 1.0, 1.0, 1.0);
  CHECK(integrated_intensity(constant, 0, 1, 0, 0.0, 0.5) == doctest::Approx(1.0));

  // group-1 edge against gamma = (0,1): rate 11 + 5 cos(2 pi t + pi), whose
  // cosine integrates to zero over one period
  const LatentModel model = testmodels::three_group_model(10, 1);
  CHECK(integrated_intensity(model, 0, 0, 0, 0.0, 1.0) ==
        doctest::Approx(11.0).epsilon(1e-12));

  CHECK_THROWS_AS(integrated_intensity(model, 0, 0, 0, 0.5, 0.5), argument_error);
  CHECK_THROWS_AS(integrated_intensity(model, 0, 0, 0, 0.7, 0.2), argument_error);
}

TEST_CASE("integrated intensity: linear table trajectory") {
  // lambda(t) = t via x(t) = (t, 0), y = (1, 0): integral over (0,1] is 0.5
  std::vector<double> times{0.0, 1.0};
  Matrix v0(1, 2), v1(1, 2);
  v0 << 0.0, 0.0;
  v1 << 1.0, 0.0;
  auto traj = std::make_shared<TableTrajectory>(times, std::vector<Matrix>{v0, v1});
  Matrix Y(1, 2);
  Y << 1.0, 0.0;
  const LatentModel model(traj, Y, 1);
  CHECK(integrated_intensity(model, 0, 0, 0, 0.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("constant rate 10: replication mean within the 3-sigma band") {
  const LatentModel model = testmodels::constant_model(1, 5.0, 1.0, 1.0);  // rate 10
  const int reps = 1000;
  long total = 0;
  for (int r = 0; r < reps; ++r) {
    long count = 0;
    sample_edge_events(model, 1000 + r, 0, 0, 0, [&](double) { ++count; });
    total += count;
  }
  const double mean = double(total) / reps;
  CHECK(mean > 9.5);
  CHECK(mean < 10.5);
}

TEST_CASE("zero-intensity edge yields no events") {
  auto traj = std::make_shared<BlockTrajectory>(
      std::vector<int>{0, 0}, std::vector<DynamicGroupParams>{{2.0, 2.0, 1.0, 0.0}},
      std::nullopt);
  Matrix Y(2, 2);
  Y << 1.0, 1.0, 0.0, 0.0;
  const LatentModel model(traj, Y, 1);
  const EventStream stream = sample_events(model, 7);
  for (const Event& e : stream.events) CHECK(e.dst != 1);
  CHECK(!stream.events.empty());
}

TEST_CASE("inter-arrival times pass a KS test against the exponential law") {
  // Concatenating independent unit windows of a constant-rate process
  // reproduces one long memoryless stream, so all gaps are iid Exp(5).
  const LatentModel model = testmodels::constant_model(1, 2.5, 1.0, 1.0);  // rate 5
  std::vector<double> gaps;
  double previous = 0.0;
  std::uint64_t seed = 1;
  while (gaps.size() < 10000) {
    const double offset = double(seed - 1);
    sample_edge_events(model, seed, 0, 0, 0, [&](double t) {
      gaps.push_back(offset + t - previous);
      previous = offset + t;
    });
    ++seed;
  }
  std::sort(gaps.begin(), gaps.end());
  const double d = ks_statistic(gaps, [](double x) { return 1.0 - std::exp(-5.0 * x); });
  // critical value at level 0.01: 1.628 / sqrt(n)
  CHECK(d < 1.628 / std::sqrt(double(gaps.size())));
}

TEST_CASE("superposition: disjoint interval counts add per realization") {
  const LatentModel model = testmodels::three_group_model(6, 2);
  const EventStream stream = sample_events(model, 42);
  auto count_in = [&](double a, double b) {
    long c = 0;
    for (const Event& e : stream.events) c += (e.time > a && e.time <= b);
    return c;
  };
  CHECK(count_in(0.0, 0.25) + count_in(0.25, 0.6) + count_in(0.6, 1.0) ==
        count_in(0.0, 1.0));
  CHECK(count_in(0.0, 1.0) == long(stream.events.size()));
}

TEST_CASE("count mean and variance track the compensator") {
  const LatentModel model = testmodels::constant_model(1, 2.0, 1.5, 0.5);  // rate 4
  const double expected = integrated_intensity(model, 0, 0, 0, 0.0, 1.0);
  CHECK(expected == doctest::Approx(4.0));
  const int reps = 400;
  std::vector<double> counts(reps);
  for (int r = 0; r < reps; ++r) {
    long c = 0;
    sample_edge_events(model, 500 + r, 0, 0, 0, [&](double) { ++c; });
    counts[r] = double(c);
  }
  double mean = 0.0, var = 0.0;
  for (double c : counts) mean += c;
  mean /= reps;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= reps - 1;
  const double band = 4.0 / std::sqrt(double(reps));
  CHECK(std::abs(mean - expected) < band * std::sqrt(expected));
  // variance of a Poisson count equals its mean; allow the wider band of
  // the variance estimator
  CHECK(std::abs(var - expected) < 3.0 * band * expected);
}

TEST_CASE("events are sorted, in range, and deterministic across thread counts") {
  const LatentModel model = testmodels::three_group_model(12, 3);
  const EventStream one = sample_events(model, 9, 1);
  const EventStream four = sample_events(model, 9, 4);
  REQUIRE(one.events.size() == four.events.size());
  for (std::size_t k = 0; k < one.events.size(); ++k) CHECK(one.events[k] == four.events[k]);
  for (std::size_t k = 1; k < one.events.size(); ++k)
    CHECK(one.events[k - 1].time <= one.events[k].time);
  for (const Event& e : one.events) {
    CHECK(e.time > 0.0);
    CHECK(e.time <= 1.0);
    CHECK(e.src >= 0);
    CHECK(e.src < 12);
    CHECK(e.layer < 3);
  }
  // repeat run is bit-identical
  const EventStream again = sample_events(model, 9, 2);
  REQUIRE(again.events.size() == one.events.size());
  for (std::size_t k = 0; k < one.events.size(); ++k) CHECK(again.events[k] == one.events[k]);
}

TEST_CASE("discontinuous models sample with per-segment bounds") {
  const LatentModel model = testmodels::stepped_three_group_model(8, 1);
  const EventStream stream = sample_events(model, 3);
  CHECK(!stream.events.empty());
  // empirical counts on the four segments track the segment compensators
  std::array<double, 4> expected{}, observed{};
  const std::array<double, 5> cuts{0.0, 0.25, 0.5, 0.75, 1.0};
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        expected[s] += integrated_intensity(model, i, j, 0, cuts[s], cuts[s + 1]);
  for (const Event& e : stream.events)
    for (int s = 0; s < 4; ++s)
      observed[s] += (e.time > cuts[s] && e.time <= cuts[s + 1]);
  for (int s = 0; s < 4; ++s)
    CHECK(std::abs(observed[s] - expected[s]) < 5.0 * std::sqrt(expected[s]));
}

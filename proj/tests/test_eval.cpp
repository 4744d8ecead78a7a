#include <doctest.h>

#include <cmath>
#include <limits>

#include "dimshape/eval.hpp"
#include "support.hpp"

using namespace dimshape;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Saturates to +1 while the body rises and -1 while it falls.
LinearPolicy pump_hopper() {
  LinearPolicy p = LinearPolicy::zeros(make_env_spec("hopper1d"));
  p.weights(0, 1) = 1e6;
  return p;
}

bool same_rows(const DimensionReport& a, const DimensionReport& b) {
  if (a.rows.size() != b.rows.size()) return false;
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.rollout_seed != y.rollout_seed || x.length != y.length || !same(x.lower, y.lower) ||
        !same(x.upper, y.upper) || !same(x.madogram, y.madogram) ||
        !same(x.variogram, y.variogram) || x.raw_return != y.raw_return)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("aggregate averages per seed, then across seeds") {
  DimensionReport r;
  auto row = [](std::size_t seed, double lower) {
    DimensionRow x;
    x.seed_index = seed;
    x.lower = x.upper = x.madogram = x.variogram = lower;
    x.raw_return = 10.0 * lower;
    return x;
  };
  r.rows = {row(0, 1.0), row(0, 3.0), row(1, 4.0), row(1, kNaN), row(2, kNaN)};
  aggregate(r);
  // Seed means 2 and 4; seed 2 has nothing finite.
  CHECK(r.lower.count == 2);
  CHECK(r.lower.mean == 3.0);
  CHECK(r.lower.std == 1.0);
  CHECK(r.raw_return.mean == 30.0);
  CHECK(r.raw_return.std == 10.0);

  DimensionReport empty;
  empty.rows = {row(0, kNaN)};
  aggregate(empty);
  CHECK(empty.lower.count == 0);
  CHECK(std::isnan(empty.lower.mean));
}

TEST_CASE("aggregate matches a direct recomputation on a real evaluation") {
  const auto spec = make_env_spec("pendulum");
  const auto policy = LinearPolicy::zeros(spec);
  EvalOptions opts;
  opts.rollouts_per_seed = 3;
  opts.horizon = 600;
  opts.disturbance = kNoiseMode;
  const auto report = evaluate_dimensions(policy, spec, 4, opts);
  REQUIRE(report.rows.size() == 12);
  std::vector<double> seed_means;
  for (std::size_t s = 0; s < 4; ++s) {
    double sum = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
      const auto& row = report.rows[s * 3 + r];
      CHECK(row.seed_index == s);
      CHECK(row.rollout_index == r);
      sum += row.madogram;
    }
    seed_means.push_back(sum / 3.0);
  }
  double mean = 0.0;
  for (double m : seed_means) mean += m / 4.0;
  double var = 0.0;
  for (double m : seed_means) var += (m - mean) * (m - mean) / 4.0;
  CHECK(report.madogram.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(report.madogram.std == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  CHECK(report.madogram.count == 4);
}

TEST_CASE("dimension evaluation is bit-reproducible across runs and workers") {
  const auto spec = make_env_spec("hopper1d");
  const auto policy = LinearPolicy::zeros(spec);
  EvalOptions opts;
  opts.rollouts_per_seed = 2;
  opts.horizon = 1500;
  opts.disturbance = kNoiseMode;
  const auto a = evaluate_dimensions(policy, spec, 3, opts);
  const auto b = evaluate_dimensions(policy, spec, 3, opts);
  opts.workers = 3;
  const auto c = evaluate_dimensions(policy, spec, 3, opts);
  CHECK(same_rows(a, b));
  CHECK(same_rows(a, c));
  for (const auto& row : a.rows) {
    CHECK(row.length == 1500);
    CHECK(row.lower <= row.upper);
    CHECK(std::isfinite(row.madogram));
  }
}

TEST_CASE("measurements of short trajectories are undefined") {
  const auto spec = make_env_spec("pendulum");
  const auto traj = support::make_trajectory(support::random_states(150, 3, 1), 1000, 1.0);
  const auto row = measure_trajectory(traj, spec, RunningStats(3), 200, {});
  CHECK(std::isnan(row.lower));
  CHECK(std::isnan(row.upper));
  CHECK(std::isnan(row.madogram));
  CHECK(std::isnan(row.variogram));
  CHECK(row.length == 149);
  CHECK(row.raw_return == 149.0);
}

TEST_CASE("measurement mode constants") {
  CHECK(kNoiseMode.action_noise_std == 0.001);
  CHECK(kNoiseMode.obs_noise_std == 0.01);
  CHECK(kNoiseMode.push_magnitude == 0.0);
}

TEST_CASE("failure rates of known policies") {
  const auto hopper = make_env_spec("hopper1d");
  const auto pump = failure_rate(pump_hopper(), hopper, {}, 20);
  CHECK(pump.failure_rate == 1.0);
  CHECK(pump.failure_count == 20);
  CHECK(pump.n_rollouts == 20);
  CHECK(failure_rate(LinearPolicy::zeros(hopper), hopper, {}, 20).failure_rate == 0.0);
  const auto pendulum = make_env_spec("pendulum");
  CHECK(failure_rate(LinearPolicy::zeros(pendulum), pendulum, {0.5, 0.5, 0.0, 0.0}, 20)
            .failure_rate == 0.0);
  CHECK_THROWS(failure_rate(LinearPolicy::zeros(hopper), hopper, {}, 0));
}

TEST_CASE("failure rate grows along a push ladder") {
  const auto hopper = make_env_spec("hopper1d");
  const auto policy = LinearPolicy::zeros(hopper);
  double previous = -1.0;
  for (double magnitude : {0.0, 20.0, 1e6}) {
    const auto r = failure_rate(policy, hopper, {0.0, 0.0, magnitude, 0.2}, 40, 1000, 0, 4);
    CAPTURE(magnitude);
    CHECK(r.failure_rate >= previous);
    previous = r.failure_rate;
  }
  CHECK(previous > 0.0);
  // Pushes that overflow the state count as failures.
  const auto pendulum = make_env_spec("pendulum");
  CHECK(failure_rate(LinearPolicy::zeros(pendulum), pendulum, {0.0, 0.0, 1e308, 1.0}, 10)
            .failure_rate == 1.0);
}

TEST_CASE("failure rate is reproducible across worker counts") {
  const auto hopper = make_env_spec("hopper1d");
  const DisturbanceConfig d{0.0, 0.0, 20.0, 0.2};
  const auto a = failure_rate(LinearPolicy::zeros(hopper), hopper, d, 30, 1000, 5, 1);
  const auto b = failure_rate(LinearPolicy::zeros(hopper), hopper, d, 30, 1000, 5, 6);
  CHECK(a.failure_count == b.failure_count);
}

TEST_CASE("grid search picks the rate nearest the target") {
  const auto hopper = make_env_spec("hopper1d");
  const auto policy = LinearPolicy::zeros(hopper);
  const std::vector<DisturbanceConfig> single{{}};
  const auto one = disturbance_grid_search(policy, hopper, single, 0.2, 10);
  CHECK(one.selected == 0);
  REQUIRE(one.reports.size() == 1);

  const std::vector<DisturbanceConfig> ladder{{0.0, 0.0, 1e6, 0.2}, {0.0, 0.0, 20.0, 0.2}, {}};
  const auto pick = disturbance_grid_search(policy, hopper, ladder, 0.2, 20);
  REQUIRE(pick.reports.size() == 3);
  CHECK(pick.reports[2].failure_rate == 0.0);
  for (const auto& r : pick.reports)
    CHECK(std::abs(pick.reports[pick.selected].failure_rate - 0.2) <= std::abs(r.failure_rate - 0.2));

  // Two survivors tie at distance 0.5; the milder one wins, then the earlier index.
  const std::vector<DisturbanceConfig> tie{{0.0, 0.0, 1e-3, 0.5}, {}};
  CHECK(disturbance_grid_search(policy, hopper, tie, 0.5, 10).selected == 1);
  const std::vector<DisturbanceConfig> same{{}, {}};
  CHECK(disturbance_grid_search(policy, hopper, same, 0.5, 10).selected == 0);
  CHECK_THROWS(disturbance_grid_search(policy, hopper, {}, 0.2, 10));
}

TEST_CASE("median ignores undefined values") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median({kNaN, 5.0, std::numeric_limits<double>::infinity(), 1.0}) == 3.0);
  CHECK(std::isnan(median({kNaN})));
  CHECK(std::isnan(median({})));
}

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dimshape/box_mesh.hpp"
#include "dimshape/environments.hpp"
#include "dimshape/policy.hpp"

namespace dimshape {

/// Action std .001 and observation std .01, the noisy measurement mode.
inline constexpr DisturbanceConfig kNoiseMode{0.001, 0.01, 0.0, 0.0};

struct DimensionRow {
  std::size_t seed_index = 0;
  std::size_t rollout_index = 0;
  std::uint64_t rollout_seed = 0;
  std::size_t length = 0;
  bool terminated_early = false;
  double raw_return = 0.0;
  // NaN when the post-transient segment is too short to measure.
  double lower = 0.0;
  double upper = 0.0;
  double madogram = 0.0;
  double variogram = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

struct DimensionReport {
  std::vector<DimensionRow> rows;
  Aggregate lower, upper, madogram, variogram, raw_return;
};

/// Per-seed means over the seed's rollouts, then mean and population std across seeds.
/// Non-finite values are left out of both stages.
void aggregate(DimensionReport& report);

struct EvalOptions {
  std::size_t rollouts_per_seed = 5;
  std::size_t horizon = 10000;
  std::size_t transient = 200;
  MeshParams mesh;
  DisturbanceConfig disturbance;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// One group of rollouts per policy (one policy per training seed).
DimensionReport evaluate_dimensions(std::span<const LinearPolicy> policies, const EnvSpec& env,
                                    const EvalOptions& opts);
/// One policy measured under `n_seeds` groups of evaluation seeds.
DimensionReport evaluate_dimensions(const LinearPolicy& policy, const EnvSpec& env,
                                    std::size_t n_seeds, const EvalOptions& opts);

/// Dimension measurements of a single trajectory's post-transient meshed states.
DimensionRow measure_trajectory(const Trajectory& traj, const EnvSpec& env,
                                const RunningStats& obs_stats, std::size_t transient,
                                const MeshParams& mesh);

struct RobustnessReport {
  DisturbanceConfig disturbance;
  std::size_t n_rollouts = 0;
  std::size_t failure_count = 0;
  double failure_rate = 0.0;
};

/// Fraction of seeded rollouts that end before `horizon` steps (blowups included).
/// Rollout i uses the same seed for every disturbance, so grid cells share noise draws.
RobustnessReport failure_rate(const LinearPolicy& policy, const EnvSpec& env,
                              const DisturbanceConfig& disturbance, std::size_t n_rollouts,
                              std::size_t horizon = 1000, std::uint64_t seed = 0,
                              std::size_t workers = 1);

struct GridSearchResult {
  std::vector<RobustnessReport> reports;  // grid order
  std::size_t selected = 0;
};

/// Grid point with failure rate closest to `target`; ties go to the lower severity,
/// then to the earlier grid index.
GridSearchResult disturbance_grid_search(const LinearPolicy& policy, const EnvSpec& env,
                                         std::span<const DisturbanceConfig> grid,
                                         double target = 0.2, std::size_t n_rollouts = 100,
                                         std::size_t horizon = 1000, std::uint64_t seed = 0,
                                         std::size_t workers = 1);

/// Median of the finite entries; NaN when there are none.
double median(std::vector<double> values);

}  // namespace dimshape

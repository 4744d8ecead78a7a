#include "dimshape/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "dimshape/variation.hpp"

namespace dimshape {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kEvalStream = 0xe4a1;
constexpr std::uint64_t kRobustStream = 0x40b5;

template <class Fn>
void parallel_indexed(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
}

Aggregate summarize(const std::map<std::size_t, std::vector<double>>& by_seed) {
  std::vector<double> seed_means;
  for (const auto& [seed, values] : by_seed) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : values)
      if (std::isfinite(v)) {
        sum += v;
        ++n;
      }
    if (n > 0) seed_means.push_back(sum / static_cast<double>(n));
  }
  Aggregate a;
  a.count = seed_means.size();
  if (seed_means.empty()) {
    a.mean = a.std = kNaN;
    return a;
  }
  for (double m : seed_means) a.mean += m;
  a.mean /= static_cast<double>(seed_means.size());
  for (double m : seed_means) a.std += (m - a.mean) * (m - a.mean);
  a.std = std::sqrt(a.std / static_cast<double>(seed_means.size()));
  return a;
}

}  // namespace

void aggregate(DimensionReport& report) {
  auto collect = [&](double DimensionRow::*field) {
    std::map<std::size_t, std::vector<double>> by_seed;
    for (const auto& r : report.rows) by_seed[r.seed_index].push_back(r.*field);
    return summarize(by_seed);
  };
  report.lower = collect(&DimensionRow::lower);
  report.upper = collect(&DimensionRow::upper);
  report.madogram = collect(&DimensionRow::madogram);
  report.variogram = collect(&DimensionRow::variogram);
  report.raw_return = collect(&DimensionRow::raw_return);
}

DimensionRow measure_trajectory(const Trajectory& traj, const EnvSpec& env,
                                const RunningStats& obs_stats, std::size_t transient,
                                const MeshParams& mesh) {
  DimensionRow row;
  row.length = traj.steps();
  row.terminated_early = traj.terminated_early;
  row.raw_return = traj.total_reward();
  row.lower = row.upper = row.madogram = row.variogram = kNaN;

  const auto tail = select_coords(post_transient(traj, transient), env.meshed_coords);
  if (tail.size() >= 2) {
    const RunningStats stats = obs_stats.count() > 0
                                   ? obs_stats.select(env.meshed_coords)
                                   : RunningStats::identity(env.meshed_coords.size());
    const auto curve = mesh_curve(tail, mesh, stats);
    if (curve.entries.size() >= 2) {
      row.lower = lower_mesh_dim(curve);
      row.upper = upper_mesh_dim(curve, mesh.upper_window);
    }
  }
  if (tail.size() >= 3) {
    row.madogram = trajectory_variation_dim(tail, 1.0);
    row.variogram = trajectory_variation_dim(tail, 2.0);
  }
  return row;
}

DimensionReport evaluate_dimensions(std::span<const LinearPolicy> policies, const EnvSpec& env,
                                    const EvalOptions& opts) {
  if (opts.rollouts_per_seed == 0) throw std::invalid_argument("need at least one rollout per seed");
  DimensionReport report;
  const std::size_t per = opts.rollouts_per_seed;
  report.rows.resize(policies.size() * per);
  parallel_indexed(report.rows.size(), opts.workers, [&](std::size_t i) {
    const std::size_t s = i / per, r = i % per;
    const std::uint64_t seed = derive_seed(opts.seed, kEvalStream, s, r);
    const auto result = rollout(env, policies[s], opts.horizon, opts.disturbance, seed);
    auto row = measure_trajectory(result.trajectory, env, policies[s].obs_stats, opts.transient,
                                  opts.mesh);
    row.seed_index = s;
    row.rollout_index = r;
    row.rollout_seed = seed;
    report.rows[i] = row;
  });
  aggregate(report);
  return report;
}

DimensionReport evaluate_dimensions(const LinearPolicy& policy, const EnvSpec& env,
                                    std::size_t n_seeds, const EvalOptions& opts) {
  const std::vector<LinearPolicy> copies(n_seeds, policy);
  return evaluate_dimensions(copies, env, opts);
}

RobustnessReport failure_rate(const LinearPolicy& policy, const EnvSpec& env,
                              const DisturbanceConfig& disturbance, std::size_t n_rollouts,
                              std::size_t horizon, std::uint64_t seed, std::size_t workers) {
  if (n_rollouts == 0) throw std::invalid_argument("need at least one rollout");
  std::vector<char> failed(n_rollouts, 0);
  parallel_indexed(n_rollouts, workers, [&](std::size_t i) {
    const auto result = rollout(env, policy, horizon, disturbance, derive_seed(seed, kRobustStream, i));
    failed[i] = result.trajectory.terminated_early ? 1 : 0;
  });
  RobustnessReport rep;
  rep.disturbance = disturbance;
  rep.n_rollouts = n_rollouts;
  rep.failure_count = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  rep.failure_rate = static_cast<double>(rep.failure_count) / static_cast<double>(n_rollouts);
  return rep;
}

GridSearchResult disturbance_grid_search(const LinearPolicy& policy, const EnvSpec& env,
                                         std::span<const DisturbanceConfig> grid, double target,
                                         std::size_t n_rollouts, std::size_t horizon,
                                         std::uint64_t seed, std::size_t workers) {
  if (grid.empty()) throw std::invalid_argument("disturbance grid is empty");
  GridSearchResult out;
  for (const auto& cfg : grid)
    out.reports.push_back(failure_rate(policy, env, cfg, n_rollouts, horizon, seed, workers));
  for (std::size_t i = 1; i < out.reports.size(); ++i) {
    const double gap = std::abs(out.reports[i].failure_rate - target);
    const double best = std::abs(out.reports[out.selected].failure_rate - target);
    if (gap < best || (gap == best && grid[i].severity() < grid[out.selected].severity()))
      out.selected = i;
  }
  return out;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace dimshape

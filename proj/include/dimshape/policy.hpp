#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dimshape/environments.hpp"
#include "dimshape/trajectory.hpp"

namespace dimshape {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

/// Static linear policy acting on normalized observations.
///
/// Before any statistics exist the observation is used as is.
struct LinearPolicy {
  Matrix weights;  // action_dim x obs_dim
  RunningStats obs_stats;

  LinearPolicy() = default;
  LinearPolicy(std::size_t action_dim, std::size_t obs_dim)
      : weights(action_dim, obs_dim), obs_stats(obs_dim) {}

  static LinearPolicy zeros(const EnvSpec& spec) { return {spec.action_dim, spec.obs_dim}; }

  /// action = clip(weights * normalize(obs), bounds)
  void act(std::span<const double> obs, std::span<double> action, std::span<const double> lo,
           std::span<const double> hi) const;

  /// Frozen copy of the policy as a rollout callable.
  PolicyFn as_fn(const EnvSpec& spec) const;

  bool all_finite() const;
  /// FNV-1a over the weight bytes.
  std::uint64_t hash() const;
  bool operator==(const LinearPolicy&) const = default;
};

/// Rollout callable for an arbitrary weight matrix under frozen `stats`.
PolicyFn linear_policy_fn(const EnvSpec& spec, const Matrix& weights, const RunningStats& stats);

RolloutResult rollout(const EnvSpec& spec, const LinearPolicy& policy, std::size_t horizon,
                      const DisturbanceConfig& disturbance, std::uint64_t seed);

}  // namespace dimshape

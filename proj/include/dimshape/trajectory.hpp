#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dimshape {

using StateVector = std::vector<double>;

/// Thrown when an operation's preconditions on sizes or shapes are violated.
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Trajectory {
  std::vector<StateVector> states;   // len = rewards + 1
  std::vector<StateVector> actions;  // len = rewards
  std::vector<double> rewards;
  bool terminated_early = false;
  std::size_t nominal_length = 1000;

  double total_reward() const;
  std::size_t steps() const { return rewards.size(); }
  /// Checks the length invariants; throws contract_error on violation.
  void validate() const;
};

/// Streaming per-coordinate mean and variance (Welford recurrence).
///
/// The variance reported is the population variance (m2 / count). Merging uses
/// the pairwise combination of Chan et al., so per-worker accumulators can be
/// folded together after a batch.
class RunningStats {
 public:
  static constexpr double kStdFloor = 1e-8;

  RunningStats() = default;
  explicit RunningStats(std::size_t dim);
  RunningStats(std::uint64_t count, std::vector<double> mean, std::vector<double> m2);

  /// Zero mean, unit variance, count 1: normalize() returns its input unchanged.
  static RunningStats identity(std::size_t dim);

  void update(std::span<const double> s);
  void merge(const RunningStats& other);

  std::size_t dim() const { return mean_.size(); }
  std::uint64_t count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& m2() const { return m2_; }

  std::vector<double> variance() const;
  std::vector<double> sample_variance() const;
  /// max(sqrt(variance), kStdFloor) per coordinate.
  std::vector<double> std_floored() const;

  StateVector normalize(std::span<const double> s) const;
  /// Projection onto a subset of coordinates.
  RunningStats select(std::span<const std::size_t> coords) const;

  bool operator==(const RunningStats&) const = default;

 private:
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

RunningStats update_stats(RunningStats stats, std::span<const double> s);
RunningStats merge_stats(const RunningStats& a, const RunningStats& b);
StateVector normalize(const RunningStats& stats, std::span<const double> s);

/// States with index t > transient. Empty when the trajectory is too short.
std::vector<StateVector> post_transient(const Trajectory& traj, std::size_t transient);

/// Keeps only the listed coordinates of every state.
std::vector<StateVector> select_coords(std::span<const StateVector> states,
                                       std::span<const std::size_t> coords);

}  // namespace dimshape

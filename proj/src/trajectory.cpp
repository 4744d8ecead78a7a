#include "dimshape/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dimshape {

double Trajectory::total_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

void Trajectory::validate() const {
  if (states.size() != rewards.size() + 1 || actions.size() != rewards.size())
    throw contract_error("trajectory length mismatch: " + std::to_string(states.size()) +
                         " states, " + std::to_string(actions.size()) + " actions, " +
                         std::to_string(rewards.size()) + " rewards");
  if (terminated_early != (rewards.size() < nominal_length))
    throw contract_error("terminated_early flag disagrees with trajectory length");
  for (const auto& s : states)
    if (!states.empty() && s.size() != states.front().size())
      throw contract_error("state dimension changes within trajectory");
}

RunningStats::RunningStats(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

RunningStats::RunningStats(std::uint64_t count, std::vector<double> mean, std::vector<double> m2)
    : count_(count), mean_(std::move(mean)), m2_(std::move(m2)) {
  if (mean_.size() != m2_.size()) throw contract_error("mean/m2 dimension mismatch");
}

RunningStats RunningStats::identity(std::size_t dim) {
  return RunningStats(1, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

void RunningStats::update(std::span<const double> s) {
  if (s.size() != dim())
    throw contract_error("stats dimension " + std::to_string(dim()) + " but sample has " +
                         std::to_string(s.size()));
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double delta = s[i] - mean_[i];
    mean_[i] += delta / n;
    m2_[i] += delta * (s[i] - mean_[i]);
  }
}

void RunningStats::merge(const RunningStats& other) {
  if (other.dim() != dim()) throw contract_error("cannot merge stats of different dimension");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    // Weighted mean form is symmetric in (a, b).
    mean_[i] = (na * mean_[i] + nb * other.mean_[i]) / n;
    m2_[i] = m2_[i] + other.m2_[i] + delta * delta * (na * nb / n);
  }
  count_ += other.count_;
}

std::vector<double> RunningStats::variance() const {
  std::vector<double> v(dim(), 0.0);
  if (count_ == 0) return v;
  for (std::size_t i = 0; i < dim(); ++i) v[i] = std::max(0.0, m2_[i] / static_cast<double>(count_));
  return v;
}

std::vector<double> RunningStats::sample_variance() const {
  std::vector<double> v(dim(), 0.0);
  if (count_ < 2) return v;
  for (std::size_t i = 0; i < dim(); ++i)
    v[i] = std::max(0.0, m2_[i] / static_cast<double>(count_ - 1));
  return v;
}

std::vector<double> RunningStats::std_floored() const {
  auto v = variance();
  for (auto& x : v) x = std::max(std::sqrt(x), kStdFloor);
  return v;
}

StateVector RunningStats::normalize(std::span<const double> s) const {
  if (count_ == 0) throw contract_error("no statistics");
  if (s.size() != dim())
    throw contract_error("stats dimension " + std::to_string(dim()) + " but state has " +
                         std::to_string(s.size()));
  StateVector out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sd = std::max(std::sqrt(std::max(0.0, m2_[i] / static_cast<double>(count_))),
                               kStdFloor);
    out[i] = (s[i] - mean_[i]) / sd;
  }
  return out;
}

RunningStats RunningStats::select(std::span<const std::size_t> coords) const {
  RunningStats out(coords.size());
  out.count_ = count_;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    if (coords[j] >= dim()) throw contract_error("coordinate index out of range");
    out.mean_[j] = mean_[coords[j]];
    out.m2_[j] = m2_[coords[j]];
  }
  return out;
}

RunningStats update_stats(RunningStats stats, std::span<const double> s) {
  stats.update(s);
  return stats;
}

RunningStats merge_stats(const RunningStats& a, const RunningStats& b) {
  RunningStats out = a;
  out.merge(b);
  return out;
}

StateVector normalize(const RunningStats& stats, std::span<const double> s) {
  return stats.normalize(s);
}

std::vector<StateVector> post_transient(const Trajectory& traj, std::size_t transient) {
  if (traj.states.size() <= transient + 1) return {};
  return {traj.states.begin() + static_cast<std::ptrdiff_t>(transient + 1), traj.states.end()};
}

std::vector<StateVector> select_coords(std::span<const StateVector> states,
                                       std::span<const std::size_t> coords) {
  std::vector<StateVector> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    StateVector r(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (coords[j] >= s.size()) throw contract_error("coordinate index out of range");
      r[j] = s[coords[j]];
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dimshape

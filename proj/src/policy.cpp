#include "dimshape/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>

namespace dimshape {
namespace {

struct Frozen {
  Matrix weights;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> lo, hi;
};

Frozen freeze(const Matrix& w, const RunningStats& stats, std::span<const double> lo,
              std::span<const double> hi) {
  Frozen f{w, {}, {}, {lo.begin(), lo.end()}, {hi.begin(), hi.end()}};
  if (stats.count() > 0) {
    f.mean = stats.mean();
    f.sd = stats.std_floored();
  } else {
    f.mean.assign(w.cols, 0.0);
    f.sd.assign(w.cols, 1.0);
  }
  return f;
}

void apply(const Frozen& f, std::span<const double> obs, std::span<double> action) {
  const Matrix& w = f.weights;
  if (obs.size() != w.cols || action.size() != w.rows)
    throw contract_error("policy dimensions do not match observation/action");
  for (std::size_t r = 0; r < w.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += w(r, c) * ((obs[c] - f.mean[c]) / f.sd[c]);
    action[r] = std::clamp(acc, f.lo[r], f.hi[r]);
  }
}

}  // namespace

void LinearPolicy::act(std::span<const double> obs, std::span<double> action,
                       std::span<const double> lo, std::span<const double> hi) const {
  apply(freeze(weights, obs_stats, lo, hi), obs, action);
}

PolicyFn linear_policy_fn(const EnvSpec& spec, const Matrix& weights, const RunningStats& stats) {
  if (weights.rows != spec.action_dim || weights.cols != spec.obs_dim)
    throw contract_error("policy shape does not match environment");
  auto frozen = std::make_shared<const Frozen>(freeze(weights, stats, spec.action_lo, spec.action_hi));
  return [frozen](std::span<const double> obs, std::span<double> action) {
    apply(*frozen, obs, action);
  };
}

PolicyFn LinearPolicy::as_fn(const EnvSpec& spec) const {
  return linear_policy_fn(spec, weights, obs_stats);
}

bool LinearPolicy::all_finite() const {
  return std::all_of(weights.data.begin(), weights.data.end(),
                     [](double x) { return std::isfinite(x); });
}

std::uint64_t LinearPolicy::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : weights.data) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

RolloutResult rollout(const EnvSpec& spec, const LinearPolicy& policy, std::size_t horizon,
                      const DisturbanceConfig& disturbance, std::uint64_t seed) {
  return rollout(spec, policy.as_fn(spec), horizon, disturbance, seed);
}

}  // namespace dimshape

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dimshape/environments.hpp"
#include "dimshape/policy.hpp"
#include "dimshape/postprocessors.hpp"

namespace dimshape {

struct ArsConfig {
  double step_size = 0.02;
  double exploration_std = 0.025;
  std::size_t directions = 50;
  std::size_t top_directions = 20;
  std::size_t epochs = 100;
  std::size_t rollout_length = 1000;
  // Unperturbed evaluation rollout every `eval_interval` epochs; 0 disables.
  std::size_t eval_interval = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Applied to every training and evaluation rollout.
  DisturbanceConfig disturbance;

  void validate() const;
};

inline constexpr double kReturnStdFloor = 1e-8;

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, continues across phases
  double mean_shaped = 0.0;
  double mean_raw = 0.0;
  double mean_dimension = 1.0;
  double max_raw = 0.0;
  std::size_t negative_returns = 0;
  std::size_t early_terminations = 0;
  double eval_raw = 0.0;  // NaN when no evaluation ran this epoch
  std::uint64_t policy_hash = 0;
  std::string postprocessor;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  // Number of phase-1 epochs in a two-phase run.
  std::optional<std::size_t> phase_boundary;
};

class training_diverged : public std::runtime_error {
 public:
  training_diverged(LinearPolicy last_good, std::size_t epoch)
      : std::runtime_error("diverged"), last_good_(std::move(last_good)), epoch_(epoch) {}
  const LinearPolicy& last_good() const { return last_good_; }
  std::size_t epoch() const { return epoch_; }

 private:
  LinearPolicy last_good_;
  std::size_t epoch_;
};

/// Returns of the antithetic rollout pair for one search direction.
struct DirectionResult {
  double plus;
  double minus;
};

/// The ARS-V2t step: keep the `top` directions with the largest max(plus, minus) and move
///   weights += step / (top * sigma_R) * sum (plus - minus) * direction,
/// where sigma_R is the (floored) standard deviation of the 2 * top retained returns.
/// Ties in the ranking are broken by direction index.
Matrix ars_update(const Matrix& weights, std::span<const Matrix> directions,
                  std::span<const DirectionResult> results, double step_size, std::size_t top);

/// A postprocessor of `std::nullopt` feeds raw returns to the update directly.
using OptionalPost = std::optional<PostprocessorConfig>;

struct EpochOutcome {
  LinearPolicy policy;
  EpochRecord record;
};

/// One epoch of ARS-V2t. Normalization stats are frozen during the epoch's rollouts and
/// updated afterwards from every visited observation, folded in rollout-index order.
/// Throws training_diverged if the update is not finite.
EpochOutcome ars_epoch(const LinearPolicy& policy, const EnvSpec& env, const ArsConfig& cfg,
                       const OptionalPost& post, std::size_t epoch);

using EpochCallback = std::function<void(const LinearPolicy&, const EpochRecord&)>;

struct TrainResult {
  LinearPolicy policy;
  TrainHistory history;
};

/// Runs cfg.epochs epochs starting from `start` (epoch numbers begin at first_epoch).
TrainResult continue_training(LinearPolicy start, const EnvSpec& env, const ArsConfig& cfg,
                              const OptionalPost& post, std::size_t first_epoch = 1,
                              const EpochCallback& on_epoch = {});

/// Trains from a zero policy.
TrainResult train(const EnvSpec& env, ArsConfig cfg, const OptionalPost& post, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

/// Phase 1 with the identity postprocessor for cfg_base.epochs, then phase 2 with
/// `post_tune` for cfg_tune.epochs from the same weights and statistics.
TrainResult two_phase_train(const EnvSpec& env, ArsConfig cfg_base, ArsConfig cfg_tune,
                            const PostprocessorConfig& post_tune, std::uint64_t seed,
                            const EpochCallback& on_epoch = {});

}  // namespace dimshape

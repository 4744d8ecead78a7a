#include "dimshape/ars.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace dimshape {
namespace {

constexpr std::uint64_t kDirectionStream = 0xd1;
constexpr std::uint64_t kRolloutStream = 0x20;
constexpr std::uint64_t kEvalStream = 0xe7;

struct RolloutSummary {
  double raw = 0.0;
  double shaped = 0.0;
  double dimension = 1.0;
  bool early = false;
  RunningStats visited;
};

RolloutSummary run_one(const EnvSpec& env, const Matrix& weights, const RunningStats& frozen,
                       const ArsConfig& cfg, const OptionalPost& post, std::uint64_t seed) {
  auto result = rollout(env, linear_policy_fn(env, weights, frozen), cfg.rollout_length, cfg.disturbance, seed);
  RolloutSummary s;
  s.raw = result.raw_return;
  s.early = result.trajectory.terminated_early;
  s.visited = RunningStats(env.obs_dim);
  for (const auto& obs : result.trajectory.states) s.visited.update(obs);
  if (post) {
    const auto shaped = postprocess_return(result.trajectory, *post, frozen, env.meshed_coords);
    s.shaped = shaped.shaped;
    s.dimension = shaped.dimension_used;
  } else {
    s.shaped = s.raw;
  }
  return s;
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
}

}  // namespace

void ArsConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(exploration_std > 0.0)) throw std::invalid_argument("exploration std must be positive");
  if (directions == 0) throw std::invalid_argument("need at least one direction");
  if (top_directions == 0 || top_directions > directions)
    throw std::invalid_argument("top directions must lie in [1, directions]");
  if (rollout_length == 0) throw std::invalid_argument("rollout length must be positive");
  disturbance.validate();
}

Matrix ars_update(const Matrix& weights, std::span<const Matrix> directions,
                  std::span<const DirectionResult> results, double step_size, std::size_t top) {
  if (directions.size() != results.size() || directions.empty())
    throw contract_error("directions and results must pair up");
  if (top == 0 || top > directions.size()) throw contract_error("top must lie in [1, N]");

  std::vector<std::size_t> order(directions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::max(results[a].plus, results[a].minus) > std::max(results[b].plus, results[b].minus);
  });
  order.resize(top);
  // Fold in index order so the result depends only on the retained set.
  std::sort(order.begin(), order.end());

  double mean = 0.0;
  for (auto k : order) mean += results[k].plus + results[k].minus;
  mean /= static_cast<double>(2 * top);
  double var = 0.0;
  for (auto k : order) {
    var += (results[k].plus - mean) * (results[k].plus - mean);
    var += (results[k].minus - mean) * (results[k].minus - mean);
  }
  const double sigma = std::max(std::sqrt(var / static_cast<double>(2 * top)), kReturnStdFloor);

  Matrix step(weights.rows, weights.cols);
  for (auto k : order) {
    const double diff = results[k].plus - results[k].minus;
    for (std::size_t i = 0; i < step.data.size(); ++i) step.data[i] += diff * directions[k].data[i];
  }
  Matrix out = weights;
  const double scale = step_size / (static_cast<double>(top) * sigma);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += scale * step.data[i];
  return out;
}

EpochOutcome ars_epoch(const LinearPolicy& policy, const EnvSpec& env, const ArsConfig& cfg,
                       const OptionalPost& post, std::size_t epoch) {
  cfg.validate();
  if (policy.weights.rows != env.action_dim || policy.weights.cols != env.obs_dim)
    throw contract_error("policy shape does not match environment");

  const std::size_t n = cfg.directions;
  std::mt19937_64 rng(derive_seed(cfg.seed, kDirectionStream, epoch));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> directions(n, Matrix(env.action_dim, env.obs_dim));
  for (auto& d : directions)
    for (auto& x : d.data) x = gauss(rng);

  const RunningStats frozen = policy.obs_stats;
  std::vector<RolloutSummary> summaries(2 * n);
  parallel_for(2 * n, cfg.workers, [&](std::size_t i) {
    const std::size_t k = i / 2;
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    Matrix w = policy.weights;
    for (std::size_t j = 0; j < w.data.size(); ++j)
      w.data[j] += sign * cfg.exploration_std * directions[k].data[j];
    // Both members of an antithetic pair share the environment seed.
    summaries[i] = run_one(env, w, frozen, cfg, post, derive_seed(cfg.seed, kRolloutStream, epoch, k));
  });

  std::vector<DirectionResult> results(n);
  EpochRecord rec;
  rec.epoch = epoch;
  rec.postprocessor = post ? to_string(post->kind) : "none";
  rec.max_raw = -std::numeric_limits<double>::infinity();
  double dim_sum = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const auto& s = summaries[i];
    (i % 2 == 0 ? results[i / 2].plus : results[i / 2].minus) = s.shaped;
    rec.mean_shaped += s.shaped;
    rec.mean_raw += s.raw;
    dim_sum += s.dimension;
    rec.max_raw = std::max(rec.max_raw, s.raw);
    if (post && post->kind != PostprocessorKind::identity && s.raw < 0.0) ++rec.negative_returns;
    if (s.early) ++rec.early_terminations;
  }
  rec.mean_shaped /= static_cast<double>(2 * n);
  rec.mean_raw /= static_cast<double>(2 * n);
  rec.mean_dimension = dim_sum / static_cast<double>(2 * n);

  LinearPolicy next = policy;
  next.weights = ars_update(policy.weights, directions, results, cfg.step_size, cfg.top_directions);
  if (!next.all_finite()) throw training_diverged(policy, epoch);
  for (const auto& s : summaries) next.obs_stats.merge(s.visited);

  rec.eval_raw = std::numeric_limits<double>::quiet_NaN();
  if (cfg.eval_interval > 0 && epoch % cfg.eval_interval == 0)
    rec.eval_raw = rollout(env, next, cfg.rollout_length, cfg.disturbance, derive_seed(cfg.seed, kEvalStream, epoch))
                       .raw_return;
  rec.policy_hash = next.hash();
  return {std::move(next), rec};
}

TrainResult continue_training(LinearPolicy start, const EnvSpec& env, const ArsConfig& cfg,
                              const OptionalPost& post, std::size_t first_epoch,
                              const EpochCallback& on_epoch) {
  cfg.validate();
  if (post) post->validate();
  TrainResult out{std::move(start), {}};
  out.history.epochs.reserve(cfg.epochs);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    auto step = ars_epoch(out.policy, env, cfg, post, first_epoch + e);
    out.policy = std::move(step.policy);
    out.history.epochs.push_back(step.record);
    if (on_epoch) on_epoch(out.policy, step.record);
  }
  return out;
}

TrainResult train(const EnvSpec& env, ArsConfig cfg, const OptionalPost& post, std::uint64_t seed,
                  const EpochCallback& on_epoch) {
  cfg.seed = seed;
  return continue_training(LinearPolicy::zeros(env), env, cfg, post, 1, on_epoch);
}

TrainResult two_phase_train(const EnvSpec& env, ArsConfig cfg_base, ArsConfig cfg_tune,
                            const PostprocessorConfig& post_tune, std::uint64_t seed,
                            const EpochCallback& on_epoch) {
  cfg_base.seed = seed;
  cfg_tune.seed = seed;
  PostprocessorConfig identity = post_tune;
  identity.kind = PostprocessorKind::identity;
  auto base = continue_training(LinearPolicy::zeros(env), env, cfg_base, identity, 1, on_epoch);
  auto tune = continue_training(std::move(base.policy), env, cfg_tune, post_tune,
                                cfg_base.epochs + 1, on_epoch);
  TrainResult out{std::move(tune.policy), std::move(base.history)};
  out.history.phase_boundary = cfg_base.epochs;
  out.history.epochs.insert(out.history.epochs.end(), tune.history.epochs.begin(),
                            tune.history.epochs.end());
  return out;
}

}  // namespace dimshape

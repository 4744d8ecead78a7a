#include "dimshape/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dimshape {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x6d657368u};
  return std::mt19937_64(seq);
}

enum Stream : std::uint64_t { kInit = 1, kActionNoise = 2, kObsNoise = 3, kPush = 4, kTerrain = 5 };

double leg_gap(double body, double leg, double ground) { return body - leg - ground; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

EnvSpec make_env_spec(EnvKind kind) {
  switch (kind) {
    case EnvKind::pendulum:
      return {kind, "pendulum", 3, 1, {-1.0}, {1.0}, 0.05, 1000, {0, 1, 2}, {}};
    case EnvKind::cartpole_swingup:
      return {kind, "cartpole_swingup", 5, 1, {-1.0}, {1.0}, 0.05, 1000, {1, 2, 3, 4}, {}};
    case EnvKind::hopper1d:
      return {kind, "hopper1d", 4, 1, {-1.0}, {1.0}, 0.01, 1000, {0, 1, 2, 3}, {}};
  }
  throw std::invalid_argument("unknown environment kind");
}

EnvSpec make_env_spec(std::string_view name) {
  for (auto kind : {EnvKind::pendulum, EnvKind::cartpole_swingup, EnvKind::hopper1d}) {
    auto spec = make_env_spec(kind);
    if (spec.name == name) return spec;
  }
  if (name == "cartpole") return make_env_spec(EnvKind::cartpole_swingup);
  throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

std::vector<std::string> env_names() { return {"pendulum", "cartpole_swingup", "hopper1d"}; }

double DisturbanceConfig::severity() const {
  return action_noise_std + obs_noise_std + push_magnitude * push_rate;
}

void DisturbanceConfig::validate() const {
  if (!(action_noise_std >= 0.0) || !(obs_noise_std >= 0.0) || !(push_magnitude >= 0.0))
    throw std::invalid_argument("disturbance magnitudes must be non-negative");
  if (!(push_rate >= 0.0 && push_rate <= 1.0))
    throw std::invalid_argument("push rate must lie in [0, 1]");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(mix(base) ^ a) ^ b) ^ c);
}

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) {
  switch (spec_.kind) {
    case EnvKind::pendulum: physical_.assign(2, 0.0); break;
    case EnvKind::cartpole_swingup: physical_.assign(4, 0.0); break;
    case EnvKind::hopper1d: physical_.assign(4, 0.0); break;
  }
}

StateVector Environment::reset(std::uint64_t seed, const DisturbanceConfig& disturbance,
                               std::size_t horizon) {
  disturbance.validate();
  disturbance_ = disturbance;
  horizon_ = horizon == 0 ? spec_.nominal_length : horizon;
  steps_ = 0;
  auto init = make_engine(seed, kInit);
  action_rng_ = make_engine(seed, kActionNoise);
  obs_rng_ = make_engine(seed, kObsNoise);
  push_rng_ = make_engine(seed, kPush);
  terrain_rng_ = make_engine(seed, kTerrain);
  ground_ = next_ground_ = 0.0;
  ground_pending_ = false;
  planted_ = true;

  switch (spec_.kind) {
    case EnvKind::pendulum:
      physical_ = {std::numbers::pi + uniform(init, -0.05, 0.05), uniform(init, -0.05, 0.05)};
      break;
    case EnvKind::cartpole_swingup:
      physical_ = {uniform(init, -0.05, 0.05), uniform(init, -0.05, 0.05),
                   uniform(init, -0.05, 0.05), uniform(init, -0.05, 0.05)};
      break;
    case EnvKind::hopper1d: {
      // Foot starts on the ground: leg length equals body height.
      const double h = spec_.hopper.rest_height() * uniform(init, 0.95, 1.05);
      const double v = uniform(init, -0.05, 0.05);
      physical_ = {h, v, h, v};
      break;
    }
  }
  return observe();
}

void Environment::set_physical_state(std::span<const double> state) {
  if (state.size() != physical_.size()) throw contract_error("physical state size mismatch");
  physical_.assign(state.begin(), state.end());
  if (spec_.kind == EnvKind::hopper1d)
    planted_ = leg_gap(physical_[0], physical_[2], ground_) <= 0.0;
}

StateVector Environment::observe() const {
  StateVector obs;
  switch (spec_.kind) {
    case EnvKind::pendulum:
      obs = {std::cos(physical_[0]), std::sin(physical_[0]), physical_[1]};
      break;
    case EnvKind::cartpole_swingup:
      obs = {physical_[0], physical_[1], std::cos(physical_[2]), std::sin(physical_[2]),
             physical_[3]};
      break;
    case EnvKind::hopper1d:
      obs = physical_;
      break;
  }
  return obs;
}

double Environment::integrate(std::span<const double> action, double push_angle, bool push) {
  const double push_force = push ? disturbance_.push_magnitude : 0.0;
  auto& p = physical_;
  switch (spec_.kind) {
    case EnvKind::pendulum: {
      using namespace pendulum;
      const double torque = kMaxTorque * action[0] + push_force * std::sin(push_angle);
      const double acc = (kGravity / kLength) * std::sin(p[0]) + torque / (kMass * kLength * kLength);
      p[1] += spec_.dt * acc;
      p[0] += spec_.dt * p[1];
      return 1.0 + std::cos(p[0]);
    }
    case EnvKind::cartpole_swingup: {
      using namespace cartpole;
      const double force = kForceScale * action[0] + push_force * std::cos(push_angle);
      // Classic cart-pole equations with the pole angle measured from upright.
      const double phi = p[2] - std::numbers::pi;
      const double total = kCartMass + kPoleMass;
      const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);
      const double temp = (force + kPoleMass * kHalfPoleLength * p[3] * p[3] * sin_phi) / total;
      const double phi_acc =
          (kGravity * sin_phi - cos_phi * temp) /
          (kHalfPoleLength * (4.0 / 3.0 - kPoleMass * cos_phi * cos_phi / total));
      const double x_acc = temp - kPoleMass * kHalfPoleLength * phi_acc * cos_phi / total;
      p[1] += spec_.dt * x_acc;
      p[3] += spec_.dt * phi_acc;
      p[0] += spec_.dt * p[1];
      p[2] += spec_.dt * p[3];
      return 0.5 * (1.0 - std::cos(p[2]));
    }
    case EnvKind::hopper1d: {
      const HopperParams& hp = spec_.hopper;
      double y = p[0], vy = p[1];
      const double leg = p[2], leg_vel = p[3];
      // Foot height relative to the ground under it.
      double foot = planted_ ? 0.0 : leg_gap(p[0], p[2], ground_);
      double vfoot = vy - leg_vel;
      const double rest = hp.rest_length + hp.actuator_range * action[0];
      double spring = hp.stiffness * (rest - leg) - hp.damping * leg_vel;
      if (leg < hp.min_length)
        spring += hp.stop_stiffness * (hp.min_length - leg) - hp.stop_damping * leg_vel;
      else if (leg > hp.max_length)
        spring -= hp.stop_stiffness * (leg - hp.max_length) + hp.stop_damping * leg_vel;
      const double push_vertical = push_force * std::sin(push_angle);
      vy += spec_.dt * (spring + push_vertical - hp.body_mass * hp.gravity) / hp.body_mass;
      vfoot += spec_.dt * (-spring - hp.foot_mass * hp.gravity) / hp.foot_mass;
      y += spec_.dt * vy;
      foot += spec_.dt * vfoot;
      const bool was_planted = planted_;
      planted_ = foot <= 0.0;
      if (planted_) {
        foot = 0.0;
        vfoot = std::max(vfoot, 0.0);
      }
      const double clearance = foot;
      double foot_abs = foot + ground_;
      if (hp.terrain_roughness > 0.0) {
        if (was_planted && !planted_) {
          next_ground_ = uniform(terrain_rng_, -hp.terrain_roughness, hp.terrain_roughness);
          ground_pending_ = true;
        }
        // Switch once the foot is above both levels so the change never penetrates.
        if (ground_pending_ && foot_abs > std::max(ground_, next_ground_)) {
          ground_ = next_ground_;
          ground_pending_ = false;
        }
      }
      if (planted_) foot_abs = ground_;
      p = {y, vy, y - foot_abs, vy - vfoot};
      return 1.0 + hp.clearance_weight * std::min(clearance, hp.clearance_cap);
    }
  }
  return 0.0;
}

bool Environment::failure() const {
  switch (spec_.kind) {
    case EnvKind::pendulum:
      return false;
    case EnvKind::cartpole_swingup: {
      if (std::abs(physical_[0]) > cartpole::kTrackLimit) return true;
      if (steps_ <= cartpole::kSwingUpGrace) return false;
      const double off = std::remainder(physical_[2] - std::numbers::pi, 2.0 * std::numbers::pi);
      return std::abs(off) > cartpole::kUprightLimit;
    }
    case EnvKind::hopper1d:
      return physical_[0] < spec_.hopper.fail_fraction * spec_.hopper.rest_height();
  }
  return false;
}

StepResult Environment::step(std::span<const double> action) {
  if (action.size() != spec_.action_dim) throw contract_error("action dimension mismatch");
  std::vector<double> applied(action.begin(), action.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < applied.size(); ++i) {
    if (disturbance_.action_noise_std > 0.0)
      applied[i] += disturbance_.action_noise_std * gauss(action_rng_);
    applied[i] = std::clamp(applied[i], spec_.action_lo[i], spec_.action_hi[i]);
  }

  bool push = false;
  double angle = 0.0;
  if (disturbance_.push_rate > 0.0) {
    const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(push_rng_);
    angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(push_rng_);
    push = draw < disturbance_.push_rate;
  }

  StepResult out;
  out.reward = integrate(applied, angle, push);
  ++steps_;
  for (double x : physical_)
    if (!std::isfinite(x)) throw dynamics_blowup();

  out.next_state = observe();
  if (disturbance_.obs_noise_std > 0.0)
    for (auto& x : out.next_state) x += disturbance_.obs_noise_std * gauss(obs_rng_);
  out.failed = failure();
  out.done = out.failed || steps_ >= horizon_;
  return out;
}

RolloutResult rollout(const EnvSpec& spec, const PolicyFn& policy, std::size_t horizon,
                      const DisturbanceConfig& disturbance, std::uint64_t seed) {
  if (horizon == 0) throw contract_error("rollout horizon must be at least one step");
  Environment env(spec);
  RolloutResult result;
  auto& traj = result.trajectory;
  traj.nominal_length = horizon;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon);
  traj.rewards.reserve(horizon);

  StateVector obs = env.reset(seed, disturbance, horizon);
  if (disturbance.obs_noise_std > 0.0) {
    // The initial observation is corrupted like every later one.
    std::mt19937_64 rng = std::mt19937_64(derive_seed(seed, 0x0b5));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : obs) x += disturbance.obs_noise_std * gauss(rng);
  }
  traj.states.push_back(obs);
  StateVector action(spec.action_dim, 0.0);
  while (true) {
    policy(obs, action);
    StepResult step;
    try {
      step = env.step(action);
    } catch (const dynamics_blowup&) {
      result.blowup = true;
      break;
    }
    traj.actions.push_back(action);
    traj.rewards.push_back(step.reward);
    traj.states.push_back(step.next_state);
    obs = std::move(step.next_state);
    if (step.done) break;
  }
  traj.terminated_early = traj.rewards.size() < horizon;
  result.raw_return = traj.total_reward();
  return result;
}

}  // namespace dimshape

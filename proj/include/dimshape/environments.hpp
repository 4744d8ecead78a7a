#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dimshape/trajectory.hpp"

namespace dimshape {

enum class EnvKind { pendulum, cartpole_swingup, hopper1d };

/// Spring-leg hopper: a body riding a spring-damper leg that ends in a light foot.
/// The action shifts the spring's rest length; leg travel is limited by stiff stops.
struct HopperParams {
  double body_mass = 1.0;
  double foot_mass = 0.1;
  double stiffness = 100.0;
  double damping = 1.5;
  double rest_length = 1.0;
  double actuator_range = 0.15;
  double min_length = 0.2;
  double max_length = 1.6;
  // Leg stops act as a stiff spring-damper beyond the travel limits.
  double stop_stiffness = 2000.0;
  double stop_damping = 10.0;
  double gravity = 9.81;
  double clearance_weight = 4.0;
  double clearance_cap = 0.25;
  double fail_fraction = 0.3;
  // Ground height for each landing is drawn uniformly from [-roughness, roughness].
  double terrain_roughness = 0.02;

  /// Static stance height with zero action.
  double rest_height() const { return rest_length - body_mass * gravity / stiffness; }
};

struct EnvSpec {
  EnvKind kind;
  std::string name;
  std::size_t obs_dim;
  std::size_t action_dim;
  std::vector<double> action_lo;
  std::vector<double> action_hi;
  double dt;
  std::size_t nominal_length = 1000;
  // Observation coordinates used for dimension analysis.
  std::vector<std::size_t> meshed_coords;
  HopperParams hopper;

  /// Dimension of the meshed state vector.
  std::size_t topological_dim() const { return meshed_coords.size(); }
};

EnvSpec make_env_spec(EnvKind kind);
/// Throws std::invalid_argument for unknown names.
EnvSpec make_env_spec(std::string_view name);
std::vector<std::string> env_names();

struct DisturbanceConfig {
  double action_noise_std = 0.0;
  double obs_noise_std = 0.0;
  double push_magnitude = 0.0;
  double push_rate = 0.0;

  /// Scalar used to order grid points: summed noise plus expected push force.
  double severity() const;
  void validate() const;
  bool operator==(const DisturbanceConfig&) const = default;
};

struct StepResult {
  StateVector next_state;  // observation seen by the policy
  double reward = 0.0;
  bool done = false;
  bool failed = false;  // done because of the failure predicate
};

class dynamics_blowup : public std::runtime_error {
 public:
  dynamics_blowup() : std::runtime_error("dynamics blowup") {}
};

namespace pendulum {
inline constexpr double kGravity = 10.0;
inline constexpr double kLength = 1.0;
inline constexpr double kMass = 1.0;
inline constexpr double kMaxTorque = 2.0;
}  // namespace pendulum

namespace cartpole {
inline constexpr double kGravity = 9.8;
inline constexpr double kCartMass = 1.0;
inline constexpr double kPoleMass = 0.1;
inline constexpr double kHalfPoleLength = 0.5;
inline constexpr double kForceScale = 10.0;
inline constexpr double kTrackLimit = 2.4;
inline constexpr std::size_t kSwingUpGrace = 300;
inline constexpr double kUprightLimit = 1.5707963267948966;
}  // namespace cartpole

/// One seedable environment instance. Owns its physical state and random streams.
///
/// Physical states:
///   pendulum   (theta, omega), theta = 0 upright; observation (cos, sin, omega)
///   cartpole   (x, xdot, theta, omega), theta = 0 hanging; observation
///              (x, xdot, cos, sin, omega), x is not meshed
///   hopper1d   (height, vertical velocity, leg length, leg velocity); the ground
///              height changes between landings, drawn from the episode seed
class Environment {
 public:
  explicit Environment(EnvSpec spec);

  /// Starts an episode of `horizon` steps (0 = nominal length).
  StateVector reset(std::uint64_t seed, const DisturbanceConfig& disturbance = {},
                    std::size_t horizon = 0);
  /// Throws contract_error on action size mismatch and dynamics_blowup on non-finite state.
  StepResult step(std::span<const double> action);

  const EnvSpec& spec() const { return spec_; }
  std::span<const double> physical_state() const { return physical_; }
  void set_physical_state(std::span<const double> state);
  std::size_t step_count() const { return steps_; }
  /// Current ground height under the hopper's foot (0 for other environments).
  double ground_height() const { return ground_; }
  StateVector observe() const;

 private:
  double integrate(std::span<const double> action, double push_angle, bool push);
  bool failure() const;

  EnvSpec spec_;
  std::vector<double> physical_;
  DisturbanceConfig disturbance_;
  std::size_t horizon_ = 0;
  std::size_t steps_ = 0;
  std::mt19937_64 action_rng_;
  std::mt19937_64 obs_rng_;
  std::mt19937_64 push_rng_;
  std::mt19937_64 terrain_rng_;
  double ground_ = 0.0;
  double next_ground_ = 0.0;
  bool ground_pending_ = false;
  bool planted_ = true;
};

/// Maps an observation to an action (before clipping).
using PolicyFn = std::function<void(std::span<const double> obs, std::span<double> action)>;

struct RolloutResult {
  Trajectory trajectory;
  double raw_return = 0.0;
  bool blowup = false;
};

/// Runs until failure or `horizon` steps. The trajectory stores what the policy saw.
RolloutResult rollout(const EnvSpec& spec, const PolicyFn& policy, std::size_t horizon,
                      const DisturbanceConfig& disturbance, std::uint64_t seed);

/// Deterministic seed derivation for independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace dimshape

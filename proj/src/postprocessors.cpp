#include "dimshape/postprocessors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dimshape/variation.hpp"

namespace dimshape {

std::string to_string(PostprocessorKind kind) {
  switch (kind) {
    case PostprocessorKind::identity: return "identity";
    case PostprocessorKind::lower_mesh_dim: return "lower-mesh";
    case PostprocessorKind::upper_mesh_dim: return "upper-mesh";
    case PostprocessorKind::madogram: return "madogram";
    case PostprocessorKind::variogram: return "variogram";
  }
  return "unknown";
}

PostprocessorKind parse_postprocessor(std::string_view name) {
  for (auto kind : {PostprocessorKind::identity, PostprocessorKind::lower_mesh_dim,
                    PostprocessorKind::upper_mesh_dim, PostprocessorKind::madogram,
                    PostprocessorKind::variogram})
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown postprocessor '" + std::string(name) + "'");
}

void PostprocessorConfig::validate() const {
  if (!(mesh.growth_factor > 1.0)) throw std::invalid_argument("mesh growth factor must exceed 1");
  if (!(mesh.initial_box_size > 0.0))
    throw std::invalid_argument("initial box size must be positive");
  if (mesh.upper_window == 0) throw std::invalid_argument("upper window must be positive");
}

double clipped_dimension(const Trajectory& traj, const DimensionFn& estimator,
                         std::size_t transient, std::span<const std::size_t> meshed_coords) {
  const std::size_t topo = meshed_coords.size();
  if (topo < 2) throw contract_error("clipping needs a topological dimension of at least 2");
  const double ceiling = static_cast<double>(topo) / 2.0;

  const auto tail = post_transient(traj, transient);
  if (tail.size() < 3) return ceiling;
  double dim;
  try {
    dim = estimator(select_coords(tail, meshed_coords));
  } catch (const degenerate_curve&) {
    return ceiling;
  }
  if (std::isnan(dim)) return ceiling;
  return std::clamp(dim, 1.0, ceiling);
}

DimensionFn make_estimator(const PostprocessorConfig& config, RunningStats stats) {
  const auto mesh = config.mesh;
  switch (config.kind) {
    case PostprocessorKind::identity:
      return [](std::span<const StateVector>) { return 1.0; };
    case PostprocessorKind::lower_mesh_dim:
      return [mesh, stats = std::move(stats)](std::span<const StateVector> s) {
        return lower_mesh_dim(mesh_curve(s, mesh, stats));
      };
    case PostprocessorKind::upper_mesh_dim:
      return [mesh, stats = std::move(stats)](std::span<const StateVector> s) {
        return upper_mesh_dim(mesh_curve(s, mesh, stats), mesh.upper_window);
      };
    case PostprocessorKind::madogram:
      return [](std::span<const StateVector> s) { return trajectory_variation_dim(s, 1.0); };
    case PostprocessorKind::variogram:
      return [](std::span<const StateVector> s) { return trajectory_variation_dim(s, 2.0); };
  }
  throw std::invalid_argument("unknown postprocessor kind");
}

ShapedReturn shape_return(const Trajectory& traj, const DimensionFn& estimator,
                          std::size_t transient, std::span<const std::size_t> meshed_coords) {
  if (traj.rewards.empty()) throw contract_error("trajectory has no rewards");
  const double raw = traj.total_reward();
  const double dim = clipped_dimension(traj, estimator, transient, meshed_coords);
  return {raw, dim, raw / dim};
}

ShapedReturn postprocess_return(const Trajectory& traj, const PostprocessorConfig& config,
                                const RunningStats& stats,
                                std::span<const std::size_t> meshed_coords) {
  if (traj.rewards.empty()) throw contract_error("trajectory has no rewards");
  const double raw = traj.total_reward();
  if (config.kind == PostprocessorKind::identity) return {raw, 1.0, raw};

  RunningStats meshed = stats.count() > 0 ? stats.select(meshed_coords)
                                          : RunningStats::identity(meshed_coords.size());
  return shape_return(traj, make_estimator(config, std::move(meshed)), config.transient,
                      meshed_coords);
}

}  // namespace dimshape

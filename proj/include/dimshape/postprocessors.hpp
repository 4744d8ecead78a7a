#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dimshape/box_mesh.hpp"
#include "dimshape/trajectory.hpp"

namespace dimshape {

enum class PostprocessorKind { identity, lower_mesh_dim, upper_mesh_dim, madogram, variogram };

std::string to_string(PostprocessorKind kind);
/// Accepts the canonical names ("identity", "lower-mesh", "upper-mesh", "madogram",
/// "variogram"). Throws std::invalid_argument otherwise.
PostprocessorKind parse_postprocessor(std::string_view name);

struct PostprocessorConfig {
  PostprocessorKind kind = PostprocessorKind::identity;
  std::size_t transient = 200;
  MeshParams mesh;

  void validate() const;
};

struct ShapedReturn {
  double raw_return;
  double dimension_used;
  double shaped;
};

using DimensionFn = std::function<double(std::span<const StateVector>)>;

/// Applies `estimator` to the meshed post-transient states and clamps the result into
/// [1, D_t / 2]. Segments of fewer than 3 states, estimator failures and NaN results
/// all receive the maximum D_t / 2.
double clipped_dimension(const Trajectory& traj, const DimensionFn& estimator,
                         std::size_t transient, std::span<const std::size_t> meshed_coords);

/// The estimator behind a non-identity postprocessor, evaluated on meshed states.
/// `stats` is the normalization context already projected onto the meshed coordinates.
DimensionFn make_estimator(const PostprocessorConfig& config, RunningStats stats);

/// Raw return divided by the clipped dimension from `estimator`.
ShapedReturn shape_return(const Trajectory& traj, const DimensionFn& estimator,
                          std::size_t transient, std::span<const std::size_t> meshed_coords);

/// Divides the episode's raw return by the postprocessor's dimension.
/// `stats` covers the full observation vector; it is projected onto `meshed_coords`.
ShapedReturn postprocess_return(const Trajectory& traj, const PostprocessorConfig& config,
                                const RunningStats& stats,
                                std::span<const std::size_t> meshed_coords);

}  // namespace dimshape

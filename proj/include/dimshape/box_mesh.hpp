#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dimshape/trajectory.hpp"

namespace dimshape {

/// Thrown when a mesh curve has too few entries to fit a slope.
class degenerate_curve : public std::runtime_error {
 public:
  degenerate_curve() : std::runtime_error("degenerate curve") {}
};

/// Occupancy table of axis-aligned boxes of side `box_size`.
///
/// A normalized state s lands in the box keyed by round(s / d), rounding half
/// away from zero. Keys are integer vectors held in an open-addressing table, so
/// insertion is O(1) on average and building a mesh of n states is O(n).
class BoxMesh {
 public:
  using Key = std::vector<std::int64_t>;

  BoxMesh(std::size_t dim, double box_size);

  void insert(std::span<const double> normalized_state);

  std::size_t size() const { return occupied_; }
  std::uint64_t total_points() const { return total_; }
  double box_size() const { return box_size_; }
  std::size_t dim() const { return dim_; }

  /// Occupancy of one box; 0 when the box is empty.
  std::uint64_t count(std::span<const std::int64_t> key) const;
  /// All occupied boxes, sorted by key.
  std::vector<std::pair<Key, std::uint64_t>> cells() const;

  static std::int64_t quantize(double x, double box_size);

 private:
  std::size_t find_slot(const std::int64_t* key, std::uint64_t hash) const;
  void grow();

  std::size_t dim_;
  double box_size_;
  std::size_t occupied_ = 0;
  std::uint64_t total_ = 0;
  std::size_t mask_;
  std::vector<std::int64_t> keys_;     // capacity * dim_
  std::vector<std::uint64_t> counts_;  // 0 marks an empty slot
  std::vector<std::int64_t> scratch_;
};

/// Normalizes each state with `stats` and inserts it. Throws on empty input.
BoxMesh create_box_mesh(std::span<const StateVector> states, double box_size,
                        const RunningStats& stats);

struct MeshParams {
  double growth_factor = 1.5;
  double initial_box_size = 1e-2;
  double min_box_size = 1e-9;
  double max_box_size = 1e9;
  // Shrinking stops once the mesh holds this fraction of the data.
  double fill_fraction = 0.8;
  // Consecutive-pair window for the upper estimate.
  std::size_t upper_window = 1;
};

struct MeshEntry {
  double box_size;
  std::size_t mesh_size;
  bool operator==(const MeshEntry&) const = default;
};

struct MeshCurve {
  std::vector<MeshEntry> entries;  // ascending box_size
  std::size_t data_size = 0;
};

MeshCurve mesh_curve(std::span<const StateVector> states, const MeshParams& params,
                     const RunningStats& stats);

/// Least-squares slope of -log m against log d over every curve entry.
double lower_mesh_dim(const MeshCurve& curve);
/// Largest local slope of -log m against log d; `window` consecutive pairs per fit.
double upper_mesh_dim(const MeshCurve& curve, std::size_t window = 1);
/// Least-squares slope over the middle `keep` fraction of entries (by log d).
double central_mesh_dim(const MeshCurve& curve, double keep = 0.6);

struct DimensionEstimate {
  double lower;
  double upper;
};

DimensionEstimate mesh_dimensions(const MeshCurve& curve, std::size_t window = 1);

/// Slope of y on x by ordinary least squares. Requires >= 2 points with distinct x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace dimshape

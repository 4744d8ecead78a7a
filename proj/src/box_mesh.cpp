#include "dimshape/box_mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace dimshape {
namespace {

constexpr std::size_t kInitialCapacity = 64;

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_key(const std::int64_t* key, std::size_t dim) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t i = 0; i < dim; ++i) h = mix(h ^ static_cast<std::uint64_t>(key[i])) + i;
  return h;
}

std::vector<StateVector> normalize_all(std::span<const StateVector> states,
                                       const RunningStats& stats) {
  std::vector<StateVector> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(stats.normalize(s));
  return out;
}

std::size_t mesh_size_of(std::span<const StateVector> normalized, double box_size) {
  BoxMesh mesh(normalized.front().size(), box_size);
  for (const auto& s : normalized) mesh.insert(s);
  return mesh.size();
}

}  // namespace

BoxMesh::BoxMesh(std::size_t dim, double box_size)
    : dim_(dim),
      box_size_(box_size),
      mask_(kInitialCapacity - 1),
      keys_(kInitialCapacity * dim, 0),
      counts_(kInitialCapacity, 0),
      scratch_(dim, 0) {
  if (!(box_size > 0.0) || !std::isfinite(box_size))
    throw contract_error("box size must be positive and finite");
  if (dim == 0) throw contract_error("box mesh needs at least one coordinate");
}

std::int64_t BoxMesh::quantize(double x, double box_size) {
  const double q = x / box_size;
  // Saturate instead of overflowing; such keys only arise for absurd scales.
  constexpr double lim = 9.0e18;
  if (!(q < lim)) return q != q ? 0 : static_cast<std::int64_t>(lim);
  if (!(q > -lim)) return -static_cast<std::int64_t>(lim);
  return std::llround(q);
}

std::size_t BoxMesh::find_slot(const std::int64_t* key, std::uint64_t hash) const {
  std::size_t slot = hash & mask_;
  while (counts_[slot] != 0 && !std::equal(key, key + dim_, keys_.begin() + slot * dim_))
    slot = (slot + 1) & mask_;
  return slot;
}

void BoxMesh::grow() {
  const std::size_t new_cap = (mask_ + 1) * 2;
  std::vector<std::int64_t> old_keys(new_cap * dim_, 0);
  std::vector<std::uint64_t> old_counts(new_cap, 0);
  old_keys.swap(keys_);
  old_counts.swap(counts_);
  mask_ = new_cap - 1;
  for (std::size_t i = 0; i < old_counts.size(); ++i) {
    if (old_counts[i] == 0) continue;
    const std::int64_t* key = old_keys.data() + i * dim_;
    const std::size_t slot = find_slot(key, hash_key(key, dim_));
    std::copy(key, key + dim_, keys_.begin() + slot * dim_);
    counts_[slot] = old_counts[i];
  }
}

void BoxMesh::insert(std::span<const double> s) {
  if (s.size() != dim_) throw contract_error("state dimension does not match mesh");
  for (std::size_t i = 0; i < dim_; ++i) scratch_[i] = quantize(s[i], box_size_);
  const std::uint64_t h = hash_key(scratch_.data(), dim_);
  std::size_t slot = find_slot(scratch_.data(), h);
  if (counts_[slot] == 0) {
    // Keep load factor below 1/2.
    if (2 * (occupied_ + 1) > mask_ + 1) {
      grow();
      slot = find_slot(scratch_.data(), h);
    }
    std::copy(scratch_.begin(), scratch_.end(), keys_.begin() + slot * dim_);
    ++occupied_;
  }
  ++counts_[slot];
  ++total_;
}

std::uint64_t BoxMesh::count(std::span<const std::int64_t> key) const {
  if (key.size() != dim_) throw contract_error("key dimension does not match mesh");
  return counts_[find_slot(key.data(), hash_key(key.data(), dim_))];
}

std::vector<std::pair<BoxMesh::Key, std::uint64_t>> BoxMesh::cells() const {
  std::vector<std::pair<Key, std::uint64_t>> out;
  out.reserve(occupied_);
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0) continue;
    const auto first = keys_.begin() + i * dim_;
    out.emplace_back(Key(first, first + dim_), counts_[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BoxMesh create_box_mesh(std::span<const StateVector> states, double box_size,
                        const RunningStats& stats) {
  if (states.empty()) throw contract_error("empty state set");
  BoxMesh mesh(states.front().size(), box_size);
  for (const auto& s : states) mesh.insert(stats.normalize(s));
  return mesh;
}

MeshCurve mesh_curve(std::span<const StateVector> states, const MeshParams& params,
                     const RunningStats& stats) {
  if (states.empty()) throw contract_error("empty state set");
  if (!(params.growth_factor > 1.0)) throw contract_error("growth factor must exceed 1");
  if (!(params.initial_box_size > 0.0)) throw contract_error("initial box size must be positive");

  const auto normalized = normalize_all(states, stats);
  const auto target = static_cast<std::size_t>(
      std::ceil(params.fill_fraction * static_cast<double>(states.size())));

  std::deque<MeshEntry> entries;
  const double d0 = params.initial_box_size;
  const std::size_t m0 = mesh_size_of(normalized, d0);
  entries.push_back({d0, m0});

  double d = d0;
  std::size_t m = m0;
  while (m < target) {
    d /= params.growth_factor;
    if (d < params.min_box_size) break;
    m = mesh_size_of(normalized, d);
    entries.push_front({d, m});
  }

  d = d0;
  m = m0;
  while (m != 1) {
    d *= params.growth_factor;
    if (d > params.max_box_size) break;
    m = mesh_size_of(normalized, d);
    entries.push_back({d, m});
  }

  return MeshCurve{{entries.begin(), entries.end()}, states.size()};
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw degenerate_curve();
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) throw degenerate_curve();
  return sxy / sxx;
}

namespace {

void log_axes(std::span<const MeshEntry> entries, std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  for (const auto& e : entries) {
    x.push_back(std::log(e.box_size));
    y.push_back(-std::log(static_cast<double>(e.mesh_size)));
  }
}

}  // namespace

double lower_mesh_dim(const MeshCurve& curve) {
  if (curve.entries.size() < 2) throw degenerate_curve();
  std::vector<double> x, y;
  log_axes(curve.entries, x, y);
  return least_squares_slope(x, y);
}

double upper_mesh_dim(const MeshCurve& curve, std::size_t window) {
  if (curve.entries.size() < 2) throw degenerate_curve();
  if (window == 0) throw contract_error("upper window must be at least one pair");
  window = std::min(window, curve.entries.size() - 1);
  std::vector<double> x, y;
  log_axes(curve.entries, x, y);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + window < x.size(); ++i) {
    const std::span<const double> xs(x.data() + i, window + 1);
    const std::span<const double> ys(y.data() + i, window + 1);
    best = std::max(best, least_squares_slope(xs, ys));
  }
  return best;
}

double central_mesh_dim(const MeshCurve& curve, double keep) {
  if (!(keep > 0.0 && keep <= 1.0)) throw contract_error("keep fraction must be in (0, 1]");
  const std::size_t n = curve.entries.size();
  if (n < 2) throw degenerate_curve();
  auto drop = static_cast<std::size_t>(std::floor(0.5 * (1.0 - keep) * static_cast<double>(n)));
  if (n - 2 * drop < 2) drop = (n - 2) / 2;
  std::vector<double> x, y;
  log_axes(std::span(curve.entries).subspan(drop, n - 2 * drop), x, y);
  return least_squares_slope(x, y);
}

DimensionEstimate mesh_dimensions(const MeshCurve& curve, std::size_t window) {
  return {lower_mesh_dim(curve), upper_mesh_dim(curve, window)};
}

}  // namespace dimshape

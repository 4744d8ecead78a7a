#pragma once

// Independent oracles and fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include <fftw3.h>

#include "dimshape/box_mesh.hpp"
#include "dimshape/trajectory.hpp"

namespace support {

using dimshape::StateVector;

/// Counts distinct boxes with an ordered set of keys built from std::round.
inline std::size_t brute_force_mesh_size(std::span<const StateVector> states, double d,
                                         const dimshape::RunningStats& stats) {
  std::set<std::vector<long long>> keys;
  const auto mean = stats.mean();
  const auto sd = stats.std_floored();
  for (const auto& s : states) {
    std::vector<long long> key(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
      key[k] = static_cast<long long>(std::round(((s[k] - mean[k]) / sd[k]) / d));
    keys.insert(std::move(key));
  }
  return keys.size();
}

/// Plain two-pass least squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

/// Fractional Brownian motion path of n + 1 samples starting at 0, generated by
/// circulant embedding of the fractional Gaussian noise covariance.
inline std::vector<double> fbm(std::size_t n, double hurst, std::uint64_t seed) {
  const std::size_t m = 2 * n;
  auto gamma = [hurst](double k) {
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(std::abs(k + 1.0), h2) - 2.0 * std::pow(std::abs(k), h2) +
                  std::pow(std::abs(k - 1.0), h2));
  };
  std::vector<std::complex<double>> row(m), eig(m), work(m);
  for (std::size_t k = 0; k <= n; ++k) row[k] = gamma(static_cast<double>(k));
  for (std::size_t k = n + 1; k < m; ++k) row[k] = gamma(static_cast<double>(m - k));

  auto* in = reinterpret_cast<fftw_complex*>(row.data());
  auto* out = reinterpret_cast<fftw_complex*>(eig.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = std::max(eig[k].real(), 0.0);
    const double scale = std::sqrt(lambda / static_cast<double>(m));
    const double re = normal(rng);
    const double im = normal(rng);
    work[k] = scale * std::complex<double>(re, im);
  }
  std::vector<std::complex<double>> noise(m);
  plan = fftw_plan_dft_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(work.data()),
                          reinterpret_cast<fftw_complex*>(noise.data()), FFTW_FORWARD,
                          FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> path(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) path[i + 1] = path[i] + noise[i].real();
  return path;
}

/// Trajectory with the given states, unit rewards and zero actions.
inline dimshape::Trajectory make_trajectory(std::vector<StateVector> states,
                                            std::size_t nominal_length = 1000,
                                            double reward = 1.0) {
  dimshape::Trajectory t;
  const std::size_t steps = states.empty() ? 0 : states.size() - 1;
  t.states = std::move(states);
  t.actions.assign(steps, StateVector{0.0});
  t.rewards.assign(steps, reward);
  t.nominal_length = nominal_length;
  t.terminated_early = steps < nominal_length;
  return t;
}

inline std::vector<StateVector> random_states(std::size_t n, std::size_t dim, std::uint64_t seed,
                                              double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<StateVector> out(n, StateVector(dim));
  for (auto& s : out)
    for (auto& x : s) x = u(rng);
  return out;
}

inline dimshape::RunningStats stats_of(std::span<const StateVector> states) {
  dimshape::RunningStats stats(states.front().size());
  for (const auto& s : states) stats.update(s);
  return stats;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace support

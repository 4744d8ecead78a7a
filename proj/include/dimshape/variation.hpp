#pragma once

#include <span>

#include "dimshape/trajectory.hpp"

namespace dimshape {

/// Power variation of order p at lag l:
///   (1 / (2n - l)) * sum_{i=l..n} |X_i - X_{i-l}|^p,  with n = X.size() - 1.
/// Requires n >= 2, p > 0 and l in {1, 2}.
double power_variation(std::span<const double> series, double p, int lag);

/// Variation estimator of fractional dimension,
///   2 - (log P_p(X,2) - log P_p(X,1)) / (p log 2).
/// A constant series (zero lag-1 variation) is assigned dimension 1.
double variation_estimator(std::span<const double> series, double p);

inline double madogram(std::span<const double> series) { return variation_estimator(series, 1.0); }
inline double variogram(std::span<const double> series) { return variation_estimator(series, 2.0); }

/// Mean of variation_estimator over each coordinate's time series.
double trajectory_variation_dim(std::span<const StateVector> states, double p);

}  // namespace dimshape

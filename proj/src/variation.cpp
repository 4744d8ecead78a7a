#include "dimshape/variation.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace dimshape {

double power_variation(std::span<const double> series, double p, int lag) {
  if (series.size() < 3) throw contract_error("power variation needs at least 3 samples");
  if (!(p > 0.0)) throw contract_error("power variation order must be positive");
  if (lag != 1 && lag != 2) throw contract_error("lag must be 1 or 2");
  const std::size_t n = series.size() - 1;
  const auto l = static_cast<std::size_t>(lag);
  double sum = 0.0;
  for (std::size_t i = l; i <= n; ++i) {
    const double inc = std::abs(series[i] - series[i - l]);
    sum += p == 1.0 ? inc : p == 2.0 ? inc * inc : std::pow(inc, p);
  }
  return sum / static_cast<double>(2 * n - l);
}

double variation_estimator(std::span<const double> series, double p) {
  const double v1 = power_variation(series, p, 1);
  if (v1 == 0.0) return 1.0;
  const double v2 = power_variation(series, p, 2);
  return 2.0 - (std::log(v2) - std::log(v1)) / (p * std::numbers::ln2);
}

double trajectory_variation_dim(std::span<const StateVector> states, double p) {
  if (states.size() < 3) throw contract_error("variation dimension needs at least 3 states");
  const std::size_t dim = states.front().size();
  if (dim == 0) throw contract_error("states have no coordinates");
  std::vector<double> column(states.size());
  double total = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t t = 0; t < states.size(); ++t) {
      if (states[t].size() != dim) throw contract_error("state dimension changes within series");
      column[t] = states[t][c];
    }
    total += variation_estimator(column, p);
  }
  return total / static_cast<double>(dim);
}

}  // namespace dimshape

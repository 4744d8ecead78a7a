#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dimshape/variation.hpp"
#include "support.hpp"

using namespace dimshape;

namespace {

std::vector<double> ramp(std::size_t n) {
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i <= n; ++i) x[i] = static_cast<double>(i);
  return x;
}

const double kRampDim = 2.0 - std::log(199.0 / 100.0) / std::log(2.0);

}  // namespace

TEST_CASE("power variation of a unit ramp") {
  const auto x = ramp(100);
  CHECK(power_variation(x, 1.0, 1) == doctest::Approx(100.0 / 199.0).epsilon(1e-14));
  CHECK(power_variation(x, 1.0, 2) == doctest::Approx(2.0 * 99.0 / 198.0).epsilon(1e-14));
  CHECK(power_variation(x, 2.0, 2) == doctest::Approx(4.0 * 99.0 / 198.0).epsilon(1e-14));
}

TEST_CASE("power variation of a constant series is zero") {
  const std::vector<double> x(50, 3.25);
  for (double p : {0.5, 1.0, 2.0})
    for (int lag : {1, 2}) CHECK(power_variation(x, p, lag) == 0.0);
}

TEST_CASE("power variation checks its arguments") {
  const std::vector<double> two{0.0, 1.0};
  const auto x = ramp(10);
  CHECK_THROWS_AS(power_variation(two, 1.0, 1), contract_error);
  CHECK_THROWS_AS(power_variation(x, 0.0, 1), contract_error);
  CHECK_THROWS_AS(power_variation(x, 1.0, 3), contract_error);
}

TEST_CASE("ramp estimator matches the closed form") {
  const auto x = ramp(100);
  CHECK(std::abs(madogram(x) - kRampDim) < 1e-9);
  CHECK(kRampDim == doctest::Approx(1.00722).epsilon(1e-5));
  // For p = 2 the lag-2 increments carry four times the power.
  const double vario = 2.0 - std::log(2.0 * 199.0 / 100.0) / (2.0 * std::log(2.0));
  CHECK(std::abs(variogram(x) - vario) < 1e-9);
}

TEST_CASE("constant series has dimension one") {
  const std::vector<double> x(40, -1.0);
  CHECK(madogram(x) == 1.0);
  CHECK(variogram(x) == 1.0);
}

TEST_CASE("white noise reads as dimension two") {
  std::vector<double> estimates;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(10000);
    for (auto& v : x) v = normal(rng);
    estimates.push_back(madogram(x));
  }
  CHECK(std::abs(support::median(estimates) - 2.0) <= 0.1);
}

TEST_CASE("estimator is affine invariant") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(2000);
  double acc = 0.0;
  for (auto& v : x) v = (acc += normal(rng));
  for (double a : {-3.0, 0.5, 7.25})
    for (double b : {0.0, 100.0, -2.5}) {
      std::vector<double> y(x.size());
      std::transform(x.begin(), x.end(), y.begin(), [&](double v) { return a * v + b; });
      for (double p : {1.0, 2.0})
        CHECK(variation_estimator(y, p) == doctest::Approx(variation_estimator(x, p)).epsilon(1e-10));
    }
}

TEST_CASE("fractional Brownian motion reads as two minus the Hurst exponent") {
  for (double h : {0.3, 0.5, 0.7}) {
    std::vector<double> mado, vario;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto path = support::fbm(1 << 14, h, 1000 + seed);
      mado.push_back(madogram(path));
      vario.push_back(variogram(path));
    }
    CAPTURE(h);
    CHECK(std::abs(support::median(mado) - (2.0 - h)) <= 0.1);
    CHECK(std::abs(support::median(vario) - (2.0 - h)) <= 0.1);
  }
}

TEST_CASE("shuffling a ramp raises its estimate") {
  auto x = ramp(999);
  const double ordered = madogram(x);
  std::mt19937_64 rng(2);
  std::shuffle(x.begin(), x.end(), rng);
  CHECK(ordered < madogram(x));
}

TEST_CASE("trajectory dimension averages the coordinates") {
  std::vector<StateVector> both_linear, mixed;
  for (int i = 0; i <= 100; ++i) {
    both_linear.push_back({static_cast<double>(i), -2.0 * i + 5.0});
    mixed.push_back({4.0, static_cast<double>(i)});
  }
  CHECK(std::abs(trajectory_variation_dim(both_linear, 1.0) - kRampDim) < 1e-9);
  CHECK(std::abs(trajectory_variation_dim(mixed, 1.0) - 0.5 * (1.0 + kRampDim)) < 1e-9);
  CHECK(trajectory_variation_dim(mixed, 1.0) == doctest::Approx(1.00361).epsilon(1e-5));
}

TEST_CASE("trajectory dimension needs three consistent states") {
  const std::vector<StateVector> two{{0.0}, {1.0}};
  CHECK_THROWS_AS(trajectory_variation_dim(two, 1.0), contract_error);
  const std::vector<StateVector> ragged{{0.0}, {1.0, 2.0}, {3.0}};
  CHECK_THROWS_AS(trajectory_variation_dim(ragged, 1.0), contract_error);
}

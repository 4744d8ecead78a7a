#include <doctest.h>

#include <cmath>
#include <random>

#include "dimshape/trajectory.hpp"
#include "support.hpp"

using namespace dimshape;

namespace {

void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= rel * std::max({1.0, std::abs(a[i]), std::abs(b[i])}));
}

}  // namespace

TEST_CASE("first update sets the mean to the sample") {
  const auto s = update_stats(RunningStats(2), std::vector<double>{2.0, 4.0});
  CHECK(s.count() == 1);
  CHECK(s.mean() == std::vector<double>{2.0, 4.0});
  CHECK(s.variance() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("two samples give the hand-computed mean and variances") {
  RunningStats s(1);
  s.update(std::vector<double>{0.0});
  s.update(std::vector<double>{2.0});
  CHECK(s.mean()[0] == doctest::Approx(1.0));
  CHECK(s.sample_variance()[0] == doctest::Approx(2.0));
  CHECK(s.variance()[0] == doctest::Approx(1.0));
}

TEST_CASE("repeating one vector leaves zero variance") {
  RunningStats s(3);
  for (int k = 0; k < 17; ++k) s.update(std::vector<double>{1.5, -2.0, 1e6});
  for (double v : s.variance()) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("update rejects a dimension mismatch") {
  RunningStats s(2);
  CHECK_THROWS_AS(s.update(std::vector<double>{1.0}), contract_error);
  CHECK_THROWS_AS(merge_stats(RunningStats(2), RunningStats(3)), contract_error);
}

TEST_CASE("merge with empty stats is the identity") {
  RunningStats x(2);
  x.update(std::vector<double>{1.0, 2.0});
  x.update(std::vector<double>{3.0, -1.0});
  CHECK(merge_stats(RunningStats(2), x) == x);
  CHECK(merge_stats(x, RunningStats(2)) == x);
}

TEST_CASE("merging two single samples averages them") {
  const auto a = update_stats(RunningStats(1), std::vector<double>{0.0});
  const auto b = update_stats(RunningStats(1), std::vector<double>{2.0});
  const auto m = merge_stats(a, b);
  CHECK(m.count() == 2);
  CHECK(m.mean()[0] == doctest::Approx(1.0));
  CHECK(m.variance()[0] == doctest::Approx(1.0));
}

TEST_CASE("merge matches sequential feeding and is commutative") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = support::random_states(100, 3, seed, -50.0, 80.0);
    std::mt19937_64 rng(seed + 99);
    const std::size_t cut = std::uniform_int_distribution<std::size_t>(0, 100)(rng);
    RunningStats a(3), b(3), all(3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      (i < cut ? a : b).update(pts[i]);
      all.update(pts[i]);
    }
    const auto ab = merge_stats(a, b);
    const auto ba = merge_stats(b, a);
    CHECK(ab.count() == all.count());
    check_close(ab.mean(), all.mean(), 1e-9);
    check_close(ab.m2(), all.m2(), 1e-9);
    check_close(ab.mean(), ba.mean(), 1e-9);
    check_close(ab.m2(), ba.m2(), 1e-9);
  }
}

TEST_CASE("merge is associative within tolerance") {
  const auto pts = support::random_states(90, 2, 7, -3.0, 9.0);
  RunningStats a(2), b(2), c(2);
  for (std::size_t i = 0; i < pts.size(); ++i) (i < 20 ? a : i < 55 ? b : c).update(pts[i]);
  const auto left = merge_stats(merge_stats(a, b), c);
  const auto right = merge_stats(a, merge_stats(b, c));
  check_close(left.mean(), right.mean(), 1e-9);
  check_close(left.m2(), right.m2(), 1e-9);
}

TEST_CASE("normalize divides by the standard deviation") {
  // count 1, mean 1, m2 4: population std 2.
  const RunningStats s(1, {1.0}, {4.0});
  CHECK(normalize(s, std::vector<double>{3.0})[0] == doctest::Approx(1.0));
  CHECK(normalize(s, s.mean())[0] == 0.0);
}

TEST_CASE("zero variance uses the floor and stays finite") {
  RunningStats s(2);
  s.update(std::vector<double>{1.0, 2.0});
  s.update(std::vector<double>{1.0, 4.0});
  const auto z = s.normalize(std::vector<double>{1.5, 3.0});
  CHECK(std::isfinite(z[0]));
  CHECK(z[0] == doctest::Approx(0.5 / RunningStats::kStdFloor));
  CHECK(z[1] == doctest::Approx(0.0));
}

TEST_CASE("normalize without statistics fails") {
  RunningStats s(2);
  CHECK_THROWS_WITH(s.normalize(std::vector<double>{0.0, 0.0}), "no statistics");
}

TEST_CASE("identity stats leave states unchanged") {
  const auto id = RunningStats::identity(3);
  const std::vector<double> s{0.25, -7.0, 3.5};
  CHECK(id.normalize(s) == s);
}

TEST_CASE("normalized stream has zero mean and unit std") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n0(5.0, 3.0), n1(-2.0, 0.01);
  std::vector<StateVector> pts(20000);
  RunningStats s(2);
  for (auto& p : pts) {
    p = {n0(rng), n1(rng)};
    s.update(p);
  }
  RunningStats check(2);
  for (const auto& p : pts) check.update(s.normalize(p));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(check.mean()[k]) < 1e-6);
    CHECK(std::abs(std::sqrt(check.variance()[k]) - 1.0) < 1e-3);
  }
}

TEST_CASE("select projects the statistics") {
  RunningStats s(3);
  s.update(std::vector<double>{1.0, 2.0, 3.0});
  s.update(std::vector<double>{3.0, 2.0, 7.0});
  const std::vector<std::size_t> coords{2, 0};
  const auto p = s.select(coords);
  CHECK(p.count() == 2);
  CHECK(p.mean() == std::vector<double>{5.0, 2.0});
  CHECK(p.m2() == std::vector<double>{s.m2()[2], s.m2()[0]});
}

TEST_CASE("post_transient keeps the states after the transient") {
  std::vector<StateVector> states(1000);
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = {static_cast<double>(i)};
  const auto t = support::make_trajectory(states, 999);

  const auto tail = post_transient(t, 200);
  REQUIRE(tail.size() == 799);
  CHECK(tail.front()[0] == 201.0);
  CHECK(tail.back()[0] == 999.0);

  const auto all_but_first = post_transient(t, 0);
  CHECK(all_but_first.size() == 999);
  CHECK(all_but_first.front()[0] == 1.0);

  std::vector<StateVector> short_states(150, StateVector{0.0});
  CHECK(post_transient(support::make_trajectory(short_states), 200).empty());
}

TEST_CASE("trajectory length invariants are checked") {
  auto t = support::make_trajectory(support::random_states(11, 2, 1), 10);
  CHECK_NOTHROW(t.validate());
  CHECK_FALSE(t.terminated_early);
  CHECK(t.total_reward() == doctest::Approx(10.0));
  t.rewards.pop_back();
  CHECK_THROWS_AS(t.validate(), contract_error);

  auto early = support::make_trajectory(support::random_states(6, 2, 1), 10);
  CHECK(early.terminated_early);
  early.terminated_early = false;
  CHECK_THROWS_AS(early.validate(), contract_error);
}

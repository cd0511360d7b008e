#include <random>

#include "doctest.h"
#include "hevdp/cycle.hpp"
#include "test_support.hpp"

using namespace hevdp;

TEST_CASE("two-row file passes through unchanged") {
  const auto c = load_cycle(testing::data_dir() / "two_rows.csv");
  CHECK(c.dt == 1.0);
  REQUIRE(c.speeds.size() == 2);
  CHECK(c.speeds[0] == 0.0);
  CHECK(c.speeds[1] == 5.0);
  CHECK(c.name == "two_rows");
}

TEST_CASE("bundled JN-1015 has 661 samples over 660 s") {
  const auto c = load_cycle(testing::source_dir() / "data" / "jn1015.csv");
  CHECK(c.samples() == 661);
  CHECK(c.dt == 1.0);
  const auto s = compute_stats(c);
  CHECK(s.duration == 660.0);
  CHECK(std::abs(s.distance - 4165.27) / 4165.27 <= 0.01);
  CHECK(std::abs(s.max_speed - 19.44) <= 0.1);
  CHECK(s.mean_speed_moving >= s.mean_speed_overall);
}

TEST_CASE("load errors name the offending line") {
  try {
    load_cycle(testing::data_dir() / "negative_speed.csv");
    FAIL("expected rejection");
  } catch (const CycleError& e) {
    CHECK(e.line() == 7);
  }
  try {
    load_cycle(testing::data_dir() / "jn1015_truncated.csv");
    FAIL("expected rejection");
  } catch (const CycleError& e) {
    CHECK(e.line() == 191);
  }

  const auto dir = testing::scratch("cycle");
  const auto uneven = testing::write_file(dir / "uneven.csv", "t_s,v_mps\n0,0\n1,1\n2.5,2\n3,3\n");
  try {
    load_cycle(uneven);
    FAIL("expected rejection");
  } catch (const CycleError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(load_cycle(testing::write_file(dir / "three.csv", "0,1,2\n1,2,3\n")), CycleError);
  CHECK_THROWS_AS(load_cycle(testing::write_file(dir / "one.csv", "0,1\n")), CycleError);
  CHECK_THROWS_AS(load_cycle(dir / "missing.csv"), CycleError);
}

TEST_CASE("single-column files take dt from the override") {
  const auto dir = testing::scratch("cycle_single");
  const auto f = testing::write_file(dir / "speeds.csv", "v_mps\n0\n2\n4\n");
  const auto c = load_cycle(f, 0.5);
  CHECK(c.dt == 0.5);
  CHECK(compute_stats(c).distance == 1.0);
  CHECK(load_cycle(f).dt == 1.0);
}

TEST_CASE("speeds keep every bit of the input text") {
  const auto dir = testing::scratch("cycle_bits");
  const auto f = testing::write_file(dir / "bits.csv", "0,0.1\n1,0.30000000000000004\n2,12.3456789012345\n");
  const auto c = load_cycle(f);
  CHECK(c.speeds[0] == 0.1);
  CHECK(c.speeds[1] == 0.30000000000000004);
  CHECK(c.speeds[2] == 12.3456789012345);
}

TEST_CASE("statistics of simple cycles") {
  const auto flat = make_cycle(1.0, std::vector<double>(101, 10.0));
  const auto s = compute_stats(flat);
  CHECK(s.distance == 1000.0);
  CHECK(s.max_speed == 10.0);
  CHECK(s.mean_speed_overall == 10.0);
  CHECK(s.duration == 100.0);

  const auto saw = make_cycle(1.0, {0.0, 2.0, 0.0});
  CHECK(compute_stats(saw).distance == 2.0);
}

TEST_CASE("forward-difference acceleration") {
  CHECK(accel_at(make_cycle(1.0, {0.0, 5.0}), 0) == 5.0);
  CHECK(accel_at(make_cycle(1.0, {10.0, 8.0}), 0) == -2.0);
  const auto c = make_cycle(1.0, std::vector<double>(20, 7.3));
  for (std::size_t k = 0; k < c.stages(); ++k) CHECK(accel_at(c, k) == 0.0);
  CHECK_THROWS_AS(accel_at(c, c.stages()), std::out_of_range);
}

TEST_CASE("make_cycle rejects invalid traces") {
  CHECK_THROWS_AS(make_cycle(0.0, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_cycle(1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_cycle(1.0, {1.0, -0.1}), std::invalid_argument);
}

TEST_CASE("cycle statistics properties on random traces") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> speed(0.0, 30.0);
  std::uniform_int_distribution<int> len(2, 300);
  std::uniform_real_distribution<double> step(0.1, 2.0);
  for (int n = 0; n < 300; ++n) {
    std::vector<double> v(len(rng));
    for (auto& x : v) x = rng() % 4 == 0 ? 0.0 : speed(rng);
    const auto c = make_cycle(step(rng), v);
    const auto s = compute_stats(c);
    CHECK(s.duration == static_cast<double>(v.size() - 1) * c.dt);
    CHECK(s.mean_speed_moving >= s.mean_speed_overall);

    if (v.size() >= 3) {
      const std::size_t m = 1 + rng() % (v.size() - 2);
      const auto a = make_cycle(c.dt, {v.begin(), v.begin() + m + 1});
      const auto b = make_cycle(c.dt, {v.begin() + m, v.end()});
      CHECK(compute_stats(a).distance + compute_stats(b).distance == doctest::Approx(s.distance).epsilon(1e-12));
    }
  }
}

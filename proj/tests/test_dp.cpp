#include <cmath>
#include <random>

#include "doctest.h"
#include "hevdp/dp.hpp"
#include "hevdp/sim.hpp"
#include "test_support.hpp"
#include "toy_instances.hpp"

using namespace hevdp;

namespace {

DriveCycle jn1015() { return load_cycle(testing::source_dir() / "data" / "jn1015.csv"); }

// First `samples` samples of JN-1015.
DriveCycle jn1015_head(std::size_t samples) {
  const auto c = jn1015();
  return make_cycle(c.dt, {c.speeds.begin(), c.speeds.begin() + samples}, "jn1015_head");
}

DpConfig coarse(Mode mode) {
  DpConfig c;
  c.mode = mode;
  c.soc_points = 31;
  c.theta_points = 21;
  c.control_points = 11;
  c.window = {0.4, 0.7, 10.0, 30.0};
  return c;
}

}  // namespace

TEST_CASE("grid construction") {
  DpConfig c;
  c.soc_points = 4;
  c.theta_points = 3;
  const auto [grid, controls] = build_grids(c);
  CHECK(grid.soc()[0] == 0.4);
  CHECK(grid.soc()[1] == doctest::Approx(0.5));
  CHECK(grid.soc()[3] == 0.7);
  CHECK((*grid.theta())[1] == 20.0);
  CHECK(grid.node_count() == 12);

  const auto [full, u] = build_grids(DpConfig{});
  CHECK(full.soc_count() == 201);
  CHECK(full.theta_count() == 101);
  CHECK(u.values.size() == 51);
  CHECK(std::count(u.values.begin(), u.values.end(), 0.0) == 1);
  CHECK(std::count(u.values.begin(), u.values.end(), 1.0) == 1);

  DpConfig odd;
  odd.control_points = 4;  // -1, -1/3, 1/3, 1 gains an exact 0
  const auto [g2, u2] = build_grids(odd);
  CHECK(u2.values.size() == 5);
  CHECK(std::is_sorted(u2.values.begin(), u2.values.end()));

  DpConfig bad;
  bad.soc_points = 1;
  CHECK_THROWS_AS(build_grids(bad), std::invalid_argument);
  bad = {};
  bad.bounds.theta_low = 40.0;
  CHECK_THROWS_AS(build_grids(bad), std::invalid_argument);
}

TEST_CASE("soc-only grid has no temperature axis") {
  auto c = coarse(Mode::soc_only);
  const auto [grid, controls] = build_grids(c);
  CHECK_FALSE(grid.two_state());
  CHECK(grid.node_count() == 31);
  CHECK(grid.node(5).theta == 20.0);
}

TEST_CASE("hard terminal cost") {
  DpConfig c;
  c.terminal = TerminalCost::hard;
  CHECK(terminal_value(c, {0.545, 20.0}) == 0.0);
  CHECK(terminal_value(c, {0.5, 20.0}) == c.big_value);
  CHECK(terminal_value(c, {0.545, 26.0}) == c.big_value);
  c.mode = Mode::soc_only;
  CHECK(terminal_value(c, {0.545, 26.0}) == 0.0);

  DpConfig wide;
  wide.terminal = TerminalCost::hard;
  wide.soc_points = 5;
  wide.theta_points = 5;
  wide.window = {0.4, 0.7, 10.0, 30.0};
  const auto [grid, u] = build_grids(wide);
  for (const double v : terminal_cost(grid, wide)) CHECK(v == 0.0);
}

TEST_CASE("penalty terminal cost grows linearly with the distance to the window") {
  DpConfig c;
  c.terminal = TerminalCost::penalty;
  CHECK(terminal_value(c, {0.545, 20.0}) == 0.0);
  CHECK(terminal_value(c, {0.5, 20.0}) == doctest::Approx(0.04 * c.terminal_soc_penalty));
  CHECK(terminal_value(c, {0.6, 27.0}) ==
        doctest::Approx(0.05 * c.terminal_soc_penalty + 2.0 * c.terminal_theta_penalty));
  c.terminal_soc_penalty = 1e12;
  CHECK(terminal_value(c, {0.4, 20.0}) == c.big_value);
}

TEST_CASE("interpolation is exact at nodes and capped at the big value") {
  DpConfig c = coarse(Mode::two_state);
  const auto [grid, u] = build_grids(c);
  ValueSlice v(grid.node_count());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = 0.001 * static_cast<double>(n * n % 97);
  for (std::size_t n = 0; n < v.size(); ++n) CHECK(interpolate_value(grid, v, grid.node(n), 1e9) == v[n]);

  v.assign(v.size(), 1.0);
  v[grid.index(3, 4)] = 1e9;
  const BatteryState mid{0.5 * (grid.soc()[2] + grid.soc()[3]), (*grid.theta())[4]};
  CHECK(interpolate_value(grid, v, mid, 1e9, Interpolation::strict) == 1e9);
  const double blended = interpolate_value(grid, v, mid, 1e9, Interpolation::blend);
  CHECK(blended < 1e9);
  CHECK(blended == doctest::Approx(0.5 + 0.5e9));
  // zero-weight corners never matter
  CHECK(interpolate_value(grid, v, grid.node(grid.index(3, 5)), 1e9, Interpolation::strict) == 1.0);
}

TEST_CASE("stage transition examples") {
  const Powertrain pt;
  DpConfig c;
  const DpProblem problem(pt, c, 1.0);

  StageDemand coast;
  auto t = stage_transition(problem, {0.5, 25.0}, 1.0, coast);
  REQUIRE(t.feasible);
  CHECK(t.fuel == 0.0);
  CHECK(t.next.soc == 0.5);
  CHECK(t.next.theta < 25.0);
  CHECK(t.next.theta > 20.0);

  StageDemand d;
  d.shaft_torque = 100.0;
  d.wheel_torque = 600.0;
  d.shaft_speed = 200.0;
  t = stage_transition(problem, {0.5, 20.0}, 0.0, d);
  REQUIRE(t.feasible);
  CHECK(t.fuel == doctest::Approx(1.287e-3).epsilon(1e-3));
  CHECK(t.next.soc == 0.5);
  CHECK(t.next.theta == 20.0);

  // full electric drive from the bottom of the SOC box
  t = stage_transition(problem, {0.4, 20.0}, 1.0, d);
  CHECK_FALSE(t.feasible);
}

TEST_CASE("backward step examples") {
  const Powertrain pt;
  DpConfig c = coarse(Mode::two_state);
  c.control_min = 0.0;
  c.control_points = 3;
  const DpProblem problem(pt, c, 1.0);
  ValueSlice zero(problem.grid.node_count(), 0.0);

  StageDemand impossible;
  impossible.shaft_torque = 400.0;
  impossible.shaft_speed = 200.0;
  auto s = backward_step(problem, zero, impossible);
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    CHECK(s.values[n] == c.big_value);
    CHECK(s.policy[n] == Policy::kDead);
  }

  // only u = 0.5 keeps both machines within their torque limits
  StageDemand single;
  single.shaft_torque = 200.0;
  single.shaft_speed = 200.0;
  s = backward_step(problem, zero, single);
  const double fuel = fuel_rate(pt.engine, 200.0, 100.0);
  const std::size_t mid = problem.grid.index(15, 10);
  CHECK(s.values[mid] == fuel);
  CHECK(problem.controls.values[s.policy[mid]] == 0.5);
}

TEST_CASE("ties go to the larger control") {
  const Powertrain pt;
  DpConfig c = coarse(Mode::soc_only);
  const DpProblem problem(pt, c, 1.0);
  ValueSlice zero(problem.grid.node_count(), 0.0);
  StageDemand braking;
  braking.shaft_torque = -50.0;
  braking.shaft_speed = 100.0;
  const auto s = backward_step(problem, zero, braking);
  // braking sends every u to full regeneration, which overfills the top node
  std::size_t live = 0;
  for (const auto idx : s.policy) {
    if (idx == Policy::kDead) continue;
    ++live;
    CHECK(problem.controls.values[idx] == c.control_max);
  }
  CHECK(live == problem.grid.node_count() - 1);
}

TEST_CASE("one-stage problem costs that stage's fuel") {
  const Powertrain pt;
  DpConfig c;
  c.mode = Mode::soc_only;
  c.soc_points = 7;  // 0.4, 0.45, ..., 0.7
  c.control_min = 0.0;
  c.control_points = 2;
  c.initial = {0.5, 20.0};
  c.window = {0.49, 0.51, 15.0, 25.0};
  c.terminal = TerminalCost::hard;
  c.snap_transitions = true;
  const auto cycle = make_cycle(1.0, {5.0, 5.5});
  const auto sol = solve(cycle, pt, c);
  REQUIRE(sol.feasible);
  const auto d = wheel_demand(pt.vehicle, cycle, 0);
  const auto effect = control_effect(DpProblem(pt, c, 1.0), d, 0.0);
  // a small motor draw snaps back to 0.5, so the all-electric choice is free
  CHECK(sol.initial_cost == 0.0);
  CHECK(effect.fuel > 0.0);
}

TEST_CASE("unreachable terminal window reports no feasible trajectory") {
  const Powertrain pt;
  DpConfig c = coarse(Mode::soc_only);
  c.control_min = 0.0;
  c.window = {0.65, 0.7, 15.0, 25.0};
  c.terminal = TerminalCost::hard;
  c.interpolation = Interpolation::strict;
  const auto sol = solve(jn1015_head(60), pt, c);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.initial_cost == c.big_value);

  c.snap_transitions = true;
  c.interpolation = Interpolation::blend;
  CHECK_FALSE(solve(jn1015_head(60), pt, c).feasible);
  CHECK_FALSE(brute_force_solve(make_cycle(1.0, {3.0, 4.0, 4.0}), pt, c).feasible);
}

TEST_CASE("initial state outside the box is rejected") {
  DpConfig c = coarse(Mode::two_state);
  c.initial = {0.3, 20.0};
  CHECK_THROWS_AS(solve(jn1015_head(5), Powertrain{}, c), ProblemError);
}

TEST_CASE("Euler steps longer than the thermal time constant are rejected") {
  Powertrain pt;
  BatteryThermalParams t;
  t.cell_mass = 0.001;
  pt.battery = BatteryModel(BatteryElectricalParams{}, t);
  CHECK_THROWS_AS(solve(jn1015_head(5), pt, coarse(Mode::two_state)), ProblemError);
}

TEST_CASE("brute force refuses huge instances") {
  DpConfig c = coarse(Mode::soc_only);
  c.control_points = 11;
  CHECK_THROWS_AS(brute_force_solve(jn1015_head(10), Powertrain{}, c), ProblemError);
}

TEST_CASE("toy instances: solve matches exhaustive search exactly") {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int n = 0; n < 300; ++n) {
    const auto toy = testing::make_toy(rng);
    const auto sol = solve(toy.cycle, toy.powertrain, toy.config);
    const auto brute = brute_force_solve(toy.cycle, toy.powertrain, toy.config);
    CAPTURE(n);
    REQUIRE(sol.feasible == brute.feasible);
    if (!sol.feasible) continue;
    ++feasible;
    CHECK(sol.initial_cost == brute.cost);

    const auto trace = forward_simulate(sol, toy.cycle, toy.powertrain, toy.config, toy.config.initial);
    std::vector<double> stage_fuel;
    for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) stage_fuel.push_back(trace.rows[k].fuel_rate * trace.dt);
    const auto& last = trace.rows.back();
    CHECK(nested_cost(stage_fuel, terminal_value(toy.config, {last.soc, last.theta})) == brute.cost);
  }
  CHECK(feasible >= 50);
}

TEST_CASE("toy instances: one-stage problems agree") {
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 40) {
    auto toy = testing::make_toy(rng);
    toy.cycle = make_cycle(1.0, {toy.cycle.speeds[0], toy.cycle.speeds[1]});
    const auto sol = solve(toy.cycle, toy.powertrain, toy.config);
    const auto brute = brute_force_solve(toy.cycle, toy.powertrain, toy.config);
    REQUIRE(sol.feasible == brute.feasible);
    if (sol.feasible) CHECK(sol.initial_cost == brute.cost);
    ++checked;
  }
}

TEST_CASE("tightening the window or the temperature box never lowers J_0") {
  std::mt19937_64 rng(8);
  int compared = 0;
  for (int n = 0; n < 300; ++n) {
    auto toy = testing::make_toy(rng);
    toy.config.mode = Mode::two_state;
    toy.config.theta_points = 5;
    toy.config.initial.theta = 20.0;
    const auto loose = solve(toy.cycle, toy.powertrain, toy.config);
    if (!loose.feasible) continue;
    ++compared;

    auto tight = toy.config;
    tight.window.soc_min += 0.3 * (tight.window.soc_max - tight.window.soc_min);
    tight.window.theta_max -= 0.3 * (tight.window.theta_max - tight.window.theta_min);
    CHECK(solve(toy.cycle, toy.powertrain, tight).initial_cost >= loose.initial_cost);

    // nodes {15, 20, 25} are a subset of {10, 15, 20, 25, 30}
    auto boxed = toy.config;
    boxed.bounds.theta_low = 15.0;
    boxed.bounds.theta_high = 25.0;
    boxed.theta_points = 3;
    boxed.window.theta_min = std::clamp(boxed.window.theta_min, 15.0, 25.0);
    boxed.window.theta_max = std::clamp(boxed.window.theta_max, 15.0, 25.0);
    if (boxed.window.theta_min == toy.config.window.theta_min &&
        boxed.window.theta_max == toy.config.window.theta_max) {
      CHECK(solve(toy.cycle, toy.powertrain, boxed).initial_cost >= loose.initial_cost);
    }
  }
  CHECK(compared >= 30);
}

TEST_CASE("window tightening on an interpolated grid never lowers J_0") {
  const Powertrain pt;
  auto c = coarse(Mode::two_state);
  c.window = {0.45, 0.6, 12.0, 28.0};
  const auto cycle = jn1015_head(120);
  double prev = solve(cycle, pt, c).initial_cost;
  for (int step = 0; step < 4; ++step) {
    c.window.soc_min += 0.01;
    c.window.theta_max -= 1.0;
    const double j = solve(cycle, pt, c).initial_cost;
    CHECK(j >= prev);
    prev = j;
  }
}

TEST_CASE("Bellman consistency on a real cycle") {
  const Powertrain pt;
  for (const Mode mode : {Mode::soc_only, Mode::two_state}) {
    for (const auto rule : {Interpolation::blend, Interpolation::strict}) {
      auto c = coarse(mode);
      c.window = {0.5, 0.52, 15.0, 25.0};
      c.interpolation = rule;
      c.keep_values = true;
      const auto cycle = jn1015_head(80);
      const auto sol = solve(cycle, pt, c);
      const DpProblem problem(pt, c, sol.grid, sol.controls, cycle.dt);
      std::size_t live = 0;
      for (std::size_t k = 0; k < cycle.stages(); ++k) {
        const auto& jk = sol.values.slices.at(k);
        const auto& jn = sol.values.slices.at(k + 1);
        const auto demand = wheel_demand(pt.vehicle, cycle, k);
        for (std::size_t n = 0; n < jk.size(); ++n) {
          REQUIRE(jk[n] <= c.big_value);
          REQUIRE(jk[n] >= 0.0);
          const auto idx = sol.policy.index(k, n);
          if (jk[n] >= c.big_value) {
            REQUIRE(idx == Policy::kDead);
            continue;
          }
          ++live;
          const auto t = stage_transition(problem, sol.grid.node(n), sol.controls.values[idx], demand);
          REQUIRE(t.feasible);
          REQUIRE(t.fuel + interpolate_value(sol.grid, jn, t.next, c.big_value, rule) == jk[n]);
        }
      }
      CHECK(live > 0);
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  const Powertrain pt;
  auto c = coarse(Mode::two_state);
  c.window = {0.5, 0.52, 15.0, 25.0};
  c.keep_values = true;
  const auto cycle = jn1015_head(60);
  c.threads = 1;
  const auto a = solve(cycle, pt, c);
  c.threads = 4;
  const auto b = solve(cycle, pt, c);
  CHECK(a.initial_cost == b.initial_cost);
  for (std::size_t k = 0; k < cycle.stages(); ++k) {
    CHECK(a.values.slices.at(k) == b.values.slices.at(k));
    const auto pa = a.policy.stage(k), pb = b.policy.stage(k);
    CHECK(std::equal(pa.begin(), pa.end(), pb.begin()));
  }
}

TEST_CASE("value storage keeps only the requested stages") {
  auto c = coarse(Mode::soc_only);
  c.retain_stages = {3};
  const auto cycle = jn1015_head(10);
  const auto sol = solve(cycle, Powertrain{}, c);
  CHECK(sol.values.slices.size() == 3);
  CHECK(sol.values.slices.contains(0));
  CHECK(sol.values.slices.contains(3));
  CHECK(sol.values.slices.contains(9));
}

TEST_CASE("policy lookup blends corner controls and falls back to live nodes") {
  Solution s{ValueFunction{}, Policy(1, 4), StateGrid(Axis({0.4, 0.5, 0.6, 0.7}), std::nullopt, 20.0),
             ControlGrid{{0.0, 0.5, 1.0}}, 0.0, true};
  auto stage = s.policy.stage(0);
  stage[0] = 0;
  stage[1] = 2;
  stage[2] = Policy::kDead;
  stage[3] = 1;
  CHECK(*policy_control(s, 0, {0.425, 20.0}) == doctest::Approx(0.25));
  CHECK(*policy_control(s, 0, {0.5, 20.0}) == 1.0);
  // (0.5, 0.6) has a dead corner; the nearest live node is 0.5
  CHECK(*policy_control(s, 0, {0.54, 20.0}) == 1.0);
  CHECK(*policy_control(s, 0, {0.66, 20.0}) == 0.5);
  for (auto& i : stage) i = Policy::kDead;
  CHECK_FALSE(policy_control(s, 0, {0.5, 20.0}));
}

TEST_CASE("mode and option names") {
  CHECK(parse_mode("soc-only") == Mode::soc_only);
  CHECK(parse_mode("two-state") == Mode::two_state);
  CHECK_FALSE(parse_mode("three-state"));
  CHECK(to_string(Mode::soc_only) == "soc-only");
  CHECK(parse_terminal_cost("hard") == TerminalCost::hard);
  CHECK(parse_interpolation("strict") == Interpolation::strict);
  CHECK_FALSE(parse_interpolation("cubic"));
}

TEST_CASE("nested cost sums last to first") {
  const std::vector<double> c{1e16, 1.0, -1e16};
  CHECK(nested_cost(c) == 1e16 + (1.0 + -1e16));
  CHECK(nested_cost(c, 2.0) == 1e16 + (1.0 + (-1e16 + 2.0)));
  CHECK(nested_cost({}) == 0.0);
}

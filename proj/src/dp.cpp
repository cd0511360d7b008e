#include "hevdp/dp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/core.h>

namespace hevdp {

void Powertrain::validate() const {
  vehicle.validate();
  engine.validate();
  motor.validate();
  battery.electrical.validate();
  battery.thermal.validate();
}

std::string_view to_string(Mode mode) { return mode == Mode::soc_only ? "soc-only" : "two-state"; }

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "soc-only" || text == "soc_only") return Mode::soc_only;
  if (text == "two-state" || text == "two_state") return Mode::two_state;
  return std::nullopt;
}

std::optional<TerminalCost> parse_terminal_cost(std::string_view text) {
  if (text == "hard") return TerminalCost::hard;
  if (text == "penalty") return TerminalCost::penalty;
  return std::nullopt;
}

std::optional<Interpolation> parse_interpolation(std::string_view text) {
  if (text == "blend") return Interpolation::blend;
  if (text == "strict") return Interpolation::strict;
  return std::nullopt;
}

std::string_view to_string(TerminalCost t) { return t == TerminalCost::hard ? "hard" : "penalty"; }
std::string_view to_string(Interpolation i) { return i == Interpolation::blend ? "blend" : "strict"; }

bool TerminalWindow::contains(BatteryState x, Mode mode) const {
  const bool soc_ok = x.soc >= soc_min && x.soc <= soc_max;
  if (mode == Mode::soc_only) return soc_ok;
  return soc_ok && x.theta >= theta_min && x.theta <= theta_max;
}

void DpConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(bounds.soc_low < bounds.soc_high)) fail("soc bounds inverted");
  if (bounds.soc_low < 0.0 || bounds.soc_high > 1.0) fail("soc bounds must lie in [0, 1]");
  if (!(bounds.theta_low < bounds.theta_high)) fail("theta bounds inverted");
  if (soc_points < 2) fail("dp.soc_points must be >= 2");
  if (mode == Mode::two_state && theta_points < 2) fail("dp.theta_points must be >= 2");
  if (control_points < 2) fail("dp.control_points must be >= 2");
  if (control_min > 0.0 || control_max < 1.0) fail("control box must contain [0, 1]");
  if (!(big_value > 0.0) || !std::isfinite(big_value)) fail("dp.big_value must be finite and > 0");
  if (!(terminal_soc_penalty >= 0.0) || !(terminal_theta_penalty >= 0.0)) fail("terminal penalties must be >= 0");
  if (window.soc_min > window.soc_max || window.theta_min > window.theta_max) fail("terminal window inverted");
  if (window.soc_min < bounds.soc_low || window.soc_max > bounds.soc_high) fail("soc window outside soc bounds");
  if (mode == Mode::two_state && (window.theta_min < bounds.theta_low || window.theta_max > bounds.theta_high)) {
    fail("theta window outside theta bounds");
  }
}

StateGrid::StateGrid(Axis soc, std::optional<Axis> theta, double held_theta)
    : soc_(std::move(soc)), theta_(std::move(theta)), held_theta_(held_theta) {}

BatteryState StateGrid::node(std::size_t i_soc, std::size_t j_theta) const {
  return {soc_[i_soc], theta_ ? (*theta_)[j_theta] : held_theta_};
}

BatteryState StateGrid::snap(BatteryState x) const {
  BatteryState s{soc_[soc_.nearest(x.soc)], held_theta_};
  if (theta_) s.theta = (*theta_)[theta_->nearest(x.theta)];
  return s;
}

bool StateGrid::contains(BatteryState x) const {
  return soc_.contains(x.soc) && (!theta_ || theta_->contains(x.theta));
}

std::pair<StateGrid, ControlGrid> build_grids(const DpConfig& config) {
  config.validate();
  std::optional<Axis> theta;
  if (config.mode == Mode::two_state) {
    theta = Axis::uniform(config.bounds.theta_low, config.bounds.theta_high, config.theta_points);
  }
  StateGrid grid(Axis::uniform(config.bounds.soc_low, config.bounds.soc_high, config.soc_points), std::move(theta),
                 config.initial.theta);

  const Axis control_axis = Axis::uniform(config.control_min, config.control_max, config.control_points);
  ControlGrid controls{{control_axis.points().begin(), control_axis.points().end()}};
  for (const double required : {0.0, 1.0}) {
    if (std::find(controls.values.begin(), controls.values.end(), required) == controls.values.end()) {
      controls.values.insert(std::lower_bound(controls.values.begin(), controls.values.end(), required), required);
    }
  }
  if (controls.values.size() >= Policy::kDead) throw std::invalid_argument("too many control points");
  return {std::move(grid), std::move(controls)};
}

double terminal_value(const DpConfig& config, BatteryState x) {
  const auto& w = config.window;
  if (w.contains(x, config.mode)) return 0.0;
  if (config.terminal == TerminalCost::hard) return config.big_value;
  const double d_soc = std::max({0.0, w.soc_min - x.soc, x.soc - w.soc_max});
  const double d_theta =
      config.mode == Mode::two_state ? std::max({0.0, w.theta_min - x.theta, x.theta - w.theta_max}) : 0.0;
  return std::min(config.big_value, config.terminal_soc_penalty * d_soc + config.terminal_theta_penalty * d_theta);
}

ValueSlice terminal_cost(const StateGrid& grid, const DpConfig& config) {
  ValueSlice j(grid.node_count());
  for (std::size_t n = 0; n < j.size(); ++n) j[n] = terminal_value(config, grid.node(n));
  return j;
}

namespace {

// Blend of up to four corners. Zero-weight corners are never read.
inline double blend(std::span<const double> slice, std::size_t theta_count, Axis::Bracket s, Axis::Bracket t,
                    double big, bool strict) {
  const std::size_t base = s.index * theta_count + t.index;
  const double ws0 = 1.0 - s.weight, ws1 = s.weight;
  const double wt0 = 1.0 - t.weight, wt1 = t.weight;
  const double v00 = slice[base];
  const double v01 = wt1 > 0.0 ? slice[base + 1] : 0.0;
  const double v10 = ws1 > 0.0 ? slice[base + theta_count] : 0.0;
  const double v11 = ws1 > 0.0 && wt1 > 0.0 ? slice[base + theta_count + 1] : 0.0;
  if (strict && ((ws0 > 0.0 && wt0 > 0.0 && v00 >= big) || (ws0 > 0.0 && wt1 > 0.0 && v01 >= big) ||
      (ws1 > 0.0 && wt0 > 0.0 && v10 >= big) || (ws1 > 0.0 && wt1 > 0.0 && v11 >= big))) {
    return big;
  }
  const double lo = wt0 * v00 + wt1 * v01;
  const double hi = wt0 * v10 + wt1 * v11;
  return std::min(big, ws0 * lo + ws1 * hi);
}

inline double blend_1d(std::span<const double> slice, Axis::Bracket s, double big, bool strict) {
  const double w0 = 1.0 - s.weight, w1 = s.weight;
  const double v0 = slice[s.index];
  const double v1 = w1 > 0.0 ? slice[s.index + 1] : 0.0;
  if (strict && ((w0 > 0.0 && v0 >= big) || (w1 > 0.0 && v1 >= big))) return big;
  return std::min(big, w0 * v0 + w1 * v1);
}

}  // namespace

double interpolate_value(const StateGrid& grid, std::span<const double> slice, BatteryState x, double big_value,
                         Interpolation rule) {
  const bool strict = rule == Interpolation::strict;
  const auto s = grid.soc().bracket(x.soc);
  if (!grid.two_state()) return blend_1d(slice, s, big_value, strict);
  return blend(slice, grid.theta_count(), s, grid.theta()->bracket(x.theta), big_value, strict);
}

DpProblem::DpProblem(Powertrain p, DpConfig c, double step)
    : DpProblem(std::move(p), c, build_grids(c), step) {}

DpProblem::DpProblem(Powertrain p, DpConfig c, std::pair<StateGrid, ControlGrid> grids, double step)
    : DpProblem(std::move(p), std::move(c), std::move(grids.first), std::move(grids.second), step) {}

DpProblem::DpProblem(Powertrain p, DpConfig c, StateGrid g, ControlGrid u, double step)
    : powertrain(std::move(p)), config(std::move(c)), grid(std::move(g)), controls(std::move(u)), dt(step) {
  if (!(dt > 0.0)) throw std::invalid_argument("stage length must be > 0");
}

bool DpProblem::in_box(BatteryState x) const {
  const auto& b = config.bounds;
  if (x.soc < b.soc_low || x.soc > b.soc_high) return false;
  if (config.mode == Mode::soc_only) return true;
  return x.theta >= b.theta_low && x.theta <= b.theta_high;
}

ControlEffect control_effect(const DpProblem& problem, const StageDemand& demand, double u) {
  const auto& pt = problem.powertrain;
  ControlEffect e;
  e.split = split_torque(demand, u, pt.motor, pt.engine);
  e.feasible = e.split.feasible;
  if (!e.feasible) return e;
  e.motor_power = motor_electrical_power(pt.motor, demand.shaft_speed, e.split.motor);
  e.fuel = fuel_rate(pt.engine, demand.shaft_speed, e.split.engine) * problem.dt;
  return e;
}

Transition apply_effect(const DpProblem& problem, BatteryState node, const ControlEffect& effect) {
  Transition t;
  t.effect = effect;
  t.fuel = effect.fuel;
  if (!effect.feasible) return t;
  const auto& battery = problem.powertrain.battery;
  const auto e = electrical_step(battery, node.soc, effect.motor_power, problem.dt);
  if (!e) return t;
  t.current = e->current;
  t.terminal_voltage = e->terminal_voltage;
  t.next.soc = e->next_soc;
  t.next.theta = problem.config.mode == Mode::two_state
                     ? thermal_step(battery, node.theta, e->current, e->joule_resistance, problem.dt)
                     : node.theta;
  t.feasible = problem.in_box(t.next);
  if (t.feasible && problem.config.snap_transitions) t.next = problem.grid.snap(t.next);
  return t;
}

Transition stage_transition(const DpProblem& problem, BatteryState node, double u, const StageDemand& demand) {
  return apply_effect(problem, node, control_effect(problem, demand, u));
}

namespace {

struct RowControl {
  bool feasible = false;
  double fuel = 0.0;
  double current = 0.0;
  double joule_resistance = 0.0;
  Axis::Bracket soc_bracket{0, 0.0};
};

// Fills nodes of SOC rows [row_begin, row_end).
void backward_rows(const DpProblem& problem, std::span<const double> next, std::span<const ControlEffect> effects,
                   std::span<const std::uint8_t> distinct, StageSolution& out, std::size_t row_begin,
                   std::size_t row_end) {
  const auto& grid = problem.grid;
  const auto& battery = problem.powertrain.battery;
  const auto& bounds = problem.config.bounds;
  const double big = problem.config.big_value;
  const double dt = problem.dt;
  const bool snap = problem.config.snap_transitions;
  const bool strict = problem.config.interpolation == Interpolation::strict;
  const std::size_t nu = effects.size();
  const std::size_t nt = grid.theta_count();
  std::vector<RowControl> row(nu);

  for (std::size_t i = row_begin; i < row_end; ++i) {
    const double soc = grid.soc()[i];
    for (std::size_t c = 0; c < nu; ++c) {
      RowControl& rc = row[c];
      rc.feasible = false;
      if (!distinct[c] || !effects[c].feasible) continue;
      const auto e = electrical_step(battery, soc, effects[c].motor_power, dt);
      if (!e) continue;
      double next_soc = e->next_soc;
      if (next_soc < bounds.soc_low || next_soc > bounds.soc_high) continue;
      if (snap) next_soc = grid.soc()[grid.soc().nearest(next_soc)];
      rc.feasible = true;
      rc.fuel = effects[c].fuel;
      rc.current = e->current;
      rc.joule_resistance = e->joule_resistance;
      rc.soc_bracket = grid.soc().bracket(next_soc);
    }

    for (std::size_t j = 0; j < nt; ++j) {
      const std::size_t node = grid.index(i, j);
      double best = big;
      std::uint16_t arg = Policy::kDead;
      // descending u so that strict improvement keeps the larger u on ties
      for (std::size_t c = nu; c-- > 0;) {
        const RowControl& rc = row[c];
        if (!rc.feasible) continue;
        double jn;
        if (grid.two_state()) {
          const double theta = (*grid.theta())[j];
          double next_theta = thermal_step(battery, theta, rc.current, rc.joule_resistance, dt);
          if (next_theta < bounds.theta_low || next_theta > bounds.theta_high) continue;
          if (snap) next_theta = (*grid.theta())[grid.theta()->nearest(next_theta)];
          jn = blend(next, nt, rc.soc_bracket, grid.theta()->bracket(next_theta), big, strict);
        } else {
          jn = blend_1d(next, rc.soc_bracket, big, strict);
        }
        if (jn >= big) continue;
        const double cost = rc.fuel + jn;
        if (cost < best) {
          best = cost;
          arg = static_cast<std::uint16_t>(c);
        }
      }
      out.values[node] = best;
      out.policy[node] = arg;
    }
  }
}

unsigned worker_count(const DpConfig& config, std::size_t rows) {
  unsigned n = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, rows));
}

}  // namespace

StageSolution backward_step(const DpProblem& problem, std::span<const double> next_values, const StageDemand& demand) {
  const auto& u = problem.controls.values;
  const std::size_t nu = u.size();
  std::vector<ControlEffect> effects(nu);
  for (std::size_t c = 0; c < nu; ++c) effects[c] = control_effect(problem, demand, u[c]);

  // A control whose motor power and fuel match the next larger control's leads
  // to the same successor and cost; the larger one already wins that tie.
  std::vector<std::uint8_t> distinct(nu, 1);
  for (std::size_t c = 0; c + 1 < nu; ++c) {
    const auto& a = effects[c];
    const auto& b = effects[c + 1];
    if (a.feasible && b.feasible && a.motor_power == b.motor_power && a.fuel == b.fuel) distinct[c] = 0;
  }

  StageSolution out;
  out.values.assign(problem.grid.node_count(), problem.config.big_value);
  out.policy.assign(problem.grid.node_count(), Policy::kDead);

  const std::size_t rows = problem.grid.soc_count();
  const unsigned workers = worker_count(problem.config, rows);
  if (workers <= 1) {
    backward_rows(problem, next_values, effects, distinct, out, 0, rows);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = rows * w / workers;
    const std::size_t end = rows * (w + 1) / workers;
    pool.emplace_back([&, begin, end] { backward_rows(problem, next_values, effects, distinct, out, begin, end); });
  }
  return out;  // jthreads join before `out` is moved
}

Solution solve(const DriveCycle& cycle, const Powertrain& powertrain, const DpConfig& config) {
  powertrain.validate();
  auto [grid, controls] = build_grids(config);
  DpProblem problem(powertrain, config, grid, controls, cycle.dt);

  BatteryState x0 = config.initial;
  if (!problem.in_box(x0)) {
    throw ProblemError(fmt::format("initial state (soc {}, theta {}) outside the state bounds", x0.soc, x0.theta));
  }
  if (config.snap_transitions) x0 = problem.grid.snap(x0);

  const double tau = thermal_time_constant(powertrain.battery);
  if (!(cycle.dt < tau)) {
    throw ProblemError(fmt::format("thermal time constant {:.4g} s is not longer than the stage length {} s", tau,
                                   cycle.dt));
  }

  const std::size_t stages = cycle.stages();
  Solution sol{ValueFunction{config.big_value, {}}, Policy(stages, grid.node_count()), problem.grid,
               problem.controls, 0.0, false};
  const auto retain = [&](std::size_t k) {
    return config.keep_values || k == 0 || k == stages ||
           std::find(config.retain_stages.begin(), config.retain_stages.end(), k) != config.retain_stages.end();
  };

  ValueSlice next = terminal_cost(problem.grid, config);
  if (retain(stages)) sol.values.slices[stages] = next;
  for (std::size_t k = stages; k-- > 0;) {
    auto step = backward_step(problem, next, wheel_demand(powertrain.vehicle, cycle, k));
    std::copy(step.policy.begin(), step.policy.end(), sol.policy.stage(k).begin());
    next = std::move(step.values);
    if (retain(k)) sol.values.slices[k] = next;
  }
  sol.initial_cost = interpolate_value(problem.grid, next, x0, config.big_value, config.interpolation);
  sol.feasible = sol.initial_cost < config.big_value;
  return sol;
}

Solution solve_soc_only(const DriveCycle& cycle, const Powertrain& powertrain, DpConfig config) {
  config.mode = Mode::soc_only;
  return solve(cycle, powertrain, config);
}

std::optional<double> policy_control(const Solution& solution, std::size_t k, BatteryState x) {
  const auto& grid = solution.grid;
  const auto& u = solution.controls.values;
  const auto stage = solution.policy.stage(k);

  const auto s = grid.soc().bracket(x.soc);
  const Axis::Bracket t = grid.two_state() ? grid.theta()->bracket(x.theta) : Axis::Bracket{0, 0.0};
  const std::size_t nt = grid.theta_count();

  struct Corner {
    std::size_t node;
    double weight;
  };
  std::array<Corner, 4> corners{};
  std::size_t count = 0;
  for (std::size_t ds = 0; ds < 2; ++ds) {
    const double ws = ds == 0 ? 1.0 - s.weight : s.weight;
    if (!(ws > 0.0)) continue;
    for (std::size_t dt = 0; dt < 2; ++dt) {
      const double wt = dt == 0 ? 1.0 - t.weight : t.weight;
      if (!(wt > 0.0)) continue;
      corners[count++] = {(s.index + ds) * nt + (t.index + dt), ws * wt};
    }
  }

  bool all_live = true;
  for (std::size_t c = 0; c < count; ++c) all_live = all_live && stage[corners[c].node] != Policy::kDead;
  if (all_live) {
    double blended = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t c = 0; c < count; ++c) {
      const double uc = u[stage[corners[c].node]];
      blended += corners[c].weight * uc;
      lo = std::min(lo, uc);
      hi = std::max(hi, uc);
    }
    // rounding in the weights can push the sum just past the corner range
    return std::clamp(blended, lo, hi);
  }

  // nearest live node, distance measured in grid cells
  const double fs = static_cast<double>(s.index) + s.weight;
  const double ft = static_cast<double>(t.index) + t.weight;
  double best_d = std::numeric_limits<double>::infinity();
  std::optional<double> best;
  for (std::size_t n = 0; n < stage.size(); ++n) {
    if (stage[n] == Policy::kDead) continue;
    const double di = static_cast<double>(n / nt) - fs;
    const double dj = static_cast<double>(n % nt) - ft;
    const double d = di * di + dj * dj;
    if (d < best_d) {
      best_d = d;
      best = u[stage[n]];
    }
  }
  return best;
}

double nested_cost(std::span<const double> stage_costs, double terminal) {
  double acc = terminal;
  for (std::size_t k = stage_costs.size(); k-- > 0;) acc = stage_costs[k] + acc;
  return acc;
}

}  // namespace hevdp

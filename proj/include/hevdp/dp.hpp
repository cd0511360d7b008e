#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "hevdp/battery.hpp"
#include "hevdp/cycle.hpp"
#include "hevdp/grid.hpp"
#include "hevdp/vehicle.hpp"

namespace hevdp {

/// Everything the stage transition needs besides the state and the control.
struct Powertrain {
  VehicleParams vehicle;
  EngineModel engine;
  MotorModel motor;
  BatteryModel battery;

  void validate() const;
};

/// soc_only drops temperature from the optimization (it is held at the
/// initial value); two_state optimizes over (soc, theta).
enum class Mode { soc_only, two_state };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

struct StateBounds {
  double soc_low = 0.4;
  double soc_high = 0.7;
  double theta_low = 10.0;   // degC
  double theta_high = 30.0;  // degC
};

/// Target set for the final state. theta limits are ignored in soc_only mode.
struct TerminalWindow {
  double soc_min = 0.54;
  double soc_max = 0.55;
  double theta_min = 15.0;
  double theta_max = 25.0;

  bool contains(BatteryState x, Mode mode) const;
};

/// hard: big_value outside the terminal window. penalty: a cost linear in the
/// distance to the window, which keeps the window reachable through
/// interpolation when a stage moves the state by much less than a grid cell.
enum class TerminalCost { hard, penalty };

/// blend: plain weighted average of the corners, big_value included.
/// strict: any weighted corner at big_value makes the result big_value.
enum class Interpolation { blend, strict };

std::optional<TerminalCost> parse_terminal_cost(std::string_view text);
std::optional<Interpolation> parse_interpolation(std::string_view text);
std::string_view to_string(TerminalCost t);
std::string_view to_string(Interpolation i);

struct DpConfig {
  Mode mode = Mode::two_state;
  StateBounds bounds;
  TerminalWindow window;
  BatteryState initial{0.5, 20.0};
  std::size_t soc_points = 201;
  std::size_t theta_points = 101;
  std::size_t control_points = 51;
  double control_min = -1.0;
  double control_max = 1.0;
  double big_value = 1e9;  // kg, cost of infeasible states and controls
  TerminalCost terminal = TerminalCost::penalty;
  double terminal_soc_penalty = 1000.0;   // kg per unit SOC outside the window
  double terminal_theta_penalty = 10.0;   // kg per K outside the window
  Interpolation interpolation = Interpolation::blend;
  /// Round every successor state to its nearest grid node (exact-arithmetic
  /// verification mode).
  bool snap_transitions = false;
  /// Keep every cost-to-go slice instead of only stage 0 and `retain_stages`.
  bool keep_values = false;
  std::vector<std::size_t> retain_stages;
  unsigned threads = 0;  // 0: one per hardware thread

  void validate() const;
};

/// Node set of the discretized state space. In soc_only mode there is no
/// temperature axis and every node carries `held_theta`.
class StateGrid {
 public:
  StateGrid(Axis soc, std::optional<Axis> theta, double held_theta);

  const Axis& soc() const { return soc_; }
  const std::optional<Axis>& theta() const { return theta_; }
  bool two_state() const { return theta_.has_value(); }
  double held_theta() const { return held_theta_; }

  std::size_t soc_count() const { return soc_.size(); }
  std::size_t theta_count() const { return theta_ ? theta_->size() : 1; }
  std::size_t node_count() const { return soc_count() * theta_count(); }
  std::size_t index(std::size_t i_soc, std::size_t j_theta) const { return i_soc * theta_count() + j_theta; }
  BatteryState node(std::size_t i_soc, std::size_t j_theta) const;
  BatteryState node(std::size_t index) const { return node(index / theta_count(), index % theta_count()); }

  BatteryState snap(BatteryState x) const;
  bool contains(BatteryState x) const;

 private:
  Axis soc_;
  std::optional<Axis> theta_;
  double held_theta_;
};

struct ControlGrid {
  std::vector<double> values;  // ascending, contains 0 and 1 exactly
};

std::pair<StateGrid, ControlGrid> build_grids(const DpConfig& config);

/// Cost-to-go over all nodes of a grid, indexed by StateGrid::index.
using ValueSlice = std::vector<double>;

/// Terminal cost of a single state, capped at big_value.
double terminal_value(const DpConfig& config, BatteryState x);
ValueSlice terminal_cost(const StateGrid& grid, const DpConfig& config);

/// Bilinear (linear in soc_only mode) interpolation of a value slice, capped
/// at big_value.
double interpolate_value(const StateGrid& grid, std::span<const double> slice, BatteryState x, double big_value,
                         Interpolation rule = Interpolation::blend);

/// Grid, controls, models, and settings shared by the solver, the brute-force
/// oracle, and the forward simulation.
struct DpProblem {
  Powertrain powertrain;
  DpConfig config;
  StateGrid grid;
  ControlGrid controls;
  double dt;

  DpProblem(Powertrain p, DpConfig c, double dt);
  DpProblem(Powertrain p, DpConfig c, StateGrid g, ControlGrid u, double dt);

  bool in_box(BatteryState x) const;

 private:
  DpProblem(Powertrain p, DpConfig c, std::pair<StateGrid, ControlGrid> grids, double dt);
};

/// State-independent part of a stage: torque split, motor power, fuel.
struct ControlEffect {
  TorqueSplit split;
  double motor_power = 0.0;  // W
  double fuel = 0.0;         // kg over the stage
  bool feasible = false;
};

ControlEffect control_effect(const DpProblem& problem, const StageDemand& demand, double u);

struct Transition {
  BatteryState next;
  double fuel = 0.0;  // kg
  bool feasible = false;
  ControlEffect effect;
  double current = 0.0;
  double terminal_voltage = 0.0;
};

/// Applies a precomputed control effect to a node.
Transition apply_effect(const DpProblem& problem, BatteryState node, const ControlEffect& effect);

/// One stage of the discrete dynamics, including the state-box check and
/// snapping when enabled.
Transition stage_transition(const DpProblem& problem, BatteryState node, double u, const StageDemand& demand);

/// Per-stage optimal control as indices into the control grid.
class Policy {
 public:
  static constexpr std::uint16_t kDead = 0xFFFF;

  Policy() = default;
  Policy(std::size_t stages, std::size_t nodes) : nodes_(nodes), index_(stages * nodes, kDead) {}

  std::size_t stages() const { return nodes_ == 0 ? 0 : index_.size() / nodes_; }
  std::size_t nodes() const { return nodes_; }
  std::uint16_t index(std::size_t k, std::size_t node) const { return index_[k * nodes_ + node]; }
  std::span<std::uint16_t> stage(std::size_t k) { return {index_.data() + k * nodes_, nodes_}; }
  std::span<const std::uint16_t> stage(std::size_t k) const { return {index_.data() + k * nodes_, nodes_}; }

 private:
  std::size_t nodes_ = 0;
  std::vector<std::uint16_t> index_;
};

struct ValueFunction {
  double big_value = 1e9;
  std::map<std::size_t, ValueSlice> slices;  // stage -> cost-to-go
};

struct StageSolution {
  ValueSlice values;
  std::vector<std::uint16_t> policy;
};

/// Bellman update for one stage. Ties go to the larger control.
StageSolution backward_step(const DpProblem& problem, std::span<const double> next_values, const StageDemand& demand);

struct Solution {
  ValueFunction values;
  Policy policy;
  StateGrid grid;
  ControlGrid controls;
  double initial_cost = 0.0;  // kg, interpolated at the initial state
  bool feasible = false;      // initial_cost < big_value
};

/// Thrown for inputs the solver cannot start from (initial state outside the
/// state box, instance too large for enumeration).
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Solution solve(const DriveCycle& cycle, const Powertrain& powertrain, const DpConfig& config);
Solution solve_soc_only(const DriveCycle& cycle, const Powertrain& powertrain, DpConfig config);

/// Optimal control read off the policy at a continuous state: bilinear blend
/// of the surrounding nodes' controls, or the nearest live node's control when
/// a weighted corner is dead. nullopt when the whole stage is dead.
std::optional<double> policy_control(const Solution& solution, std::size_t k, BatteryState x);

struct BruteForceResult {
  bool feasible = false;
  double cost = 0.0;              // kg
  std::vector<double> controls;  // one per stage
};

inline constexpr double kMaxEnumeratedSequences = 1e7;

/// Exhaustive search over control sequences using the same transition (and
/// snapping) as `solve`. Throws ProblemError above kMaxEnumeratedSequences.
BruteForceResult brute_force_solve(const DriveCycle& cycle, const Powertrain& powertrain, const DpConfig& config);

/// Sums per-stage costs last-to-first onto `terminal`, the order the Bellman
/// recursion uses.
double nested_cost(std::span<const double> stage_costs, double terminal = 0.0);

}  // namespace hevdp

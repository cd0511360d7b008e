#pragma once

#include <cstddef>
#include <variant>

#include "hevdp/cycle.hpp"
#include "hevdp/grid.hpp"

namespace hevdp {

inline constexpr double kGravity = 9.81;  // m/s^2

/// Longitudinal vehicle parameters. Defaults describe the reference compact
/// parallel hybrid (1800 kg, 0.3 m wheels, 144 N rolling, 0.48 N s^2/m^2).
struct VehicleParams {
  double mass = 1800.0;               // kg
  double wheel_radius = 0.3;          // m
  double rolling_force = 144.0;       // N, applied only while moving
  double aero_coeff = 0.48;           // N s^2/m^2, F_a = c v^2
  double grade_angle = 0.0;           // rad
  double disturbance_force = 0.0;     // N
  double gear_ratio = 6.0;            // shaft speed / wheel speed
  double driveline_efficiency = 1.0;  // (0, 1]

  void validate() const;
};

/// Efficiency that is either constant or looked up on a (torque, speed) map.
class EfficiencyMap {
 public:
  EfficiencyMap(double constant);  // NOLINT(google-explicit-constructor)
  explicit EfficiencyMap(Table2D map);

  /// Throws std::domain_error for queries outside a gridded map.
  double operator()(double speed, double torque) const;
  bool gridded() const { return std::holds_alternative<Table2D>(map_); }
  /// Smallest and largest stored efficiency.
  double min() const;
  double max() const;

 private:
  std::variant<double, Table2D> map_;
};

struct EngineModel {
  double max_torque = 199.0;  // N m
  double max_speed = 503.0;   // rad/s
  EfficiencyMap efficiency{0.35};
  double lower_heating_value = 44.4e6;  // J/kg
  double idle_fuel_rate = 0.0;          // kg/s while delivering zero torque

  void validate() const;
};

struct MotorModel {
  double max_torque = 133.0;  // N m
  double max_speed = 600.0;   // rad/s
  EfficiencyMap efficiency{0.9};

  void validate() const;
};

/// Per-stage demand. wheel_torque is the torque at the wheels; shaft_torque is
/// the same demand referred through the gear (and driveline losses) to the
/// common engine/motor shaft that turns at shaft_speed. The torque split acts
/// on shaft_torque.
struct StageDemand {
  double wheel_torque = 0.0;  // N m
  double shaft_torque = 0.0;  // N m
  double shaft_speed = 0.0;   // rad/s
  std::size_t step = 0;
};

struct TorqueSplit {
  double motor = 0.0;   // N m, negative when generating
  double engine = 0.0;  // N m
  double brake = 0.0;   // N m, friction brake share (<= 0)
  bool feasible = true;
};

double resistive_force(const VehicleParams& params, double speed);

StageDemand wheel_demand(const VehicleParams& params, const DriveCycle& cycle, std::size_t k);

/// Traction (shaft_torque > 0): motor takes u of the demand, the engine the
/// rest. Braking (shaft_torque <= 0): the motor regenerates up to its limit and
/// friction brakes absorb the remainder; u is ignored. Limit violations are
/// reported through `feasible`, never thrown.
TorqueSplit split_torque(const StageDemand& demand, double u, const MotorModel& motor, const EngineModel& engine);

/// Fuel mass flow in kg/s.
double fuel_rate(const EngineModel& engine, double speed, double torque);

/// Electrical power drawn by the motor (negative when generating).
double motor_electrical_power(const MotorModel& motor, double speed, double torque);

}  // namespace hevdp

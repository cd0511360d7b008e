#include "hevdp/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace hevdp {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void VehicleParams::validate() const {
  require(mass > 0.0, "vehicle.mass must be > 0");
  require(wheel_radius > 0.0, "vehicle.wheel_radius must be > 0");
  require(gear_ratio > 0.0, "vehicle.gear_ratio must be > 0");
  require(driveline_efficiency > 0.0 && driveline_efficiency <= 1.0, "vehicle.driveline_efficiency must be in (0, 1]");
  require(rolling_force >= 0.0 && aero_coeff >= 0.0, "vehicle resistance coefficients must be >= 0");
}

EfficiencyMap::EfficiencyMap(double constant) : map_(constant) {}

EfficiencyMap::EfficiencyMap(Table2D map) : map_(std::move(map)) {}

double EfficiencyMap::operator()(double speed, double torque) const {
  if (const auto* c = std::get_if<double>(&map_)) return *c;
  // maps are stored torque-major: rows are torque breakpoints
  return std::get<Table2D>(map_)(torque, speed);
}

double EfficiencyMap::min() const {
  if (const auto* c = std::get_if<double>(&map_)) return *c;
  const auto v = std::get<Table2D>(map_).values();
  return *std::min_element(v.begin(), v.end());
}

double EfficiencyMap::max() const {
  if (const auto* c = std::get_if<double>(&map_)) return *c;
  const auto v = std::get<Table2D>(map_).values();
  return *std::max_element(v.begin(), v.end());
}

void EngineModel::validate() const {
  require(max_torque > 0.0 && max_speed > 0.0, "engine limits must be > 0");
  require(efficiency.min() > 0.0 && efficiency.max() < 1.0, "engine efficiency must lie in (0, 1)");
  require(lower_heating_value > 0.0, "engine.lower_heating_value must be > 0");
  require(idle_fuel_rate >= 0.0, "engine.idle_fuel_rate must be >= 0");
}

void MotorModel::validate() const {
  require(max_torque > 0.0 && max_speed > 0.0, "motor limits must be > 0");
  require(efficiency.min() > 0.0 && efficiency.max() < 1.0, "motor efficiency must lie in (0, 1)");
}

double resistive_force(const VehicleParams& params, double speed) {
  const double rolling = speed > 0.0 ? params.rolling_force : 0.0;
  return rolling + params.aero_coeff * speed * speed + params.mass * kGravity * std::sin(params.grade_angle) +
         params.disturbance_force;
}

StageDemand wheel_demand(const VehicleParams& params, const DriveCycle& cycle, std::size_t k) {
  const double v = cycle.speeds.at(k);
  const double traction = params.mass * accel_at(cycle, k) + resistive_force(params, v);
  StageDemand d;
  d.step = k;
  d.wheel_torque = traction * params.wheel_radius;
  d.shaft_speed = params.gear_ratio * v / params.wheel_radius;
  d.shaft_torque = d.wheel_torque > 0.0 ? d.wheel_torque / (params.gear_ratio * params.driveline_efficiency)
                                        : d.wheel_torque * params.driveline_efficiency / params.gear_ratio;
  return d;
}

TorqueSplit split_torque(const StageDemand& demand, double u, const MotorModel& motor, const EngineModel& engine) {
  const double demanded = demand.shaft_torque;
  TorqueSplit s;
  if (demanded > 0.0) {
    // The larger share comes from the product and the smaller one from the
    // difference, which keeps motor + engine == demanded exact.
    if (u >= 0.5) {
      s.motor = u * demanded;
      s.engine = demanded - s.motor;
    } else {
      s.engine = (1.0 - u) * demanded;
      s.motor = demanded - s.engine;
    }
  } else {
    s.motor = std::max(demanded, -motor.max_torque);
    s.brake = demanded - s.motor;
  }
  const double w = demand.shaft_speed;
  s.feasible = std::abs(s.motor) <= motor.max_torque && s.engine >= 0.0 && s.engine <= engine.max_torque &&
               w <= motor.max_speed && w <= engine.max_speed;
  return s;
}

double fuel_rate(const EngineModel& engine, double speed, double torque) {
  if (torque == 0.0) return engine.idle_fuel_rate;
  const double eta = engine.efficiency(speed, torque);
  return torque * speed / eta / engine.lower_heating_value;
}

double motor_electrical_power(const MotorModel& motor, double speed, double torque) {
  const double mechanical = torque * speed;
  if (mechanical == 0.0) return 0.0;
  const double eta = motor.efficiency(speed, std::abs(torque));
  return mechanical > 0.0 ? mechanical / eta : mechanical * eta;
}

}  // namespace hevdp

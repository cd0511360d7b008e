#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "hevdp/dp.hpp"

namespace hevdp {

/// One row per stage (state at the start of the stage and the control applied
/// during it) plus a terminal row carrying the final state. `demand_torque` is
/// the shaft-referred demand that the split divides, so motor + engine + brake
/// equals it exactly. `fuel` is the cumulative fuel burnt before the row's time.
struct TraceRow {
  double time = 0.0;           // s
  double speed = 0.0;          // m/s
  double demand_torque = 0.0;  // N m
  double u = 0.0;
  double motor_torque = 0.0;   // N m
  double engine_torque = 0.0;  // N m
  double brake_torque = 0.0;   // N m
  double motor_power = 0.0;    // W
  double current = 0.0;        // A
  double voltage = 0.0;        // V
  double soc = 0.0;
  double theta = 0.0;          // degC
  double fuel_rate = 0.0;      // kg/s
  double fuel = 0.0;           // kg
};

struct Trace {
  double dt = 1.0;
  double distance = 0.0;  // m, same rule as CycleStats
  std::vector<TraceRow> rows;

  double total_fuel() const { return rows.empty() ? 0.0 : rows.back().fuel; }
  /// Stage fuel masses summed last-to-first, matching the cost-to-go recursion.
  double nested_fuel() const;
};

/// Raised when the rollout leaves what the policy certified. stage() is the
/// stage index at which it happened.
class RolloutFault : public std::runtime_error {
 public:
  RolloutFault(const std::string& what, std::size_t stage) : std::runtime_error(what), stage_(stage) {}
  std::size_t stage() const { return stage_; }

 private:
  std::size_t stage_;
};

/// Rolls the policy forward from x0 with continuous states (snapped only when
/// the configuration asks for it). Temperature is always integrated; the
/// temperature bounds are enforced only in two-state mode.
Trace forward_simulate(const Solution& solution, const DriveCycle& cycle, const Powertrain& powertrain,
                       const DpConfig& config, BatteryState x0);

/// Fuel consumption in L/100 km.
double fuel_per_100km(const Trace& trace, double fuel_density);

struct ThermalReplay {
  std::vector<double> theta;  // one per trace row
  double max = 0.0;
};

/// Integrates the cell temperature from theta0 over the trace's recorded
/// currents and SOC-dependent resistance.
ThermalReplay post_hoc_thermal(const Trace& trace, const BatteryModel& battery, double theta0);

void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

}  // namespace hevdp

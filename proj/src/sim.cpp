#include "hevdp/sim.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace hevdp {

double Trace::nested_fuel() const {
  std::vector<double> stage_fuel;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) stage_fuel.push_back(rows[k].fuel_rate * dt);
  return nested_cost(stage_fuel);
}

Trace forward_simulate(const Solution& solution, const DriveCycle& cycle, const Powertrain& powertrain,
                       const DpConfig& config, BatteryState x0) {
  const DpProblem problem(powertrain, config, solution.grid, solution.controls, cycle.dt);
  const std::size_t stages = cycle.stages();
  if (solution.policy.stages() != stages) {
    throw std::invalid_argument(
        fmt::format("policy covers {} stages, cycle has {}", solution.policy.stages(), stages));
  }
  if (!problem.in_box(x0)) throw RolloutFault("initial state outside the state bounds", 0);
  if (config.snap_transitions) x0 = problem.grid.snap(x0);

  Trace trace;
  trace.dt = cycle.dt;
  trace.distance = compute_stats(cycle).distance;
  trace.rows.reserve(stages + 1);

  const auto& battery = powertrain.battery;
  BatteryState x = x0;
  double fuel = 0.0;
  for (std::size_t k = 0; k < stages; ++k) {
    const auto demand = wheel_demand(powertrain.vehicle, cycle, k);
    const auto u = policy_control(solution, k, x);
    if (!u) throw RolloutFault(fmt::format("no live policy node at stage {}", k), k);

    const auto effect = control_effect(problem, demand, *u);
    if (!effect.feasible) throw RolloutFault(fmt::format("torque split infeasible at stage {} (u = {})", k, *u), k);
    const auto e = electrical_step(battery, x.soc, effect.motor_power, cycle.dt);
    if (!e) {
      throw RolloutFault(fmt::format("motor power {} W beyond battery limit at stage {}", effect.motor_power, k), k);
    }

    TraceRow row;
    row.time = static_cast<double>(k) * cycle.dt;
    row.speed = cycle.speeds[k];
    row.demand_torque = demand.shaft_torque;
    row.u = *u;
    row.motor_torque = effect.split.motor;
    row.engine_torque = effect.split.engine;
    row.brake_torque = effect.split.brake;
    row.motor_power = effect.motor_power;
    row.current = e->current;
    row.voltage = e->terminal_voltage;
    row.soc = x.soc;
    row.theta = x.theta;
    row.fuel_rate = fuel_rate(powertrain.engine, demand.shaft_speed, effect.split.engine);
    row.fuel = fuel;
    trace.rows.push_back(row);

    BatteryState next{e->next_soc, thermal_step(battery, x.theta, e->current, e->joule_resistance, cycle.dt)};
    if (!problem.in_box(next)) {
      throw RolloutFault(fmt::format("state (soc {:.6f}, theta {:.4f}) left the state box after stage {}", next.soc,
                                     next.theta, k),
                         k);
    }
    if (config.snap_transitions) next = problem.grid.snap(next);
    fuel += row.fuel_rate * cycle.dt;
    x = next;
  }

  TraceRow last;
  last.time = static_cast<double>(stages) * cycle.dt;
  last.speed = cycle.speeds[stages];
  last.soc = x.soc;
  last.theta = x.theta;
  last.voltage = pack_ocv(battery.electrical, x.soc);
  last.fuel = fuel;
  trace.rows.push_back(last);
  return trace;
}

double fuel_per_100km(const Trace& trace, double fuel_density) {
  if (!(trace.distance > 0.0)) throw std::invalid_argument("trace covers zero distance");
  if (!(fuel_density > 0.0)) throw std::invalid_argument("fuel density must be > 0");
  return trace.total_fuel() / fuel_density / trace.distance * 1e5;
}

ThermalReplay post_hoc_thermal(const Trace& trace, const BatteryModel& battery, double theta0) {
  ThermalReplay r;
  r.theta.reserve(trace.rows.size());
  double theta = theta0;
  r.max = theta;
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    r.theta.push_back(theta);
    r.max = std::max(r.max, theta);
    if (k + 1 == trace.rows.size()) break;
    const auto& row = trace.rows[k];
    theta = thermal_step(battery, theta, row.current, battery.joule_resistance(row.soc), trace.dt);
  }
  return r;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "t_s,v_mps,Tw_Nm,u,Tm_Nm,Te_Nm,brake_Nm,Pm_W,Ib_A,Vo_V,soc,theta_C,mf_kgps,fuel_kg\n";
  for (const auto& r : trace.rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.time, r.speed, r.demand_torque, r.u,
               r.motor_torque, r.engine_torque, r.brake_torque, r.motor_power, r.current, r.voltage, r.soc, r.theta,
               r.fuel_rate, r.fuel);
  }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  write_trace_csv(trace, out);
}

}  // namespace hevdp

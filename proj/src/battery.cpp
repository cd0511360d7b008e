#include "hevdp/battery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hevdp {

SocCurve SocCurve::affine(double intercept, double slope) { return SocCurve(Affine{intercept, slope}); }

SocCurve SocCurve::table(Table1D curve) { return SocCurve(std::move(curve)); }

double SocCurve::operator()(double soc) const {
  if (const auto* a = std::get_if<Affine>(&curve_)) return a->intercept + a->slope * soc;
  return std::get<Table1D>(curve_)(soc);
}

double SocCurve::min_on_unit() const {
  if (const auto* a = std::get_if<Affine>(&curve_)) return std::min(a->intercept, a->intercept + a->slope);
  const auto v = std::get<Table1D>(curve_).values();
  return *std::min_element(v.begin(), v.end());
}

void BatteryElectricalParams::validate() const {
  if (!(capacity > 0.0)) throw std::invalid_argument("battery capacity must be > 0");
  if (series_cells < 1) throw std::invalid_argument("battery series cell count must be >= 1");
  if (!(ocv.min_on_unit() > 0.0)) throw std::invalid_argument("open-circuit voltage must be > 0 for soc in [0, 1]");
  if (!(cell_resistance.min_on_unit() > 0.0)) throw std::invalid_argument("cell resistance must be > 0");
}

void BatteryThermalParams::validate() const {
  if (!(cell_mass > 0.0 && specific_heat > 0.0)) throw std::invalid_argument("cell mass and heat capacity must be > 0");
  for (const auto& ch : channels) {
    if (!(ch.heat_transfer_coeff > 0.0 && ch.area > 0.0 && ch.air_density > 0.0 && ch.air_specific_heat > 0.0 &&
          ch.air_flow > 0.0)) {
      throw std::invalid_argument("cooling channel parameters must be > 0");
    }
  }
}

double pack_ocv(const BatteryElectricalParams& params, double soc) { return params.series_cells * params.ocv(soc); }

double pack_resistance(const BatteryElectricalParams& params, double soc) {
  return params.series_cells * params.cell_resistance(soc);
}

std::optional<double> battery_current(double ocv, double resistance, double power) {
  const double disc = ocv * ocv - 4.0 * resistance * power;
  if (disc < 0.0) return std::nullopt;
  return (ocv - std::sqrt(disc)) / (2.0 * resistance);
}

std::optional<double> battery_current(const BatteryElectricalParams& params, double soc, double power) {
  return battery_current(pack_ocv(params, soc), pack_resistance(params, soc), power);
}

double terminal_voltage(const BatteryElectricalParams& params, double soc, double current) {
  return pack_ocv(params, soc) - pack_resistance(params, soc) * current;
}

double soc_rate(const BatteryElectricalParams& params, double current) { return -current / params.capacity; }

double heat_generation(double resistance, double current) { return resistance * current * current; }

CoolingCoefficients cooling_coefficients(const BatteryThermalParams& params) {
  std::array<double, 2> conductance{};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& ch = params.channels[i];
    const double surface = 1.0 / (ch.heat_transfer_coeff * ch.area);
    const double airflow = 1.0 / (ch.air_density * ch.air_specific_heat * ch.air_flow);
    conductance[i] = 1.0 / (surface + airflow);
  }
  CoolingCoefficients c;
  c.a2 = -conductance[0];
  c.a3 = -conductance[1];
  // a1 = -(a2 + a3) keeps a1 + a2 + a3 == 0: no heat flows at uniform temperature
  c.a1 = -(c.a2 + c.a3);
  return c;
}

double heat_removed(const CoolingCoefficients& coeffs, double theta, double inlet1, double inlet2) {
  // a1*theta + a2*inlet1 + a3*inlet2 rewritten with a1 = -(a2 + a3), so a
  // cell at inlet temperature gives exactly zero.
  return -coeffs.a2 * (theta - inlet1) - coeffs.a3 * (theta - inlet2);
}

double theta_rate(const BatteryThermalParams& thermal, const CoolingCoefficients& coeffs, double resistance,
                  double current, double theta) {
  const double removed =
      heat_removed(coeffs, theta, thermal.channels[0].inlet_temp, thermal.channels[1].inlet_temp);
  return (heat_generation(resistance, current) - removed) / thermal.heat_capacity();
}

double equilibrium_temperature(const BatteryThermalParams& thermal, const CoolingCoefficients& coeffs,
                               double resistance, double current) {
  const double inlet_part = -(coeffs.a2 * thermal.channels[0].inlet_temp + coeffs.a3 * thermal.channels[1].inlet_temp);
  return (inlet_part + heat_generation(resistance, current)) / coeffs.a1;
}

BatteryModel::BatteryModel(BatteryElectricalParams e, BatteryThermalParams t, JouleResistance j)
    : electrical(std::move(e)), thermal(t), cooling(cooling_coefficients(t)), joule(j) {}

double BatteryModel::joule_resistance(double soc) const {
  return joule == JouleResistance::pack ? pack_resistance(electrical, soc) : electrical.cell_resistance(soc);
}

std::optional<ElectricalStep> electrical_step(const BatteryModel& model, double soc, double power, double dt) {
  const double ocv = pack_ocv(model.electrical, soc);
  const double r = pack_resistance(model.electrical, soc);
  const auto current = battery_current(ocv, r, power);
  if (!current) return std::nullopt;
  ElectricalStep s;
  s.current = *current;
  s.terminal_voltage = ocv - r * s.current;
  s.next_soc = soc + dt * soc_rate(model.electrical, s.current);
  s.joule_resistance = model.joule == JouleResistance::pack ? r : model.electrical.cell_resistance(soc);
  return s;
}

double thermal_time_constant(const BatteryModel& model) { return model.thermal.heat_capacity() / model.cooling.a1; }

double thermal_step(const BatteryModel& model, double theta, double current, double joule_resistance, double dt) {
  return theta + dt * theta_rate(model.thermal, model.cooling, joule_resistance, current, theta);
}

std::optional<StepResult> step_state(const BatteryModel& model, BatteryState state, double power, double dt) {
  const auto e = electrical_step(model, state.soc, power, dt);
  if (!e) return std::nullopt;
  StepResult r;
  r.current = e->current;
  r.terminal_voltage = e->terminal_voltage;
  r.next.soc = e->next_soc;
  r.next.theta = thermal_step(model, state.theta, e->current, e->joule_resistance, dt);
  return r;
}

}  // namespace hevdp

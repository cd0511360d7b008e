#pragma once

#include <array>
#include <optional>
#include <variant>

#include "hevdp/grid.hpp"

namespace hevdp {

/// Per-cell quantity as a function of SOC: affine a + b*soc or a gridded curve.
class SocCurve {
 public:
  static SocCurve affine(double intercept, double slope);
  static SocCurve constant(double value) { return affine(value, 0.0); }
  static SocCurve table(Table1D curve);

  double operator()(double soc) const;
  /// Smallest value over soc in [0, 1].
  double min_on_unit() const;

 private:
  struct Affine {
    double intercept;
    double slope;
  };
  explicit SocCurve(std::variant<Affine, Table1D> c) : curve_(std::move(c)) {}
  std::variant<Affine, Table1D> curve_;
};

struct BatteryElectricalParams {
  double capacity = 15.0 * 3600.0;  // C
  int series_cells = 80;
  SocCurve ocv = SocCurve::affine(3.3, 0.9);          // V per cell
  SocCurve cell_resistance = SocCurve::constant(0.002);  // ohm per cell

  void validate() const;
};

struct CoolingChannel {
  double heat_transfer_coeff = 25.0;   // W/(m^2 K)
  double area = 0.19 * 0.145;          // m^2
  double air_density = 1.2;            // kg/m^3
  double air_specific_heat = 1005.0;   // J/(kg K)
  double air_flow = 0.005;             // m^3/s
  double inlet_temp = 20.0;            // degC
};

struct BatteryThermalParams {
  double cell_mass = 3.84;        // kg
  double specific_heat = 800.0;   // J/(kg K)
  std::array<CoolingChannel, 2> channels{};

  double heat_capacity() const { return cell_mass * specific_heat; }
  void validate() const;
};

struct BatteryState {
  double soc = 0.5;
  double theta = 20.0;  // degC
};

/// Linear heat-removal law Q_d = a1*theta + a2*theta_in1 + a3*theta_in2, in W/K.
struct CoolingCoefficients {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

/// Which resistance drives Joule heating of the representative cell.
enum class JouleResistance { pack, cell };

double pack_ocv(const BatteryElectricalParams& params, double soc);
double pack_resistance(const BatteryElectricalParams& params, double soc);

/// Smaller root of R I^2 - V_oc I + P = 0 (discharge positive), or nullopt when
/// P exceeds the deliverable limit V_oc^2 / (4 R).
std::optional<double> battery_current(double ocv, double resistance, double power);
std::optional<double> battery_current(const BatteryElectricalParams& params, double soc, double power);

double terminal_voltage(const BatteryElectricalParams& params, double soc, double current);

/// dSOC/dt in 1/s.
double soc_rate(const BatteryElectricalParams& params, double current);

double heat_generation(double resistance, double current);

CoolingCoefficients cooling_coefficients(const BatteryThermalParams& params);

double heat_removed(const CoolingCoefficients& coeffs, double theta, double inlet1, double inlet2);

/// d(theta)/dt in K/s.
double theta_rate(const BatteryThermalParams& thermal, const CoolingCoefficients& coeffs, double resistance,
                  double current, double theta);

/// Steady temperature under constant current.
double equilibrium_temperature(const BatteryThermalParams& thermal, const CoolingCoefficients& coeffs,
                               double resistance, double current);

/// Electrical and thermal parameters bundled with the derived cooling law.
struct BatteryModel {
  BatteryElectricalParams electrical;
  BatteryThermalParams thermal;
  CoolingCoefficients cooling;
  JouleResistance joule = JouleResistance::pack;

  BatteryModel() : BatteryModel(BatteryElectricalParams{}, BatteryThermalParams{}) {}
  BatteryModel(BatteryElectricalParams e, BatteryThermalParams t, JouleResistance j = JouleResistance::pack);

  double joule_resistance(double soc) const;
};

/// C / a1 in seconds. Forward-Euler steps longer than this overshoot the
/// inlet temperature.
double thermal_time_constant(const BatteryModel& model);

/// Electrical half of a forward-Euler step, evaluated at the pre-step state.
struct ElectricalStep {
  double current = 0.0;           // A
  double terminal_voltage = 0.0;  // V
  double next_soc = 0.0;
  double joule_resistance = 0.0;  // ohm, heats the representative cell
};

std::optional<ElectricalStep> electrical_step(const BatteryModel& model, double soc, double power, double dt);

double thermal_step(const BatteryModel& model, double theta, double current, double joule_resistance, double dt);

struct StepResult {
  BatteryState next;
  double current = 0.0;
  double terminal_voltage = 0.0;
};

/// One forward-Euler step of (soc, theta) under motor power P_m. nullopt when
/// the power is beyond the battery's deliverable limit.
std::optional<StepResult> step_state(const BatteryModel& model, BatteryState state, double power, double dt);

}  // namespace hevdp

#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hevdp/dp.hpp"

namespace hevdp {

/// Rejected configuration text or value. line() is 1-based, 0 when the problem
/// is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0) : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Fully resolved experiment settings. Paths are absolute once loaded from a
/// file; an empty map or curve path selects the scalar parameters instead.
struct ExperimentConfig {
  std::filesystem::path cycle_path;
  double cycle_dt = 0.0;  // 0: taken from the file's timestamps

  VehicleParams vehicle;
  EngineModel engine;
  MotorModel motor;
  double engine_efficiency = 0.35;
  double motor_efficiency = 0.9;
  std::filesystem::path engine_efficiency_map;
  std::filesystem::path motor_efficiency_map;

  double capacity_ah = 15.0;
  int series_cells = 80;
  double ocv_intercept = 3.3;
  double ocv_slope = 0.9;
  std::filesystem::path ocv_curve;
  double cell_resistance = 0.002;
  std::filesystem::path cell_resistance_curve;

  BatteryThermalParams thermal;
  JouleResistance joule = JouleResistance::pack;

  DpConfig dp;
  std::vector<std::size_t> dump_stages;

  double fuel_density = 0.745;      // kg/L
  double compare_tolerance = 0.01;  // relative fuel slack for the ordering check
  bool plots = false;

  /// Loads maps and curves and assembles the models. Throws ConfigError.
  Powertrain powertrain() const;
  void validate() const;
};

/// Parses `key = value` lines (`#` starts a comment). Relative paths resolve
/// against base_dir. Unknown or repeated keys are errors.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

/// Text that parse_config reads back into the same configuration.
std::string write_manifest(const ExperimentConfig& config);

}  // namespace hevdp

#include "hevdp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "text_util.hpp"

namespace hevdp {

namespace {

namespace fs = std::filesystem;

std::string num(double v) { return fmt::format("{}", v); }

std::string path_text(const fs::path& p) { return p.empty() ? std::string{} : p.string(); }

std::string stage_list(const std::vector<std::size_t>& stages) {
  std::string out;
  for (std::size_t i = 0; i < stages.size(); ++i) out += (i ? "," : "") + std::to_string(stages[i]);
  return out;
}

struct Entry {
  std::string value;
  std::size_t line;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, fs::path base) : entries_(std::move(entries)), base_(std::move(base)) {}

  void number(const std::string& key, double& target) const {
    if (const auto* e = find(key)) {
      const auto v = detail::parse_double(e->value);
      if (!v) throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, e->value), e->line);
      target = *v;
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& target) const {
    if (const auto* e = find(key)) {
      Int v{};
      const auto s = detail::trim(e->value);
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, e->value), e->line);
      }
      target = v;
    }
  }

  void flag(const std::string& key, bool& target) const {
    if (const auto* e = find(key)) {
      if (e->value == "true") {
        target = true;
      } else if (e->value == "false") {
        target = false;
      } else {
        throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, e->value), e->line);
      }
    }
  }

  void path(const std::string& key, fs::path& target) const {
    if (const auto* e = find(key)) {
      if (e->value.empty()) {
        target.clear();
      } else {
        const fs::path p(e->value);
        target = (p.is_absolute() ? p : base_ / p).lexically_normal();
      }
    }
  }

  template <typename Parse, typename T>
  void choice(const std::string& key, Parse parse, T& target, std::string_view allowed) const {
    if (const auto* e = find(key)) {
      const auto v = parse(e->value);
      if (!v) throw ConfigError(fmt::format("{}: expected {}, got '{}'", key, allowed, e->value), e->line);
      target = *v;
    }
  }

  void stages(const std::string& key, std::vector<std::size_t>& target) const {
    if (const auto* e = find(key)) {
      target.clear();
      if (detail::trim(e->value).empty()) return;
      for (const auto field : detail::split(e->value, ',')) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
          throw ConfigError(fmt::format("{}: '{}' is not a stage index", key, field), e->line);
        }
        target.push_back(v);
      }
    }
  }

 private:
  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::map<std::string, Entry> entries_;
  fs::path base_;
};

SocCurve curve_or(const fs::path& path, SocCurve fallback) {
  if (path.empty()) return fallback;
  return SocCurve::table(load_curve_csv(path));
}

EfficiencyMap map_or(const fs::path& path, double constant) {
  if (path.empty()) return EfficiencyMap(constant);
  return EfficiencyMap(load_map_csv(path));
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  const auto& v = c.vehicle;
  const auto& t = c.thermal;
  const auto& d = c.dp;
  return {
      {"cycle.path", path_text(c.cycle_path)},
      {"cycle.dt", num(c.cycle_dt)},
      {"vehicle.mass", num(v.mass)},
      {"vehicle.wheel_radius", num(v.wheel_radius)},
      {"vehicle.rolling_force", num(v.rolling_force)},
      {"vehicle.aero_coeff", num(v.aero_coeff)},
      {"vehicle.grade_angle", num(v.grade_angle)},
      {"vehicle.disturbance_force", num(v.disturbance_force)},
      {"vehicle.gear_ratio", num(v.gear_ratio)},
      {"vehicle.driveline_efficiency", num(v.driveline_efficiency)},
      {"engine.max_torque", num(c.engine.max_torque)},
      {"engine.max_speed", num(c.engine.max_speed)},
      {"engine.efficiency", num(c.engine_efficiency)},
      {"engine.efficiency_map", path_text(c.engine_efficiency_map)},
      {"engine.lower_heating_value", num(c.engine.lower_heating_value)},
      {"engine.idle_fuel_rate", num(c.engine.idle_fuel_rate)},
      {"motor.max_torque", num(c.motor.max_torque)},
      {"motor.max_speed", num(c.motor.max_speed)},
      {"motor.efficiency", num(c.motor_efficiency)},
      {"motor.efficiency_map", path_text(c.motor_efficiency_map)},
      {"battery.electrical.capacity_ah", num(c.capacity_ah)},
      {"battery.electrical.series_cells", std::to_string(c.series_cells)},
      {"battery.electrical.ocv_intercept", num(c.ocv_intercept)},
      {"battery.electrical.ocv_slope", num(c.ocv_slope)},
      {"battery.electrical.ocv_curve", path_text(c.ocv_curve)},
      {"battery.electrical.cell_resistance", num(c.cell_resistance)},
      {"battery.electrical.cell_resistance_curve", path_text(c.cell_resistance_curve)},
      {"battery.thermal.cell_mass", num(t.cell_mass)},
      {"battery.thermal.specific_heat", num(t.specific_heat)},
      {"battery.thermal.joule_resistance", c.joule == JouleResistance::pack ? "pack" : "cell"},
      {"battery.thermal.h_bar_1", num(t.channels[0].heat_transfer_coeff)},
      {"battery.thermal.h_bar_2", num(t.channels[1].heat_transfer_coeff)},
      {"battery.thermal.channel_area_1", num(t.channels[0].area)},
      {"battery.thermal.channel_area_2", num(t.channels[1].area)},
      {"battery.thermal.air_density_1", num(t.channels[0].air_density)},
      {"battery.thermal.air_density_2", num(t.channels[1].air_density)},
      {"battery.thermal.air_specific_heat_1", num(t.channels[0].air_specific_heat)},
      {"battery.thermal.air_specific_heat_2", num(t.channels[1].air_specific_heat)},
      {"battery.thermal.air_flow_1", num(t.channels[0].air_flow)},
      {"battery.thermal.air_flow_2", num(t.channels[1].air_flow)},
      {"battery.thermal.inlet_temp_1", num(t.channels[0].inlet_temp)},
      {"battery.thermal.inlet_temp_2", num(t.channels[1].inlet_temp)},
      {"soc.low", num(d.bounds.soc_low)},
      {"soc.high", num(d.bounds.soc_high)},
      {"soc.initial", num(d.initial.soc)},
      {"soc.final_min", num(d.window.soc_min)},
      {"soc.final_max", num(d.window.soc_max)},
      {"theta.low", num(d.bounds.theta_low)},
      {"theta.high", num(d.bounds.theta_high)},
      {"theta.initial", num(d.initial.theta)},
      {"theta.final_min", num(d.window.theta_min)},
      {"theta.final_max", num(d.window.theta_max)},
      {"dp.soc_points", std::to_string(d.soc_points)},
      {"dp.theta_points", std::to_string(d.theta_points)},
      {"dp.control_points", std::to_string(d.control_points)},
      {"dp.control_min", num(d.control_min)},
      {"dp.control_max", num(d.control_max)},
      {"dp.big_value", num(d.big_value)},
      {"dp.terminal", std::string(to_string(d.terminal))},
      {"dp.terminal_soc_penalty", num(d.terminal_soc_penalty)},
      {"dp.terminal_theta_penalty", num(d.terminal_theta_penalty)},
      {"dp.interpolation", std::string(to_string(d.interpolation))},
      {"dp.snap_transitions", d.snap_transitions ? "true" : "false"},
      {"dp.threads", std::to_string(d.threads)},
      {"dp.dump_stages", stage_list(c.dump_stages)},
      {"sim.fuel_density", num(c.fuel_density)},
      {"compare.fuel_tolerance", num(c.compare_tolerance)},
      {"output.plots", c.plots ? "true" : "false"},
  };
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  std::set<std::string> known;
  for (const auto& [key, value] : config_entries(ExperimentConfig{})) known.insert(key);

  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("expected 'key = value', got '{}'", line), line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (!known.contains(key)) throw ConfigError(fmt::format("unknown key '{}'", key), line_no);
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      throw ConfigError(fmt::format("key '{}' given twice", key), line_no);
    }
  }

  const Reader r(std::move(entries), base_dir);
  ExperimentConfig c;
  r.path("cycle.path", c.cycle_path);
  r.number("cycle.dt", c.cycle_dt);

  auto& v = c.vehicle;
  r.number("vehicle.mass", v.mass);
  r.number("vehicle.wheel_radius", v.wheel_radius);
  r.number("vehicle.rolling_force", v.rolling_force);
  r.number("vehicle.aero_coeff", v.aero_coeff);
  r.number("vehicle.grade_angle", v.grade_angle);
  r.number("vehicle.disturbance_force", v.disturbance_force);
  r.number("vehicle.gear_ratio", v.gear_ratio);
  r.number("vehicle.driveline_efficiency", v.driveline_efficiency);

  r.number("engine.max_torque", c.engine.max_torque);
  r.number("engine.max_speed", c.engine.max_speed);
  r.number("engine.efficiency", c.engine_efficiency);
  r.path("engine.efficiency_map", c.engine_efficiency_map);
  r.number("engine.lower_heating_value", c.engine.lower_heating_value);
  r.number("engine.idle_fuel_rate", c.engine.idle_fuel_rate);
  r.number("motor.max_torque", c.motor.max_torque);
  r.number("motor.max_speed", c.motor.max_speed);
  r.number("motor.efficiency", c.motor_efficiency);
  r.path("motor.efficiency_map", c.motor_efficiency_map);

  r.number("battery.electrical.capacity_ah", c.capacity_ah);
  r.integer("battery.electrical.series_cells", c.series_cells);
  r.number("battery.electrical.ocv_intercept", c.ocv_intercept);
  r.number("battery.electrical.ocv_slope", c.ocv_slope);
  r.path("battery.electrical.ocv_curve", c.ocv_curve);
  r.number("battery.electrical.cell_resistance", c.cell_resistance);
  r.path("battery.electrical.cell_resistance_curve", c.cell_resistance_curve);

  auto& t = c.thermal;
  r.number("battery.thermal.cell_mass", t.cell_mass);
  r.number("battery.thermal.specific_heat", t.specific_heat);
  r.choice(
      "battery.thermal.joule_resistance",
      [](std::string_view s) -> std::optional<JouleResistance> {
        if (s == "pack") return JouleResistance::pack;
        if (s == "cell") return JouleResistance::cell;
        return std::nullopt;
      },
      c.joule, "pack or cell");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto n = std::to_string(i + 1);
    auto& ch = t.channels[i];
    r.number("battery.thermal.h_bar_" + n, ch.heat_transfer_coeff);
    r.number("battery.thermal.channel_area_" + n, ch.area);
    r.number("battery.thermal.air_density_" + n, ch.air_density);
    r.number("battery.thermal.air_specific_heat_" + n, ch.air_specific_heat);
    r.number("battery.thermal.air_flow_" + n, ch.air_flow);
    r.number("battery.thermal.inlet_temp_" + n, ch.inlet_temp);
  }

  auto& d = c.dp;
  r.number("soc.low", d.bounds.soc_low);
  r.number("soc.high", d.bounds.soc_high);
  r.number("soc.initial", d.initial.soc);
  r.number("soc.final_min", d.window.soc_min);
  r.number("soc.final_max", d.window.soc_max);
  r.number("theta.low", d.bounds.theta_low);
  r.number("theta.high", d.bounds.theta_high);
  r.number("theta.initial", d.initial.theta);
  r.number("theta.final_min", d.window.theta_min);
  r.number("theta.final_max", d.window.theta_max);
  r.integer("dp.soc_points", d.soc_points);
  r.integer("dp.theta_points", d.theta_points);
  r.integer("dp.control_points", d.control_points);
  r.number("dp.control_min", d.control_min);
  r.number("dp.control_max", d.control_max);
  r.number("dp.big_value", d.big_value);
  r.choice("dp.terminal", parse_terminal_cost, d.terminal, "hard or penalty");
  r.number("dp.terminal_soc_penalty", d.terminal_soc_penalty);
  r.number("dp.terminal_theta_penalty", d.terminal_theta_penalty);
  r.choice("dp.interpolation", parse_interpolation, d.interpolation, "blend or strict");
  r.flag("dp.snap_transitions", d.snap_transitions);
  r.integer("dp.threads", d.threads);
  r.stages("dp.dump_stages", c.dump_stages);

  r.number("sim.fuel_density", c.fuel_density);
  r.number("compare.fuel_tolerance", c.compare_tolerance);
  r.flag("output.plots", c.plots);

  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open config {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), fs::absolute(path).parent_path());
  } catch (const ConfigError& e) {
    const auto where = e.line() ? fmt::format("{}:{}", path.string(), e.line()) : path.string();
    throw ConfigError(fmt::format("{}: {}", where, e.what()), e.line());
  }
}

Powertrain ExperimentConfig::powertrain() const {
  try {
    Powertrain p;
    p.vehicle = vehicle;
    p.engine = engine;
    p.engine.efficiency = map_or(engine_efficiency_map, engine_efficiency);
    p.motor = motor;
    p.motor.efficiency = map_or(motor_efficiency_map, motor_efficiency);
    BatteryElectricalParams e;
    e.capacity = capacity_ah * 3600.0;
    e.series_cells = series_cells;
    e.ocv = curve_or(ocv_curve, SocCurve::affine(ocv_intercept, ocv_slope));
    e.cell_resistance = curve_or(cell_resistance_curve, SocCurve::constant(cell_resistance));
    p.battery = BatteryModel(e, thermal, joule);
    p.validate();
    return p;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cycle_path.empty()) fail("cycle.path is required");
  if (cycle_dt < 0.0) fail("cycle.dt must be >= 0 (0 reads it from the file)");
  if (!(fuel_density > 0.0)) fail("sim.fuel_density must be > 0");
  if (!(compare_tolerance >= 0.0)) fail("compare.fuel_tolerance must be >= 0");
  if (!(capacity_ah > 0.0)) fail("battery.electrical.capacity_ah must be > 0");
  try {
    dp.validate();
    vehicle.validate();
    thermal.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const auto& b = dp.bounds;
  if (dp.initial.soc < b.soc_low || dp.initial.soc > b.soc_high) fail("soc.initial outside [soc.low, soc.high]");
  if (dp.initial.theta < b.theta_low || dp.initial.theta > b.theta_high) {
    fail("theta.initial outside [theta.low, theta.high]");
  }
}

std::string write_manifest(const ExperimentConfig& config) {
  std::string out = "# resolved configuration\n";
  for (const auto& [key, value] : config_entries(config)) out += fmt::format("{} = {}\n", key, value);
  return out;
}

}  // namespace hevdp

#include "hevdp/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "text_util.hpp"

namespace hevdp {

DriveCycle make_cycle(double dt, std::vector<double> speeds, std::string name) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument(fmt::format("cycle dt must be > 0, got {}", dt));
  if (speeds.size() < 2) throw std::invalid_argument("cycle needs at least 2 samples");
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    if (!(speeds[k] >= 0.0) || !std::isfinite(speeds[k])) {
      throw std::invalid_argument(fmt::format("cycle speed at sample {} is {}", k, speeds[k]));
    }
  }
  return DriveCycle{dt, std::move(speeds), std::move(name)};
}

DriveCycle load_cycle(const std::filesystem::path& path, std::optional<double> dt_override) {
  std::ifstream in(path);
  if (!in) throw CycleError(fmt::format("cannot open cycle file {}", path.string()), 0);

  const std::string file = path.string();
  std::vector<double> times;
  std::vector<double> speeds;
  std::size_t columns = 0;
  std::size_t first_data_line = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto fields = detail::split(text, ',');
    if (columns == 0 && speeds.empty() && !detail::parse_double(fields.front())) {
      // header row, e.g. "t_s,v_mps"
      if (fields.size() > 2) throw CycleError(fmt::format("{}:{}: expected 1 or 2 header columns", file, line_no), line_no);
      columns = fields.size();
      continue;
    }
    if (columns == 0) columns = fields.size();
    if (columns > 2 || fields.size() != columns) {
      throw CycleError(fmt::format("{}:{}: malformed row '{}' (expected {} column(s))", file, line_no, text,
                                   std::min<std::size_t>(columns, 2)),
                       line_no);
    }
    std::vector<double> values;
    for (const auto f : fields) {
      const auto v = detail::parse_double(f);
      if (!v) throw CycleError(fmt::format("{}:{}: cannot parse '{}' as a number", file, line_no, f), line_no);
      values.push_back(*v);
    }
    const double v = values.back();
    if (v < 0.0) throw CycleError(fmt::format("{}:{}: negative speed {}", file, line_no, v), line_no);
    if (speeds.empty()) first_data_line = line_no;
    if (columns == 2) times.push_back(values.front());
    speeds.push_back(v);
  }
  if (speeds.size() < 2) {
    throw CycleError(fmt::format("{}: cycle needs at least 2 samples, found {}", file, speeds.size()), line_no);
  }

  double dt = dt_override.value_or(1.0);
  if (!times.empty()) {
    const double step = times[1] - times[0];
    if (!(step > 0.0)) {
      throw CycleError(fmt::format("{}:{}: timestamps not increasing", file, first_data_line + 1), first_data_line + 1);
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double expected = times[0] + static_cast<double>(k) * step;
      if (std::abs(times[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
        // report the data line carrying sample k
        std::size_t bad_line = first_data_line + k;
        throw CycleError(fmt::format("{}: non-uniform timestamp {} at sample {} (expected {})", file, times[k], k,
                                     expected),
                         bad_line);
      }
    }
    if (!dt_override) dt = step;
  }
  if (!(dt > 0.0)) throw CycleError(fmt::format("{}: dt must be > 0, got {}", file, dt), 0);
  return DriveCycle{dt, std::move(speeds), path.stem().string()};
}

CycleStats compute_stats(const DriveCycle& cycle) {
  CycleStats s;
  const std::size_t n = cycle.stages();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += cycle.speeds[k];
  s.distance = sum * cycle.dt;
  s.duration = static_cast<double>(n) * cycle.dt;
  s.max_speed = *std::max_element(cycle.speeds.begin(), cycle.speeds.end());
  s.mean_speed_overall = s.distance / s.duration;

  double moving_sum = 0.0;
  std::size_t moving = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = cycle.speeds[k];
    if (v > 0.0) {
      moving_sum += v;
      ++moving;
    }
  }
  s.mean_speed_moving = moving > 0 ? moving_sum / static_cast<double>(moving) : 0.0;
  s.mean_accel = (cycle.speeds.back() - cycle.speeds.front()) / s.duration;
  return s;
}

double accel_at(const DriveCycle& cycle, std::size_t k) {
  if (k >= cycle.stages()) {
    throw std::out_of_range(fmt::format("stage {} outside cycle with {} stages", k, cycle.stages()));
  }
  return (cycle.speeds[k + 1] - cycle.speeds[k]) / cycle.dt;
}

}  // namespace hevdp

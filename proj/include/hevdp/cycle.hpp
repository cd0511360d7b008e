#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hevdp {

/// Uniformly sampled speed trace. Stage k covers [k*dt, (k+1)*dt].
struct DriveCycle {
  double dt = 1.0;             // s
  std::vector<double> speeds;  // m/s, one per sample
  std::string name;

  std::size_t samples() const { return speeds.size(); }
  std::size_t stages() const { return speeds.size() - 1; }
};

struct CycleStats {
  double distance = 0.0;            // m, left-endpoint rectangle rule
  double duration = 0.0;            // s
  double max_speed = 0.0;           // m/s
  double mean_speed_overall = 0.0;  // distance / duration
  double mean_speed_moving = 0.0;   // mean over stage-start samples with v > 0
  double mean_accel = 0.0;          // m/s^2, mean of the forward differences
};

/// Rejection raised while reading a cycle file. line() is 1-based, 0 when the
/// problem is not tied to a single line.
class CycleError : public std::runtime_error {
 public:
  CycleError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Validates and wraps an in-memory trace. Throws std::invalid_argument.
DriveCycle make_cycle(double dt, std::vector<double> speeds, std::string name = {});

/// Reads a `t_s,v_mps` CSV (header optional; a single speed column is also
/// accepted and then needs dt_override or defaults to 1 s). The cycle name is
/// the file stem.
DriveCycle load_cycle(const std::filesystem::path& path, std::optional<double> dt_override = std::nullopt);

CycleStats compute_stats(const DriveCycle& cycle);

/// Forward difference (v[k+1] - v[k]) / dt for stage k. Throws std::out_of_range.
double accel_at(const DriveCycle& cycle, std::size_t k);

}  // namespace hevdp

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hevdp/config.hpp"
#include "hevdp/sim.hpp"

namespace hevdp {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitInputError = 2, kExitInfeasible = 3 };

/// The optimizer found no trajectory that satisfies the constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CycleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Reference statistics of the Japanese 10-15 mode cycle.
inline constexpr double kJn1015Distance = 4165.27;  // m
inline constexpr double kJn1015Duration = 660.0;    // s
inline constexpr double kJn1015MaxSpeed = 19.44;    // m/s

/// True when the cycle name identifies it as JN-1015 (case and separators ignored).
bool claims_jn1015(const std::string& name);
std::vector<CycleCheck> check_jn1015(const CycleStats& stats);

struct RunResult {
  Mode mode = Mode::two_state;
  Trace trace;
  ThermalReplay replay;  // post-hoc temperature over the trace currents
  double initial_cost = 0.0;
  double fuel_l_per_100km = 0.0;
  double solve_seconds = 0.0;
  double soc_min = 0.0, soc_max = 0.0;
  double theta_min = 0.0, theta_max = 0.0;
  bool window_met = false;
  std::vector<std::string> warnings;
};

/// Solves one mode and rolls the policy out. Value slices listed in
/// config.dump_stages are written to dump_dir when it is not empty. Throws
/// InfeasibleError when the solver or the rollout finds no admissible path.
RunResult run_mode(const ExperimentConfig& config, const Powertrain& powertrain, const DriveCycle& cycle, Mode mode,
                   const std::filesystem::path& dump_dir = {});

std::string summary_json(const RunResult& run, const ExperimentConfig& config, const DriveCycle& cycle);

void write_value_dump(const Solution& solution, std::size_t stage, const std::filesystem::path& path);

/// Subcommands. Messages go to `out`, diagnostics to `err`; the return value
/// is an ExitCode.
int cmd_validate_cycle(const std::filesystem::path& path, std::ostream& out, std::ostream& err);
int cmd_solve(const std::filesystem::path& config_path, Mode mode, const std::filesystem::path& out_dir, bool plots,
              std::ostream& out, std::ostream& err);
int cmd_compare(const std::filesystem::path& config_path, const std::filesystem::path& out_dir, bool plots,
                std::ostream& out, std::ostream& err);

}  // namespace hevdp

#include <cmath>

#include <fmt/core.h>

#include "hevdp/dp.hpp"

namespace hevdp {

BruteForceResult brute_force_solve(const DriveCycle& cycle, const Powertrain& powertrain, const DpConfig& config) {
  powertrain.validate();
  DpProblem problem(powertrain, config, cycle.dt);
  const std::size_t stages = cycle.stages();
  const auto& u = problem.controls.values;
  const double sequences = std::pow(static_cast<double>(u.size()), static_cast<double>(stages));
  if (sequences > kMaxEnumeratedSequences) {
    throw ProblemError(fmt::format("{} control sequences exceed the enumeration limit of {}", sequences,
                                   kMaxEnumeratedSequences));
  }

  BatteryState x0 = config.initial;
  if (!problem.in_box(x0)) throw ProblemError("initial state outside the state bounds");
  if (config.snap_transitions) x0 = problem.grid.snap(x0);

  std::vector<StageDemand> demand(stages);
  for (std::size_t k = 0; k < stages; ++k) demand[k] = wheel_demand(powertrain.vehicle, cycle, k);

  BruteForceResult best;
  std::vector<std::size_t> digits(stages, 0);
  std::vector<double> costs(stages);
  while (true) {
    BatteryState x = x0;
    bool ok = true;
    for (std::size_t k = 0; k < stages && ok; ++k) {
      const auto t = stage_transition(problem, x, u[digits[k]], demand[k]);
      ok = t.feasible;
      costs[k] = t.fuel;
      x = t.next;
    }
    if (ok) {
      const double cost = nested_cost(costs, terminal_value(config, x));
      if (cost < config.big_value && (!best.feasible || cost < best.cost)) {
        best.feasible = true;
        best.cost = cost;
        best.controls.resize(stages);
        for (std::size_t k = 0; k < stages; ++k) best.controls[k] = u[digits[k]];
      }
    }
    // odometer increment
    std::size_t k = 0;
    while (k < stages && ++digits[k] == u.size()) digits[k++] = 0;
    if (k == stages) break;
  }
  return best;
}

}  // namespace hevdp

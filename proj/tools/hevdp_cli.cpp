#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hevdp/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Offline dynamic-programming energy management for a parallel hybrid"};
  app.require_subcommand(1);

  std::string cycle_path;
  auto* validate = app.add_subcommand("validate-cycle", "Load a drive cycle and print its statistics");
  validate->add_option("path", cycle_path, "cycle CSV (t_s,v_mps)")->required();

  std::string config_path;
  std::string mode_text;
  std::string out_dir = "out";
  bool plots = false;
  auto* solve = app.add_subcommand("solve", "Solve one mode and roll the policy out");
  solve->add_option("--config", config_path, "configuration file")->required();
  solve->add_option("--mode", mode_text, "soc-only or two-state")
      ->required()
      ->check(CLI::IsMember({"soc-only", "two-state"}));
  solve->add_option("--out", out_dir, "output directory")->capture_default_str();
  solve->add_flag("--plots", plots, "write SVG plots");

  auto* compare = app.add_subcommand("compare", "Solve both modes on one configuration and compare them");
  compare->add_option("--config", config_path, "configuration file")->required();
  compare->add_option("--out", out_dir, "output directory")->capture_default_str();
  compare->add_flag("--plots", plots, "write SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hevdp::kExitOk : hevdp::kExitInputError;
  }

  if (*validate) return hevdp::cmd_validate_cycle(cycle_path, std::cout, std::cerr);
  if (*solve) {
    return hevdp::cmd_solve(config_path, *hevdp::parse_mode(mode_text), out_dir, plots, std::cout, std::cerr);
  }
  return hevdp::cmd_compare(config_path, out_dir, plots, std::cout, std::cerr);
}

#include <sstream>

#include "json.hpp"

#include "doctest.h"
#include "hevdp/experiment.hpp"
#include "hevdp/svg.hpp"
#include "test_support.hpp"

using namespace hevdp;
namespace fs = std::filesystem;

TEST_CASE("cycle names that claim JN-1015") {
  CHECK(claims_jn1015("jn1015"));
  CHECK(claims_jn1015("JN-1015"));
  CHECK(claims_jn1015("japan_jn_10_15_mode"));
  CHECK(claims_jn1015("jn1015_corrupt"));
  CHECK_FALSE(claims_jn1015("udds"));
  CHECK_FALSE(claims_jn1015("jn105"));
}

TEST_CASE("JN-1015 statistics check") {
  CycleStats s;
  s.distance = 4165.27;
  s.duration = 660.0;
  s.max_speed = 19.44;
  for (const auto& c : check_jn1015(s)) CHECK(c.passed);

  s.distance = 4165.27 * 1.011;
  s.max_speed = 19.56;
  int failed = 0;
  for (const auto& c : check_jn1015(s)) failed += c.passed ? 0 : 1;
  CHECK(failed == 2);

  s = {};
  s.distance = 4165.27 * 0.991;
  s.duration = 661.0;
  s.max_speed = 19.53;
  failed = 0;
  for (const auto& c : check_jn1015(s)) failed += c.passed ? 0 : 1;
  CHECK(failed == 1);
}

TEST_CASE("validate-cycle exit codes") {
  std::ostringstream out, err;
  CHECK(cmd_validate_cycle(testing::source_dir() / "data" / "jn1015.csv", out, err) == kExitOk);
  CHECK(out.str().find("PASS distance") != std::string::npos);
  CHECK(cmd_validate_cycle(testing::data_dir() / "jn1015_corrupt.csv", out, err) == kExitCheckFailed);
  CHECK(cmd_validate_cycle(testing::data_dir() / "jn1015_truncated.csv", out, err) == kExitInputError);
  CHECK(err.str().find("191") != std::string::npos);
  CHECK(cmd_validate_cycle(testing::data_dir() / "two_rows.csv", out, err) == kExitOk);
  CHECK(cmd_validate_cycle(testing::data_dir() / "nope.csv", out, err) == kExitInputError);
}

TEST_CASE("solve and compare on a coarse grid") {
  const auto dir = testing::scratch("experiment");
  std::ostringstream out, err;
  REQUIRE(cmd_solve(testing::data_dir() / "small.cfg", Mode::two_state, dir / "solve", true, out, err) == kExitOk);
  for (const char* f : {"manifest.cfg", "trace_two-state.csv", "summary_two-state.json", "soc_two-state.svg",
                        "theta_two-state.svg", "u_two-state.svg"}) {
    CHECK(fs::exists(dir / "solve" / f));
  }
  const auto summary = nlohmann::json::parse(testing::read_file(dir / "solve" / "summary_two-state.json"));
  CHECK(summary["mode"] == "two-state");
  CHECK(summary["terminal_window_met"] == true);
  CHECK(summary["final_soc"].get<double>() >= 0.54);
  CHECK(summary["final_soc"].get<double>() <= 0.55);
  CHECK(summary["fuel_kg"].get<double>() > 0.0);

  // the manifest is itself a configuration that reproduces the run
  REQUIRE(cmd_solve(dir / "solve" / "manifest.cfg", Mode::two_state, dir / "again", false, out, err) == kExitOk);
  CHECK(testing::read_file(dir / "again" / "trace_two-state.csv") ==
        testing::read_file(dir / "solve" / "trace_two-state.csv"));

  REQUIRE(cmd_compare(testing::data_dir() / "small.cfg", dir / "c1", false, out, err) == kExitOk);
  REQUIRE(cmd_compare(testing::data_dir() / "small.cfg", dir / "c2", false, out, err) == kExitOk);
  for (const char* f : {"comparison.json", "comparison.txt", "trace_soc-only.csv", "trace_two-state.csv",
                        "summary_soc-only.json", "summary_two-state.json"}) {
    CHECK(testing::read_file(dir / "c1" / f) == testing::read_file(dir / "c2" / f));
  }
  const auto cmp = nlohmann::json::parse(testing::read_file(dir / "c1" / "comparison.json"));
  CHECK(cmp["fuel_ordering_holds"] == true);
}

TEST_CASE("solve reports input errors and infeasibility") {
  const auto dir = testing::scratch("experiment_errors");
  std::ostringstream out, err;
  CHECK(cmd_solve(testing::data_dir() / "missing.cfg", Mode::two_state, dir, false, out, err) == kExitInputError);
  CHECK(cmd_solve(testing::data_dir() / "unknown_key.cfg", Mode::two_state, dir, false, out, err) ==
        kExitInputError);
  CHECK(err.str().find("h_bar_3") != std::string::npos);
  CHECK(cmd_solve(testing::data_dir() / "unreachable.cfg", Mode::soc_only, dir, false, out, err) == kExitInfeasible);

  const auto bad = testing::write_file(dir / "bad_cycle.cfg", "cycle.path = " +
                                                                  (testing::data_dir() / "negative_speed.csv").string() +
                                                                  "\n");
  CHECK(cmd_solve(bad, Mode::soc_only, dir, false, out, err) == kExitInputError);
}

TEST_CASE("value dumps list every node") {
  DpConfig c;
  c.mode = Mode::two_state;
  c.soc_points = 4;
  c.theta_points = 3;
  c.control_points = 3;
  c.window = {0.4, 0.7, 10.0, 30.0};
  c.retain_stages = {1};
  const auto cycle = make_cycle(1.0, {0.0, 3.0, 5.0});
  const auto sol = solve(cycle, Powertrain{}, c);
  const auto path = testing::scratch("dump") / "v.csv";
  write_value_dump(sol, 1, path);
  const auto text = testing::read_file(path);
  CHECK(text.rfind("soc,theta,J,u_opt\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);
  CHECK(text.find("\n0.4,10,") != std::string::npos);
  write_value_dump(sol, 2, path);  // terminal slice, no controls
  CHECK(testing::read_file(path).find(",\n") != std::string::npos);
  CHECK_THROWS_AS(write_value_dump(sol, 5, path), std::invalid_argument);
}

TEST_CASE("svg rendering") {
  Plot p{"Temperature", "time [s]", "theta [degC]", {{"a", {0, 1, 2}, {20, 21, 20.5}}, {"b<c", {0, 2}, {19, 19}}},
         {30.0}};
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("b&lt;c") != std::string::npos);
  CHECK(render_svg(p) == svg);

  Plot flat{"flat", "x", "y", {{"only", {0, 1}, {1, 1}}}, {}};
  CHECK(render_svg(flat).find("nan") == std::string::npos);
}

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evoctrl/errors.hpp"
#include "evoctrl/scenario.hpp"
#include "evoctrl/workbench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"evoctrl: control synthesis workbench for second-order evolution inclusions"};

  std::string command;
  std::string scenario_path;
  std::string out_dir = "out";
  app.add_option("command", command, "Subcommand: verify | gramian | solve | sweep | oracle")
      ->required();
  app.add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory for CSV files");

  CLI11_PARSE(app, argc, argv);

  try {
    const evoctrl::Scenario scenario = evoctrl::load_scenario(scenario_path);
    const evoctrl::RunReport report = evoctrl::run_command(command, scenario, out_dir);
    std::cout << report.summary;
    for (const auto& file : report.output_files) {
      std::cout << "wrote " << file << "\n";
    }
    return report.exit_code;
  } catch (const evoctrl::ScenarioError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return evoctrl::kExitInvalid;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << "\n";
    return evoctrl::kExitInvalid;
  } catch (const evoctrl::DiagnosticError& error) {
    std::cerr << "diagnostic failure: " << error.what() << "\n";
    return evoctrl::kExitCheckFailed;
  } catch (const std::exception& error) {
    std::cerr << "unexpected error: " << error.what() << "\n";
    return evoctrl::kExitFailure;
  }
}

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evoctrl/scenario.hpp"

namespace evoctrl {

// Exit codes shared by the library runners and the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;        // unexpected error
inline constexpr int kExitInvalid = 2;        // scenario or argument validation
inline constexpr int kExitNonConverged = 3;   // a solve missed its tolerance
inline constexpr int kExitCheckFailed = 4;    // verification/oracle check out of tolerance

struct RunReport {
  std::string subcommand;
  int exit_code = kExitOk;
  std::string summary;                     // human-readable block for stdout
  std::vector<std::string> output_files;   // CSV paths written
};

/// Axiom, exponential-bound and oracle-agreement checks; writes axiom_report.csv.
RunReport run_verify(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Gramian assembly plus resolvent decay table; writes gramian_summary.csv, h0_decay.csv.
RunReport run_gramian(const Scenario& scenario, const std::filesystem::path& out_dir);

/// One mild solution; writes solution.csv and impulse_events.csv when applicable.
RunReport run_solve(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Regularization sweep; writes convergence_table.csv.
RunReport run_sweep(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Brute-force cross-checks of kernels, Gramian and trajectories; writes oracle_report.csv.
RunReport run_oracle(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Dispatch by subcommand name; throws std::invalid_argument for unknown commands.
RunReport run_command(const std::string& command, const Scenario& scenario,
                      const std::filesystem::path& out_dir);

}  // namespace evoctrl

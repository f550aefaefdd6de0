#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evoctrl/inclusion.hpp"
#include "evoctrl/solve.hpp"
#include "evoctrl/spectral.hpp"

namespace evoctrl {

// Plain description of one experiment, mirroring the JSON scenario schema.
// Parsing validates the schema; build_scenario materializes the callables.
struct Scenario {
  struct Damping {
    std::string kind = "zero";  // zero | cos | sin | piecewise_constant
    double amplitude = 0.0;
    std::vector<double> times, values;
  };
  struct Input {
    std::string kind = "identity";  // identity | zero | diagonal | dense
    Eigen::VectorXcd diagonal;
    Eigen::MatrixXcd dense;
  };
  struct Inclusion {
    std::string center_kind = "zero";  // zero | constant | state_scale | state_saturate
    Eigen::VectorXcd center_value;
    double center_factor = 0.0;
    std::string radius_kind = "constant";  // constant | state_scale
    double radius_value = 0.0;
    double radius_slope = 0.0;
    double growth_offset = 0.0;  // derived from the built-ins unless given explicitly
    double growth_slope = 0.0;
  };
  struct NonlocalMap {
    std::string kind = "zero";  // zero | constant | point | mean
    Eigen::VectorXcd value;
    double epsilon = 0.0;
    double time = 0.0;
  };
  struct ImpulseJump {
    std::string kind = "constant";  // constant | state_scale
    Eigen::VectorXcd value;
    double factor = 0.0;
    double bound = 0.0;
  };
  struct ImpulseDesc {
    double time = 0.0;
    ImpulseJump position, velocity;
  };

  std::string name;
  std::vector<int> modes;
  int grid_steps = 0;
  double horizon = 0.0;
  Damping damping;
  Input input;
  Inclusion inclusion;
  Eigen::VectorXcd initial_position, initial_velocity, target_position;
  double regularization = 1e-2;
  std::vector<double> regularization_list;
  bool has_nonlocal = false;
  NonlocalMap nonlocal_g, nonlocal_h;
  std::vector<ImpulseDesc> impulses;
  std::string selection = "center";
  SolveOptions tolerances;
  std::uint64_t seed = 0;
  std::uint64_t digest = 0;  // FNV-1a of the source bytes when loaded from a file
};

/// Parses and validates scenario text. Throws ScenarioError with a located message.
Scenario parse_scenario(const std::string& text);

/// Reads, digests, parses and validates a scenario file.
Scenario load_scenario(const std::filesystem::path& path);

struct BuiltScenario {
  ControlProblem problem;
  std::optional<NonlocalSpec> nonlocal;
  std::optional<ImpulseSpec> impulses;
  SelectionStrategy strategy;
  std::vector<double> a_list;  // regularization_list, or the single value
};

/// Materializes the callables; cross-checks impulse and nonlocal times on the grid.
BuiltScenario build_scenario(const Scenario& scenario);

}  // namespace evoctrl

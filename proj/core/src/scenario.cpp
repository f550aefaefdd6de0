#include "evoctrl/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evoctrl/errors.hpp"

namespace evoctrl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ScenarioError("scenario: " + message); }

dcomplex parse_complex(const json& value, const std::string& where) {
  if (value.is_number()) return dcomplex(value.get<double>(), 0.0);
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
    return dcomplex(value[0].get<double>(), value[1].get<double>());
  }
  fail(where + ": expected a number or an [re, im] pair");
}

Eigen::VectorXcd parse_complex_vector(const json& value, const std::string& where) {
  if (!value.is_array()) fail(where + ": expected an array");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = parse_complex(value[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

double parse_number(const json& parent, const std::string& key, const std::string& where) {
  if (!parent.contains(key) || !parent[key].is_number()) {
    fail(where + ": missing numeric field '" + key + "'");
  }
  return parent[key].get<double>();
}

std::string parse_kind(const json& parent, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!parent.is_object() || !parent.contains("kind") || !parent["kind"].is_string()) {
    fail(where + ": expected an object with a string 'kind'");
  }
  const std::string kind = parent["kind"].get<std::string>();
  for (const char* candidate : allowed) {
    if (kind == candidate) return kind;
  }
  std::string list;
  for (const char* candidate : allowed) {
    if (!list.empty()) list += ", ";
    list += candidate;
  }
  fail(where + ": unknown kind '" + kind + "' (expected one of: " + list + ")");
}

Scenario::NonlocalMap parse_nonlocal_map(const json& node, const std::string& where) {
  Scenario::NonlocalMap map;
  map.kind = parse_kind(node, where, {"zero", "constant", "point", "mean"});
  if (map.kind == "constant") {
    if (!node.contains("value")) fail(where + ": constant map needs 'value'");
    map.value = parse_complex_vector(node["value"], where + ".value");
  } else if (map.kind == "point") {
    map.epsilon = parse_number(node, "epsilon", where);
    map.time = parse_number(node, "time", where);
  } else if (map.kind == "mean") {
    map.epsilon = parse_number(node, "epsilon", where);
  }
  return map;
}

Scenario::ImpulseJump parse_impulse_jump(const json& node, const std::string& where) {
  Scenario::ImpulseJump jump;
  jump.kind = parse_kind(node, where, {"constant", "state_scale"});
  if (jump.kind == "constant") {
    if (!node.contains("value")) fail(where + ": constant jump needs 'value'");
    jump.value = parse_complex_vector(node["value"], where + ".value");
    jump.bound = node.contains("bound") ? parse_number(node, "bound", where) : jump.value.norm();
  } else {
    jump.factor = parse_number(node, "factor", where);
    jump.bound = parse_number(node, "bound", where);
  }
  if (jump.bound < 0.0) fail(where + ": bound must be >= 0");
  return jump;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& error) {
    throw ScenarioError(std::string("scenario: ") + error.what());
  }
  if (!root.is_object()) fail("top level must be an object");

  Scenario scenario;
  scenario.name = root.value("name", std::string("unnamed"));

  if (!root.contains("modes")) fail("missing 'modes'");
  if (root["modes"].is_number_integer()) {
    const int count = root["modes"].get<int>();
    if (count < 1) fail("'modes' count must be >= 1");
    for (int n = 1; n <= count; ++n) scenario.modes.push_back(n);
  } else if (root["modes"].is_array()) {
    for (const auto& entry : root["modes"]) {
      if (!entry.is_number_integer()) fail("'modes' entries must be integers");
      scenario.modes.push_back(entry.get<int>());
    }
  } else {
    fail("'modes' must be an integer count or an array of mode indices");
  }
  try {
    ModeSet probe(scenario.modes);
  } catch (const std::invalid_argument& error) {
    fail(error.what());
  }
  const int dim = static_cast<int>(scenario.modes.size());

  if (!root.contains("grid_steps") || !root["grid_steps"].is_number_integer()) {
    fail("missing integer 'grid_steps'");
  }
  scenario.grid_steps = root["grid_steps"].get<int>();
  if (scenario.grid_steps < 2) fail("'grid_steps' must be >= 2");

  scenario.horizon = parse_number(root, "horizon", "horizon");
  if (!(scenario.horizon > 0.0)) fail("'horizon' must be positive");

  if (root.contains("damping")) {
    const json& node = root["damping"];
    scenario.damping.kind = parse_kind(node, "damping", {"zero", "cos", "sin", "piecewise_constant"});
    if (scenario.damping.kind == "cos" || scenario.damping.kind == "sin") {
      scenario.damping.amplitude = parse_number(node, "amplitude", "damping");
    } else if (scenario.damping.kind == "piecewise_constant") {
      if (!node.contains("times") || !node.contains("values")) {
        fail("piecewise_constant damping needs 'times' and 'values'");
      }
      for (const auto& t : node["times"]) scenario.damping.times.push_back(t.get<double>());
      for (const auto& v : node["values"]) scenario.damping.values.push_back(v.get<double>());
    }
  }

  if (root.contains("input_operator")) {
    const json& node = root["input_operator"];
    scenario.input.kind = parse_kind(node, "input_operator", {"identity", "zero", "diagonal", "dense"});
    if (scenario.input.kind == "diagonal") {
      if (!node.contains("entries")) fail("diagonal input_operator needs 'entries'");
      scenario.input.diagonal = parse_complex_vector(node["entries"], "input_operator.entries");
      if (scenario.input.diagonal.size() != dim) {
        fail("input_operator.entries must have one entry per mode");
      }
    } else if (scenario.input.kind == "dense") {
      if (!node.contains("rows") || !node["rows"].is_array() ||
          static_cast<int>(node["rows"].size()) != dim) {
        fail("dense input_operator needs 'rows' with one row per mode");
      }
      scenario.input.dense.resize(dim, dim);
      for (int r = 0; r < dim; ++r) {
        const Eigen::VectorXcd row =
            parse_complex_vector(node["rows"][static_cast<std::size_t>(r)],
                                 "input_operator.rows[" + std::to_string(r) + "]");
        if (row.size() != dim) fail("dense input_operator rows must have one entry per mode");
        scenario.input.dense.row(r) = row.transpose();
      }
    }
  }

  if (root.contains("inclusion")) {
    const json& node = root["inclusion"];
    if (!node.is_object()) fail("'inclusion' must be an object");
    if (node.contains("center")) {
      const json& center = node["center"];
      scenario.inclusion.center_kind =
          parse_kind(center, "inclusion.center", {"zero", "constant", "state_scale", "state_saturate"});
      if (scenario.inclusion.center_kind == "constant") {
        if (!center.contains("value")) fail("inclusion.center: constant needs 'value'");
        scenario.inclusion.center_value = parse_complex_vector(center["value"], "inclusion.center.value");
        if (scenario.inclusion.center_value.size() != dim) {
          fail("inclusion.center.value must have one entry per mode");
        }
      } else if (scenario.inclusion.center_kind != "zero") {
        scenario.inclusion.center_factor = parse_number(center, "factor", "inclusion.center");
      }
    }
    if (node.contains("radius")) {
      const json& radius = node["radius"];
      scenario.inclusion.radius_kind = parse_kind(radius, "inclusion.radius", {"constant", "state_scale"});
      scenario.inclusion.radius_value = parse_number(radius, "value", "inclusion.radius");
      if (scenario.inclusion.radius_value < 0.0) fail("inclusion.radius.value must be >= 0");
      if (scenario.inclusion.radius_kind == "state_scale") {
        scenario.inclusion.radius_slope = parse_number(radius, "slope", "inclusion.radius");
        if (scenario.inclusion.radius_slope < 0.0) fail("inclusion.radius.slope must be >= 0");
      }
    }
    // Growth envelope: derived from the built-ins, overridable.
    double offset = scenario.inclusion.radius_value;
    double slope = scenario.inclusion.radius_slope;
    if (scenario.inclusion.center_kind == "constant") {
      offset += scenario.inclusion.center_value.norm();
    } else if (scenario.inclusion.center_kind == "state_scale") {
      slope += std::abs(scenario.inclusion.center_factor);
    } else if (scenario.inclusion.center_kind == "state_saturate") {
      offset += std::abs(scenario.inclusion.center_factor);
    }
    scenario.inclusion.growth_offset = offset;
    scenario.inclusion.growth_slope = slope;
    if (node.contains("growth")) {
      if (!node["growth"].is_array() || node["growth"].size() != 2) {
        fail("inclusion.growth must be [c1, c2]");
      }
      scenario.inclusion.growth_offset = node["growth"][0].get<double>();
      scenario.inclusion.growth_slope = node["growth"][1].get<double>();
      if (scenario.inclusion.growth_offset < 0.0 || scenario.inclusion.growth_slope < 0.0) {
        fail("inclusion.growth constants must be >= 0");
      }
    }
  }

  const auto parse_state = [&](const char* key) {
    if (!root.contains(key)) fail(std::string("missing '") + key + "'");
    Eigen::VectorXcd v = parse_complex_vector(root[key], key);
    if (v.size() != dim) {
      fail(std::string("'") + key + "' must have one entry per mode (" + std::to_string(dim) +
           "), got " + std::to_string(v.size()));
    }
    return v;
  };
  scenario.initial_position = parse_state("initial_position");
  scenario.initial_velocity = parse_state("initial_velocity");
  scenario.target_position = parse_state("target_position");

  if (root.contains("regularization")) {
    scenario.regularization = parse_number(root, "regularization", "regularization");
    if (!(scenario.regularization > 0.0)) fail("'regularization' must be positive");
  }
  if (root.contains("regularization_list")) {
    if (!root["regularization_list"].is_array() || root["regularization_list"].empty()) {
      fail("'regularization_list' must be a non-empty array");
    }
    double previous = 0.0;
    bool first = true;
    for (const auto& entry : root["regularization_list"]) {
      const double a = entry.get<double>();
      if (!(a > 0.0)) fail("'regularization_list' entries must be positive");
      if (!first && !(a < previous)) fail("'regularization_list' must be strictly decreasing");
      scenario.regularization_list.push_back(a);
      previous = a;
      first = false;
    }
  }

  if (root.contains("nonlocal")) {
    const json& node = root["nonlocal"];
    if (!node.is_object()) fail("'nonlocal' must be an object");
    scenario.has_nonlocal = true;
    scenario.nonlocal_g = node.contains("g") ? parse_nonlocal_map(node["g"], "nonlocal.g")
                                             : Scenario::NonlocalMap{};
    scenario.nonlocal_h = node.contains("h") ? parse_nonlocal_map(node["h"], "nonlocal.h")
                                             : Scenario::NonlocalMap{};
    for (const Scenario::NonlocalMap* map : {&scenario.nonlocal_g, &scenario.nonlocal_h}) {
      if (map->kind == "constant" && map->value.size() != dim) {
        fail("nonlocal constant value must have one entry per mode");
      }
    }
  }

  if (root.contains("impulses")) {
    if (!root["impulses"].is_array()) fail("'impulses' must be an array");
    for (std::size_t i = 0; i < root["impulses"].size(); ++i) {
      const json& node = root["impulses"][i];
      const std::string where = "impulses[" + std::to_string(i) + "]";
      Scenario::ImpulseDesc desc;
      desc.time = parse_number(node, "time", where);
      if (!node.contains("position_jump") || !node.contains("velocity_jump")) {
        fail(where + ": needs 'position_jump' and 'velocity_jump'");
      }
      desc.position = parse_impulse_jump(node["position_jump"], where + ".position_jump");
      desc.velocity = parse_impulse_jump(node["velocity_jump"], where + ".velocity_jump");
      for (const Scenario::ImpulseJump* jump : {&desc.position, &desc.velocity}) {
        if (jump->kind == "constant" && jump->value.size() != dim) {
          fail(where + ": constant jump value must have one entry per mode");
        }
      }
      scenario.impulses.push_back(std::move(desc));
    }
  }

  if (root.contains("selection")) {
    scenario.selection =
        parse_kind(root["selection"], "selection", {"center", "min_norm_shift", "random_extreme"});
  }

  if (root.contains("tolerances")) {
    const json& node = root["tolerances"];
    if (!node.is_object()) fail("'tolerances' must be an object");
    if (node.contains("fixed_point")) {
      scenario.tolerances.fixed_point_tol = node["fixed_point"].get<double>();
    }
    if (node.contains("max_iterations")) {
      scenario.tolerances.max_iterations = node["max_iterations"].get<int>();
    }
    if (node.contains("relaxation")) {
      scenario.tolerances.relaxation = node["relaxation"].get<double>();
    }
  }

  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) fail("'seed' must be an integer");
    scenario.seed = root["seed"].get<std::uint64_t>();
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw ScenarioError("scenario: cannot open file " + path.string());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  const std::string text = buffer.str();
  if (text.empty()) throw ScenarioError("scenario: file " + path.string() + " is empty");
  Scenario scenario = parse_scenario(text);
  scenario.digest = fnv1a(text);
  return scenario;
}

namespace {

DampingSpec build_damping(const Scenario& scenario) {
  const auto& damping = scenario.damping;
  if (damping.kind == "zero") return zero_damping();
  if (damping.kind == "cos") return cosine_damping(damping.amplitude);
  if (damping.kind == "sin") return sine_damping(damping.amplitude, scenario.horizon);
  try {
    return piecewise_constant_damping(damping.times, damping.values);
  } catch (const std::invalid_argument& error) {
    fail(error.what());
  }
}

OperatorMatrix build_input(const Scenario& scenario, int dim) {
  if (scenario.input.kind == "identity") return OperatorMatrix::identity(dim);
  if (scenario.input.kind == "zero") return OperatorMatrix::zero(dim);
  if (scenario.input.kind == "diagonal") return OperatorMatrix::diagonal(scenario.input.diagonal);
  return OperatorMatrix(scenario.input.dense);
}

SetValuedMap build_inclusion(const Scenario& scenario, const ModeSet& modes) {
  const auto& inc = scenario.inclusion;
  SetValuedMap map;
  if (inc.center_kind == "zero") {
    map.center = [modes](double, const SpectralVector&) { return SpectralVector::zero(modes); };
  } else if (inc.center_kind == "constant") {
    const SpectralVector center(modes, inc.center_value);
    map.center = [center](double, const SpectralVector&) { return center; };
  } else if (inc.center_kind == "state_scale") {
    const double factor = inc.center_factor;
    map.center = [modes, factor](double, const SpectralVector& x) {
      return SpectralVector(modes, factor * x.coeffs);
    };
  } else {
    const double factor = inc.center_factor;
    map.center = [modes, factor](double, const SpectralVector& x) {
      return SpectralVector(modes, factor / (1.0 + x.coeffs.norm()) * x.coeffs);
    };
  }
  if (inc.radius_kind == "constant") {
    const double r0 = inc.radius_value;
    map.radius = [r0](double, const SpectralVector&) { return r0; };
  } else {
    const double r0 = inc.radius_value;
    const double r1 = inc.radius_slope;
    map.radius = [r0, r1](double, const SpectralVector& x) { return r0 + r1 * x.coeffs.norm(); };
  }
  map.growth_offset = inc.growth_offset;
  map.growth_slope = inc.growth_slope;
  return map;
}

TrajectoryFunctional build_nonlocal_map(const Scenario::NonlocalMap& desc, const ModeSet& modes,
                                        const TimeGrid& grid) {
  if (desc.kind == "zero") return zero_functional(modes);
  if (desc.kind == "constant") return constant_functional(SpectralVector(modes, desc.value));
  if (desc.kind == "point") {
    try {
      grid.index_of(desc.time);
    } catch (const std::invalid_argument&) {
      fail("nonlocal point-evaluation time " + std::to_string(desc.time) + " is not a grid node");
    }
    return point_evaluation_functional(desc.epsilon, desc.time);
  }
  return mean_functional(desc.epsilon);
}

std::function<SpectralVector(const SpectralVector&)> build_jump(const Scenario::ImpulseJump& desc,
                                                                const ModeSet& modes) {
  if (desc.kind == "constant") return constant_jump(SpectralVector(modes, desc.value));
  return scaled_jump(desc.factor);
}

}  // namespace

BuiltScenario build_scenario(const Scenario& scenario) {
  ModeSet modes(scenario.modes);
  TimeGrid grid(scenario.horizon, scenario.grid_steps);
  const int dim = modes.dim();

  if (scenario.damping.kind == "piecewise_constant") {
    for (std::size_t i = 1; i < scenario.damping.times.size(); ++i) {
      const double t = scenario.damping.times[i];
      try {
        grid.index_of(t);
      } catch (const std::invalid_argument&) {
        fail("damping breakpoint " + std::to_string(t) + " is not a grid node");
      }
    }
  }

  ControlProblem problem{modes,
                         grid,
                         build_damping(scenario),
                         build_input(scenario, dim),
                         build_inclusion(scenario, modes),
                         SpectralVector(modes, scenario.initial_position),
                         SpectralVector(modes, scenario.initial_velocity),
                         SpectralVector(modes, scenario.target_position),
                         scenario.regularization,
                         scenario.tolerances};
  validate_problem(problem);

  BuiltScenario built{std::move(problem), std::nullopt, std::nullopt, SelectionStrategy{}, {}};

  if (scenario.has_nonlocal) {
    built.nonlocal = NonlocalSpec{build_nonlocal_map(scenario.nonlocal_g, modes, grid),
                                  build_nonlocal_map(scenario.nonlocal_h, modes, grid)};
  }

  if (!scenario.impulses.empty()) {
    ImpulseSpec spec;
    double previous = 0.0;
    for (const auto& desc : scenario.impulses) {
      int node = 0;
      try {
        node = grid.index_of(desc.time);
      } catch (const std::invalid_argument&) {
        fail("impulse time " + std::to_string(desc.time) + " is not a grid node");
      }
      if (node <= 0 || node >= grid.steps()) {
        fail("impulse time " + std::to_string(desc.time) + " must lie strictly inside the horizon");
      }
      if (!spec.impulses.empty() && !(desc.time > previous)) {
        fail("impulse times must be strictly increasing");
      }
      previous = desc.time;
      spec.impulses.push_back(Impulse{desc.time, build_jump(desc.position, modes),
                                      build_jump(desc.velocity, modes), desc.position.bound,
                                      desc.velocity.bound});
    }
    built.impulses = std::move(spec);
  }

  if (scenario.selection == "center") {
    built.strategy.kind = SelectionStrategy::Kind::center;
  } else if (scenario.selection == "min_norm_shift") {
    built.strategy.kind = SelectionStrategy::Kind::min_norm_shift;
  } else {
    built.strategy.kind = SelectionStrategy::Kind::random_extreme;
  }
  built.strategy.seed = scenario.seed;

  built.a_list = scenario.regularization_list.empty()
                     ? std::vector<double>{scenario.regularization}
                     : scenario.regularization_list;
  return built;
}

}  // namespace evoctrl

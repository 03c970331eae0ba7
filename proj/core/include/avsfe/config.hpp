#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace avsfe {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// One experiment description. Flat on purpose: config files use a [problem]
// table plus top-level keys, both folded into these fields.
struct RunConfig {
  std::string problem = "eriksson_johnson_1d";
  double epsilon = 0.1;
  double steepness = 500.0;

  std::string mode; // spacetime | converge | adapt | genalpha | slices
  int nx = 4, nt = 4; // base mesh; nt is the time axis in spacetime mode
  int levels = 0;     // uniform refinement levels for converge
  int p_u = 1, p_q = -1, dp = 0;
  double theta = 0.5;
  int adapt_steps = 0;
  double estimate_tol = 0.0;
  double rho_inf = 0.9;
  double tau = 0.0;
  double t_final = 0.0;
  std::vector<double> slice_boundaries;
  std::string strategy = "between"; // between | after
  bool strong_dirichlet = false;
  int quad_order = 0;
  std::string out_dir = "out";
  long long seed = 0;
};

// Line-oriented TOML subset: [tables], key = value with strings, numbers,
// booleans and flat arrays, # comments. Nested tables one level deep.
nlohmann::json toml_subset_to_json(const std::string& text);

RunConfig config_from_json(const nlohmann::json& j);

// Dispatches on the file extension: .json parsed directly, anything else
// goes through the TOML subset reader. Validates before returning.
RunConfig load_config(const std::string& path);

// Throws ConfigError naming every missing or out-of-range field.
void validate(const RunConfig& c);

} // namespace avsfe

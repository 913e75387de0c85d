#pragma once

#include "hsstokes/asymptotics.hpp"
#include "hsstokes/boundary_data.hpp"
#include "hsstokes/fields.hpp"
#include "hsstokes/quadrature.hpp"
#include "hsstokes/verify.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsstokes::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kEnvPrefix = "HSSTOKES_";

struct RunConfig {
  int n = 3;
  data::PhiSpec phi;
  data::BumpSpec bump;
  quad::QuadConfig quad;
  asymptotics::RegionParams regions{1.0 / 32, 1.0 / 64, 0.1, 10.0};
  bool calibrate_regions = false;
  std::uint64_t seed = 1;
  std::string output_dir = "hsstokes-out";

  std::vector<fields::SpaceTimePoint> eval_points;

  double rates_tol_slope = 0.1;
  double rates_min_r2 = 0.98;

  int kernel_points = 20;
  double kernel_tol = 1e-5;
  double psi_tol_slope = 0.05;
  double c_max = 20;

  int residual_points = 10;
  double residual_h = 0.02;
  double residual_min_distance = 0.1;
  int weak_nodes = 10;

  verify::LpScanConfig lp;
  double lp_tol = 0.05;  // relative tolerance on critical exponents

  // Checks every sub-invariant; throws ConfigError.
  void validate() const;
};

// Namespaced keys accepted in config files, e.g. "quad.rel_tol".
std::vector<std::string> known_keys();

// Sets one key from its textual value; ConfigError on unknown keys or bad values.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses flat key=value text with '#' comments. Later assignments win.
RunConfig parse(const std::string& text, const std::string& source = "<config>");
RunConfig load_file(const std::string& path);

// Environment variable overriding `key`: HSSTOKES_ plus the key upper-cased
// with '.' replaced by '_' (quad.rel_tol -> HSSTOKES_QUAD_REL_TOL).
std::string env_name(const std::string& key);

// Applies overrides from `env` (name -> value). Variables with the prefix that
// match no key are rejected.
void apply_env(RunConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_environment();

// Canonical "key=value" lines in key order; the hash of this text identifies the run.
std::string canonical(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

// "x1,...,xn,t" tuples separated by ';'.
std::vector<fields::SpaceTimePoint> parse_points(const std::string& text, int n);

}  // namespace hsstokes::config

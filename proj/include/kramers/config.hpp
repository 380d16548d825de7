#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kramers/dynamics.hpp"
#include "kramers/landscape.hpp"
#include "kramers/potential.hpp"
#include "kramers/quadrature.hpp"

namespace kramers {

inline constexpr const char* kToolVersion = "0.1.0";

struct PotentialBlock {
  std::string family = "quartic-double-well-1d";
  int dimension = 1;
  std::vector<double> parameters;
  double offset = 0.0;
};

struct LandscapeBlock {
  double search_half_width = 2.5;
  int grid_density = 40;
};

// target ball radius: a fixed number, the temperature itself, or the desk default max(eps, 0.2)
struct BallsBlock {
  enum class Rule { fixed, epsilon, desk_default };
  Rule rule = Rule::desk_default;
  double radius = 0.2;
};

struct IntegratorBlock {
  Scheme scheme = Scheme::splitting_obabo;
  double dt = 1e-3;
  // simulation horizon in multiples of the predicted mean time
  double max_time_factor = 50.0;
  bool auto_dt = false;
};

struct EnsembleBlock {
  std::int64_t n_traj = 2000;
  std::uint64_t base_seed = 20240601;
};

struct QuadratureBlock {
  int points = 64;
  double rel_tol = 1e-11;
  double K = 4.0;
};

struct VerifyBlock {
  bool monte_carlo = false;
  int samples = 10000;
};

struct RunConfig {
  PotentialBlock potential;
  LandscapeBlock landscape;
  double gamma = 1.0;
  std::vector<double> epsilons{0.15};
  BallsBlock balls;
  IntegratorBlock integrator;
  EnsembleBlock ensemble;
  QuadratureBlock quadrature;
  VerifyBlock verify;
  std::string output = "out";

  QuadratureOptions quadrature_options() const;
  double target_radius(double epsilon) const;
};

// Parses and validates. Throws ConfigError with "line L, column C" for syntax errors and the
// dotted field path for schema errors. overrides are "dotted.path=value" strings applied to the
// document before validation; value is read as JSON, or as a plain string if that fails.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

// canonical JSON of the resolved config, sorted keys, no whitespace
std::string canonical_json(const RunConfig& cfg);
// FNV-1a 64 of canonical_json without the output path, as 16 hex digits
std::string config_hash(const RunConfig& cfg);

PotentialModel build_model(const PotentialBlock& block);

}  // namespace kramers

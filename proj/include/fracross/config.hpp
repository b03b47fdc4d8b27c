#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fracross/model.hpp"
#include "fracross/particles.hpp"
#include "fracross/solver.hpp"

namespace fracross {

enum class InitialProfile { GaussianBumps, Constant, FromSnapshot };

std::string to_string(InitialProfile p);

struct InitialCondition {
  InitialProfile profile = InitialProfile::GaussianBumps;
  std::vector<std::vector<double>> centers;  ///< one d-vector per species
  std::vector<double> widths;                ///< standard deviation per species
  std::vector<double> masses;                ///< total mass per species
  std::vector<double> values;                ///< constant profile, per species
  std::filesystem::path path;                ///< from-snapshot
};

struct ParticleSettings {
  std::vector<std::size_t> count{1000};  ///< per species
  double dt = 0.01;
  std::optional<double> T;      ///< defaults to the scheme's T
  std::optional<double> delta;  ///< explicit V_N width; otherwise delta_scale N^{-1/(d+2)}
  double delta_scale = 1.0;
  double bandwidth = 0.25;
  LevyConvention convention = LevyConvention::Generator;
  int snapshot_every = 10;
};

struct SweepSettings {
  std::string parameter = "eps";
  std::vector<double> ladder;
  int jobs = 1;
};

struct RunConfig {
  SystemSpec spec;
  SchemeParams scheme;
  int grid_points = 128;
  double half_length = 4.0;
  InitialCondition initial;
  ParticleSettings particles;
  SweepSettings sweep;
  std::filesystem::path output_dir = "out";
  std::optional<std::uint64_t> seed;
  bool pi_from_config = false;

  PeriodicGrid grid() const { return PeriodicGrid(spec.d, grid_points, half_length); }
};

/// Parses sectioned "key = value" text. Overrides are "section.key=value" strings
/// applied on top of the file. Throws ParseError (with line number; 0 for overrides)
/// for syntax, unknown keys or malformed values, and ValidationError when the model
/// or the initial data is inadmissible.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Canonical key = value rendering; parse_config(render_config(c)) reproduces c.
std::string render_config(const RunConfig& config);

/// Initial densities described by the config on its grid.
std::vector<ScalarField> initial_state(const RunConfig& config);

}  // namespace fracross

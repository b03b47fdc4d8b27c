#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracross/config.hpp"
#include "fracross/diagnostics.hpp"
#include "fracross/solver.hpp"

namespace fracross {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitBlowUp = 2;
inline constexpr int kExitCheckFailed = 3;

const char* version();

/// Runs `body`, mapping exceptions to exit codes (NonFinite -> 2, any other error -> 1)
/// and printing the message to `err`.
int run_guarded(std::ostream& err, const std::function<int()>& body);

struct SimulationSummary {
  State final_state;
  std::optional<ResidualSeries> residual;  ///< empty when entropy diagnostics are off
  std::size_t steps = 0;
  double min_value = 0.0;  ///< smallest density value seen over the run
};

/// Runs the PDE and writes diagnostics.csv, state_<step>.fxd and run_manifest.txt
/// into `dir`. On blow-up writes state_last_good.fxd and rethrows NonFinite.
SimulationSummary simulate_to_directory(const RunConfig& config, const std::filesystem::path& dir,
                                        std::ostream& log);

int cmd_simulate(const RunConfig& config, std::ostream& log);

/// Particle run writing particles.csv and density_<step>.fxd; with `compare_dir`
/// also appends L1 distances to the PDE states found there to compare.csv.
int cmd_particles(const RunConfig& config, const std::optional<std::filesystem::path>& compare_dir,
                  std::ostream& log);

int cmd_check(const RunConfig& config, std::ostream& out);

struct SweepRow {
  std::size_t rung = 0;
  double value = 0.0;
  std::optional<double> diff_next;  ///< ||u(p_k)(T) - u(p_{k+1})(T)||_2
  std::optional<double> residual_max;
  std::optional<double> residual_max_abs;
  std::optional<double> residual_integrated;
  double min_value = 0.0;
  std::size_t steps = 0;
};

/// Runs one simulation per ladder rung (up to config.sweep.jobs concurrently), each in
/// its own subdirectory of `dir`, and returns the rows written to sweep.csv.
std::vector<SweepRow> run_sweep(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);

int cmd_sweep(const RunConfig& config, std::ostream& log);

/// sqrt(sum_i ||a_i - b_i||_2^2) on the common grid.
double l2_distance(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b);

}  // namespace fracross

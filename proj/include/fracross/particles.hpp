#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fracross/errors.hpp"
#include "fracross/grid.hpp"
#include "fracross/model.hpp"

namespace fracross {

using Rng = std::mt19937_64;

/// Which Lévy process drives the particles.
///  - Generator: characteristic exponent sigma |xi|^{2 alpha}, matching the PDE.
///  - PaperLiteral: sqrt(2 sigma) L_t with L of stable index alpha, i.e.
///    exponent (2 sigma)^{alpha/2} |xi|^alpha.
enum class LevyConvention { Generator, PaperLiteral };

std::string to_string(LevyConvention c);
LevyConvention levy_convention_from_string(const std::string& name);

/// Positive stable variable with E exp(-lambda S) = exp(-lambda^index), 0 < index < 1
/// (Kanter's representation of the Chambers-Mallows-Stuck construction).
double sample_positive_stable(double index, Rng& rng);

/// Isotropic increment over dt by Gaussian subordination, written into `out` (length d).
void sample_levy_increment(double alpha, double sigma, double dt, std::span<double> out, Rng& rng,
                           LevyConvention convention = LevyConvention::Generator);

/// Characteristic exponent psi with E exp(i xi X_dt) = exp(-dt psi(|xi|)).
double levy_exponent(double alpha, double sigma, double xi, LevyConvention convention = LevyConvention::Generator);

struct ParticleEnsemble {
  int dim = 1;
  double half_length = 1.0;
  double t = 0.0;
  /// positions[i] holds N_i points of species i, d coordinates each (row-major).
  std::vector<std::vector<double>> positions;
  Rng rng;

  std::size_t count(int species) const { return positions.at(species).size() / static_cast<std::size_t>(dim); }
  int species() const noexcept { return static_cast<int>(positions.size()); }
};

/// Maps a coordinate into [-L, L).
double wrap_coordinate(double x, double half_length);

/// Draws `count` points from a nonnegative density on the grid (uniform within cells).
std::vector<double> sample_from_density(const ScalarField& density, std::size_t count, Rng& rng);

/// Default width of V_N: N^{-1/(d+2)} times `scale`.
double default_potential_width(std::size_t particles, int dim, double scale = 1.0);

/// Radial tabulation of grad (-Delta)^{(beta-1)/2} V for a unit-mass Gaussian V.
struct PotentialSpec {
  int dim = 1;
  double half_length = 1.0;
  double beta = 0.5;
  double delta = 0.1;
  double spacing = 0.0;               ///< radial node spacing
  std::vector<double> radial_values;  ///< G_r at r = j * spacing, j = 0..; zero beyond L

  /// Radial component at distance r (linear interpolation).
  double radial(double r) const;
  /// G(x) = G_r(|x|) x / |x|, written into `out`.
  void evaluate(std::span<const double> x, std::span<double> out) const;
};

/// Builds the table spectrally on a fine periodic grid with at least `points_per_delta`
/// nodes per delta. Throws UnresolvedPotential when delta < 2 * spacing.
PotentialSpec build_potential(int dim, double half_length, double beta, double delta, int points_per_delta = 8);

/// Whole-space closed form of G_r for the Gaussian (Kummer function); used as a check.
double potential_gradient_closed_form(int dim, double beta, double delta, double r);

/// -sum_j (1/N_j) sum_l a_ij G(X_i^k - X_j^l) for every particle, minimum-image differences.
std::vector<std::vector<double>> pair_drift(const ParticleEnsemble& ensemble, const Matrix& A,
                                            const PotentialSpec& potential);

/// One Euler-Maruyama step of size dt: drift plus independent Lévy increments, then wrap.
void em_step(ParticleEnsemble& ensemble, const SystemSpec& spec, const PotentialSpec& potential, double dt,
             LevyConvention convention = LevyConvention::Generator);

/// Histogram on the grid with `mass[i] / N_i` per particle, smoothed by a compact quartic
/// bump of the given width when bandwidth > 0 (bandwidth must then be at least h).
std::vector<ScalarField> empirical_density(const ParticleEnsemble& ensemble, const PeriodicGrid& grid,
                                           double bandwidth, std::span<const double> mass = {});

/// The smoothing applied by empirical_density, for comparing against a field.
ScalarField smooth_field(const ScalarField& f, double bandwidth);

}  // namespace fracross

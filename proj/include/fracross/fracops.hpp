#pragma once

#include <span>
#include <string>
#include <vector>

#include "fracross/grid.hpp"
#include "fracross/spectral.hpp"

namespace fracross {

/// c_{d,s} = 4^s Gamma(d/2+s) / (pi^{d/2} |Gamma(-s)|), 0 < s < 1.
double frac_laplacian_constant(int d, double s);

/// gamma with FT(|x|^{2t-d}) = gamma |k|^{-2t}, 0 < t < d/2.
double riesz_fourier_constant(int d, double t);

/// (-Delta)^s as the multiplier |k|^{2s}; the zero mode maps to 0.
ScalarField frac_laplacian_spectral(const ScalarField& f, double s);

struct QuadratureOptions {
  /// Sum each offset's weight over all periodic images of the box.
  bool periodize = true;
  /// Subtract the leading h^{2-2s} lattice error with the Epstein zeta constant.
  bool singular_correction = true;
};

/// Principal-value sum c_{d,s} sum_{0<|y|<=r_cut} (f(x) - f(x-y)) w(y) h^d, with
/// the y and -y terms grouped. w(y) = |y|^{-d-2s}, or its periodic image sum.
/// |y| in the cutoff test is the max-norm of the minimum-image offset, so
/// r_cut = L covers the whole cell. Throws InvalidCutoff when r_cut > L or r_cut <= 0.
ScalarField frac_laplacian_quadrature(const ScalarField& f, double s, double r_cut,
                                      QuadratureOptions options = {});

/// Components of grad (-Delta)^{(beta-1)/2} f: multiplier i k_a |k|^{beta-1}.
std::vector<ScalarField> nonlocal_gradient(const ScalarField& f, double beta);

/// Plain spectral gradient (i k_a).
std::vector<ScalarField> spectral_gradient(const ScalarField& f);

/// Spectral divergence sum_a i k_a F_a; the zero mode of the result is exactly 0.
ScalarField spectral_divergence(std::span<const ScalarField> components);

enum class KernelKind { RegularizedRieszHalf, ConvolutionSquare, Mollifier, Potential, Custom };

std::string to_string(KernelKind kind);

/// Kernel sampled on grid displacements (index 0 is the origin, minimum-image
/// offsets) together with its transform h^d * DFT. Radial kernels have a real
/// transform up to round-off.
struct KernelTable {
  KernelKind kind = KernelKind::Custom;
  /// s/2 for the half kernel, s for the square; rho for the mollifier.
  double order = 0.0;
  /// eps for Riesz tables, rho for the mollifier.
  double scale = 0.0;
  PeriodicGrid grid;
  std::vector<double> values;
  Spectrum spectrum;
  /// Limit multiplier constant: spectrum -> fourier_constant |k|^{-2 order} as eps -> 0.
  double fourier_constant = 1.0;
};

/// Fills `spectrum` from `values` (h^d DFT).
void refresh_spectrum(KernelTable& table);

/// C^2 radial cutoff: 1 on [eps, 1/eps], 0 outside [eps/2, 2/eps], quintic blend between.
double riesz_cutoff(double r, double eps);

struct RegularizedRiesz {
  KernelTable half;  ///< cutoff(|x|) |x|^{s-d}
  KernelTable full;  ///< half * half
  double s = 0.0;    ///< (1 - beta)/2
  std::vector<std::string> warnings;
};

/// Regularized Riesz kernel pair for s = (1-beta)/2. Throws EpsilonTooLarge.
RegularizedRiesz build_regularized_riesz(const PeriodicGrid& grid, double beta, double eps);

/// W_rho = rho^{-d} c_d (1 - |x/rho|^2)^2_+, discretely renormalized to unit mass.
/// Throws RhoUnresolved when rho < 2h.
KernelTable build_mollifier(const PeriodicGrid& grid, double rho);

/// Discrete delta, 1/h^d at the origin.
KernelTable delta_kernel(const PeriodicGrid& grid);

/// Wraps an arbitrary displacement-indexed sample as a kernel table.
KernelTable kernel_from_values(const PeriodicGrid& grid, std::vector<double> values);

/// (f * K)(x) = sum_y f(y) K(x - y) h^d via the transform. Throws GridMismatch.
ScalarField periodic_convolve(const ScalarField& f, const KernelTable& kernel);

/// Normalized Riesz flux field grad (K^(eps) * f) / fourier_constant.
std::vector<ScalarField> regularized_nonlocal_gradient(const ScalarField& f, const KernelTable& full);

}  // namespace fracross

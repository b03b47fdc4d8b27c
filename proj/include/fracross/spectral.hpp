#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fracross/grid.hpp"

namespace fracross {

using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized forward DFT: F_k = sum_x f(x) exp(-i k.x), flat layout as the grid.
Spectrum forward_transform(const ScalarField& f);

/// Inverse DFT divided by N^d. The imaginary residue is discarded.
ScalarField inverse_transform(const PeriodicGrid& grid, const Spectrum& spectrum);

/// Largest |Im| of the inverse transform relative to the largest |Re|.
double imaginary_residue(const PeriodicGrid& grid, const Spectrum& spectrum);

/// Calls f(flat, k, |k|^2, idx) for every Fourier mode; k holds the d wavenumbers.
template <typename F>
void for_each_mode(const PeriodicGrid& grid, F&& f) {
  const auto d = static_cast<std::size_t>(grid.dim());
  std::vector<double> k(d, 0.0);
  for_each_index(grid, [&](std::size_t flat, std::span<const int> idx) {
    double k2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      k[a] = grid.wavenumber(idx[a]);
      k2 += k[a] * k[a];
    }
    f(flat, std::span<const double>(k), k2, idx);
  });
}

/// Multiplies each mode by m(k, |k|^2) and transforms back.
template <typename M>
ScalarField apply_multiplier(const ScalarField& f, M&& m) {
  Spectrum s = forward_transform(f);
  for_each_mode(f.grid, [&](std::size_t flat, std::span<const double> k, double k2, std::span<const int>) {
    s[flat] *= m(k, k2);
  });
  return inverse_transform(f.grid, s);
}

/// True when every axis frequency satisfies the 2/3 rule, |j| < N/3.
bool passes_two_thirds_rule(const PeriodicGrid& grid, std::span<const int> idx);

/// Zeroes modes outside the 2/3 band in place.
void dealias_in_place(const PeriodicGrid& grid, Spectrum& spectrum);

/// L^2 norm on the grid via Parseval: sqrt(h^d / N^d * sum |F_k|^2).
double parseval_l2(const PeriodicGrid& grid, const Spectrum& spectrum);

}  // namespace fracross

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracross {

/// Uniform periodic grid on the box [-L, L)^d with N points per axis.
///
/// Points are x_j = -L + j h with h = 2L/N. Flat indices are row-major with
/// the last axis fastest. Axis index j maps to the signed frequency
/// j for j < N/2 and j - N otherwise, so the Nyquist mode is -N/2 and the
/// wavenumber is (pi/L) times the signed frequency.
class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  PeriodicGrid(int dim, int points_per_axis, double half_length);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double half_length() const noexcept { return half_length_; }
  double spacing() const noexcept { return 2.0 * half_length_ / n_; }
  double cell_volume() const noexcept;
  double volume() const noexcept;
  std::size_t size() const noexcept { return size_; }

  /// Axis index of `flat` along `axis`.
  int axis_index(std::size_t flat, int axis) const noexcept;
  /// Box coordinate -L + j h of `flat` along `axis`.
  double coordinate(std::size_t flat, int axis) const noexcept;
  /// |x|^2 using box coordinates.
  double radius_squared(std::size_t flat) const noexcept;

  /// Signed offset of axis index j, in [-N/2, N/2).
  int signed_index(int j) const noexcept { return j < n_ / 2 ? j : j - n_; }
  double wavenumber(int j) const noexcept;
  bool is_nyquist(int j) const noexcept { return j == n_ / 2; }

  /// |y|^2 where y is the displacement of `flat` from index 0 (minimum image).
  double offset_radius_squared(std::size_t flat) const noexcept;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int dim_ = 1;
  int n_ = 2;
  double half_length_ = 1.0;
  std::size_t size_ = 2;
};

/// Real-valued field sampled on a periodic grid.
struct ScalarField {
  PeriodicGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  ScalarField(const PeriodicGrid& g, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  /// Riemann sum of the values times the cell volume.
  double integral() const;
  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;
};

/// Row-major multi-index iteration helper: calls f(flat, idx) for every point.
template <typename F>
void for_each_index(const PeriodicGrid& grid, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(grid.dim()), 0);
  const int n = grid.points_per_axis();
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    f(flat, std::span<const int>(idx));
    for (int axis = grid.dim() - 1; axis >= 0; --axis) {
      if (++idx[axis] < n) break;
      idx[axis] = 0;
    }
  }
}

void require_same_grid(const ScalarField& a, const ScalarField& b);

}  // namespace fracross

#include "fracross/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fracross/errors.hpp"

namespace fracross {

PeriodicGrid::PeriodicGrid(int dim, int points_per_axis, double half_length)
    : dim_(dim), n_(points_per_axis), half_length_(half_length) {
  if (dim < 1) throw std::invalid_argument("grid dimension must be >= 1");
  if (points_per_axis < 2 || points_per_axis % 2 != 0)
    throw std::invalid_argument("points per axis must be even and >= 2");
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw std::invalid_argument("half length must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(points_per_axis);
}

double PeriodicGrid::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

double PeriodicGrid::volume() const noexcept { return std::pow(2.0 * half_length_, dim_); }

int PeriodicGrid::axis_index(std::size_t flat, int axis) const noexcept {
  for (int a = dim_ - 1; a > axis; --a) flat /= static_cast<std::size_t>(n_);
  return static_cast<int>(flat % static_cast<std::size_t>(n_));
}

double PeriodicGrid::coordinate(std::size_t flat, int axis) const noexcept {
  return -half_length_ + spacing() * axis_index(flat, axis);
}

double PeriodicGrid::radius_squared(std::size_t flat) const noexcept {
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double x = coordinate(flat, a);
    r2 += x * x;
  }
  return r2;
}

double PeriodicGrid::wavenumber(int j) const noexcept {
  return std::numbers::pi / half_length_ * signed_index(j);
}

double PeriodicGrid::offset_radius_squared(std::size_t flat) const noexcept {
  const double h = spacing();
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double y = h * signed_index(axis_index(flat, a));
    r2 += y * y;
  }
  return r2;
}

ScalarField::ScalarField(const PeriodicGrid& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw std::invalid_argument("field length does not match grid");
}

double ScalarField::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }

double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid) || a.size() != b.size()) throw GridMismatch("fields live on different grids");
}

}  // namespace fracross

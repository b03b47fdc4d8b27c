#include "fracross/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

namespace fracross {

namespace {

// The FFTW planner is not reentrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  fftw_complex* buffer = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t size = 0;

  explicit Plan(const PeriodicGrid& grid) : size(grid.size()) {
    std::vector<int> dims(static_cast<std::size_t>(grid.dim()), grid.points_per_axis());
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(size);
    fwd = fftw_plan_dft(grid.dim(), dims.data(), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft(grid.dim(), dims.data(), buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buffer);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buffer); }
};

// One cache per thread keeps buffers confined to their execution context.
Plan& plan_for(const PeriodicGrid& grid) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
  auto key = std::make_pair(grid.dim(), grid.points_per_axis());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Plan>(grid)).first;
  return *it->second;
}

Spectrum backward_raw(const PeriodicGrid& grid, const Spectrum& spectrum) {
  Plan& plan = plan_for(grid);
  std::copy(spectrum.begin(), spectrum.end(), plan.data());
  fftw_execute(plan.bwd);
  const double scale = 1.0 / static_cast<double>(grid.size());
  Spectrum out(plan.data(), plan.data() + plan.size);
  for (auto& c : out) c *= scale;
  return out;
}

}  // namespace

Spectrum forward_transform(const ScalarField& f) {
  Plan& plan = plan_for(f.grid);
  auto* buf = plan.data();
  for (std::size_t i = 0; i < plan.size; ++i) buf[i] = {f.values[i], 0.0};
  fftw_execute(plan.fwd);
  return Spectrum(buf, buf + plan.size);
}

ScalarField inverse_transform(const PeriodicGrid& grid, const Spectrum& spectrum) {
  Spectrum raw = backward_raw(grid, spectrum);
  ScalarField out(grid);
  for (std::size_t i = 0; i < raw.size(); ++i) out.values[i] = raw[i].real();
  return out;
}

double imaginary_residue(const PeriodicGrid& grid, const Spectrum& spectrum) {
  Spectrum raw = backward_raw(grid, spectrum);
  double re = 0.0, im = 0.0;
  for (const auto& c : raw) {
    re = std::max(re, std::abs(c.real()));
    im = std::max(im, std::abs(c.imag()));
  }
  return re > 0.0 ? im / re : im;
}

bool passes_two_thirds_rule(const PeriodicGrid& grid, std::span<const int> idx) {
  const int n = grid.points_per_axis();
  return std::all_of(idx.begin(), idx.end(),
                     [&](int j) { return 3 * std::abs(grid.signed_index(j)) < n; });
}

void dealias_in_place(const PeriodicGrid& grid, Spectrum& spectrum) {
  for_each_index(grid, [&](std::size_t flat, std::span<const int> idx) {
    if (!passes_two_thirds_rule(grid, idx)) spectrum[flat] = 0.0;
  });
}

double parseval_l2(const PeriodicGrid& grid, const Spectrum& spectrum) {
  double s = 0.0;
  for (const auto& c : spectrum) s += std::norm(c);
  return std::sqrt(s * grid.cell_volume() / static_cast<double>(grid.size()));
}

}  // namespace fracross

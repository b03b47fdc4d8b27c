#include "fracross/fracops.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fracross/errors.hpp"
#include "fracross/special.hpp"

namespace fracross {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void require_order(double s, const char* who) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument(std::string(who) + ": order must lie in (0,1)");
}

// Flat index of x + offset, both given as axis indices.
std::size_t shifted(const PeriodicGrid& grid, std::span<const int> x, std::span<const int> off, int sign) {
  const int n = grid.points_per_axis();
  std::size_t flat = 0;
  for (int a = 0; a < grid.dim(); ++a) {
    int j = (x[a] + sign * off[a]) % n;
    if (j < 0) j += n;
    flat = flat * n + j;
  }
  return flat;
}

// sum_{p in Z^d} |y + 2 L p|^{-a}
double periodized_weight(const PeriodicGrid& grid, std::span<const int> off, double a) {
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  if (grid.dim() == 1) {
    const double m = std::abs(grid.signed_index(off[0]));
    const double q = m / n;
    return std::pow(h * n, -a) * (special::hurwitz_zeta(a, q) + special::hurwitz_zeta(a, 1.0 - q));
  }
  constexpr int kImages = 8;
  const int d = grid.dim();
  const double period = 2.0 * grid.half_length();
  std::vector<double> y(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) y[c] = h * grid.signed_index(off[c]);
  std::vector<int> p(static_cast<std::size_t>(d), -kImages);
  double sum = 0.0;
  for (;;) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double z = y[c] + period * p[c];
      r2 += z * z;
    }
    if (r2 > 0.0) sum += std::pow(r2, -0.5 * a);
    int c = 0;
    while (c < d && ++p[c] > kImages) p[c++] = -kImages;
    if (c == d) break;
  }
  // Remaining images approximated by the integral outside the equal-volume ball.
  const double side = (2.0 * kImages + 1.0) * period;
  const double ball_volume = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  const double radius = side / std::pow(ball_volume, 1.0 / d);
  const double s2 = a - d;
  sum += special::sphere_area(d) * std::pow(radius, -s2) / s2 / std::pow(period, d);
  return sum;
}

}  // namespace

double frac_laplacian_constant(int d, double s) {
  require_order(s, "frac_laplacian_constant");
  const double pi = std::numbers::pi;
  // |Gamma(-s)| = pi / (sin(pi s) Gamma(1+s))
  const double abs_gamma_neg = pi / (std::sin(pi * s) * std::tgamma(1.0 + s));
  return std::pow(4.0, s) * std::tgamma(0.5 * d + s) / (std::pow(pi, 0.5 * d) * abs_gamma_neg);
}

double riesz_fourier_constant(int d, double t) {
  if (!(t > 0.0 && t < 0.5 * d)) throw std::invalid_argument("riesz_fourier_constant: need 0 < t < d/2");
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, 2.0 * t) * std::tgamma(t) / std::tgamma(0.5 * d - t);
}

ScalarField frac_laplacian_spectral(const ScalarField& f, double s) {
  require_order(s, "frac_laplacian_spectral");
  return apply_multiplier(f, [s](std::span<const double>, double k2) -> std::complex<double> {
    return k2 == 0.0 ? 0.0 : std::pow(k2, s);
  });
}

ScalarField frac_laplacian_quadrature(const ScalarField& f, double s, double r_cut, QuadratureOptions options) {
  require_order(s, "frac_laplacian_quadrature");
  const PeriodicGrid& grid = f.grid;
  if (!(r_cut > 0.0) || r_cut > grid.half_length()) {
    std::ostringstream os;
    os << "cutoff radius " << r_cut << " must lie in (0, L = " << grid.half_length() << "]";
    throw InvalidCutoff(os.str());
  }
  const int d = grid.dim();
  const double h = grid.spacing();
  const double a = d + 2.0 * s;
  const double c = frac_laplacian_constant(d, s);
  const double reach = r_cut * (1.0 + 1e-14);

  struct Offset {
    std::vector<int> idx;
    double weight;
  };
  std::vector<Offset> offsets;
  for_each_index(grid, [&](std::size_t flat, std::span<const int> idx) {
    const double r2 = grid.offset_radius_squared(flat);
    double sup = 0.0;
    for (int j : idx) sup = std::max(sup, h * std::abs(grid.signed_index(j)));
    if (r2 == 0.0 || sup > reach) return;
    const double w = options.periodize ? periodized_weight(grid, idx, a) : std::pow(r2, -0.5 * a);
    offsets.push_back({std::vector<int>(idx.begin(), idx.end()), w});
  });

  ScalarField out(grid);
  const double scale = 0.5 * c * grid.cell_volume();
  for_each_index(grid, [&](std::size_t x, std::span<const int> xi) {
    const double fx = f[x];
    double acc = 0.0;
    for (const Offset& o : offsets)
      acc += o.weight * (2.0 * fx - f[shifted(grid, xi, o.idx, -1)] - f[shifted(grid, xi, o.idx, +1)]);
    out[x] = scale * acc;
  });

  if (options.singular_correction) {
    const double zeta = special::epstein_zeta(d, d + 2.0 * s - 2.0);
    const double coef = c * std::pow(h, 2.0 - 2.0 * s) * zeta / (2.0 * d);
    std::vector<int> unit(static_cast<std::size_t>(d), 0);
    for_each_index(grid, [&](std::size_t x, std::span<const int> xi) {
      double neg_lap = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        unit.assign(static_cast<std::size_t>(d), 0);
        unit[ax] = 1;
        neg_lap += 2.0 * f[x] - f[shifted(grid, xi, unit, 1)] - f[shifted(grid, xi, unit, -1)];
      }
      out[x] -= coef * neg_lap / (h * h);
    });
  }
  return out;
}

std::vector<ScalarField> nonlocal_gradient(const ScalarField& f, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("nonlocal_gradient: beta must lie in (0,1]");
  const PeriodicGrid& grid = f.grid;
  const Spectrum fh = forward_transform(f);
  std::vector<ScalarField> out;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    Spectrum g(fh.size());
    for_each_mode(grid, [&](std::size_t flat, std::span<const double> k, double k2, std::span<const int> idx) {
      if (k2 == 0.0 || grid.is_nyquist(idx[axis])) {
        g[flat] = 0.0;
        return;
      }
      g[flat] = kI * k[axis] * std::pow(k2, 0.5 * (beta - 1.0)) * fh[flat];
    });
    out.push_back(inverse_transform(grid, g));
  }
  return out;
}

std::vector<ScalarField> spectral_gradient(const ScalarField& f) {
  const PeriodicGrid& grid = f.grid;
  const Spectrum fh = forward_transform(f);
  std::vector<ScalarField> out;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    Spectrum g(fh.size());
    for_each_mode(grid, [&](std::size_t flat, std::span<const double> k, double, std::span<const int> idx) {
      g[flat] = grid.is_nyquist(idx[axis]) ? std::complex<double>(0.0) : kI * k[axis] * fh[flat];
    });
    out.push_back(inverse_transform(grid, g));
  }
  return out;
}

ScalarField spectral_divergence(std::span<const ScalarField> components) {
  if (components.empty()) throw std::invalid_argument("spectral_divergence: no components");
  const PeriodicGrid& grid = components.front().grid;
  if (components.size() != static_cast<std::size_t>(grid.dim()))
    throw std::invalid_argument("spectral_divergence: need d components");
  Spectrum acc(grid.size(), 0.0);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    require_same_grid(components.front(), components[axis]);
    const Spectrum fh = forward_transform(components[axis]);
    for_each_mode(grid, [&](std::size_t flat, std::span<const double> k, double, std::span<const int> idx) {
      if (!grid.is_nyquist(idx[axis])) acc[flat] += kI * k[axis] * fh[flat];
    });
  }
  acc[0] = 0.0;
  return inverse_transform(grid, acc);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::RegularizedRieszHalf: return "regularized-riesz-half";
    case KernelKind::ConvolutionSquare: return "convolution-square";
    case KernelKind::Mollifier: return "mollifier";
    case KernelKind::Potential: return "potential";
    case KernelKind::Custom: return "custom";
  }
  return "custom";
}

void refresh_spectrum(KernelTable& table) {
  const Spectrum s = forward_transform(ScalarField(table.grid, table.values));
  const double hd = table.grid.cell_volume();
  table.spectrum.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) table.spectrum[i] = hd * s[i];
}

double riesz_cutoff(double r, double eps) {
  auto blend = [](double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); };
  const double inner = 0.5 * eps, outer = 1.0 / eps;
  if (r <= inner || r >= 2.0 * outer) return 0.0;
  if (r < eps) return blend((r - inner) / inner);
  if (r <= outer) return 1.0;
  return 1.0 - blend((r - outer) / outer);
}

RegularizedRiesz build_regularized_riesz(const PeriodicGrid& grid, double beta, double eps) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("build_regularized_riesz: beta must lie in (0,1)");
  if (!(eps > 0.0) || 2.0 / eps <= eps) throw EpsilonTooLarge("eps leaves no band where the cutoff equals 1");
  if (!(eps < 1.0)) throw EpsilonTooLarge("eps must lie in (0,1)");

  RegularizedRiesz out;
  out.s = 0.5 * (1.0 - beta);
  const int d = grid.dim();
  const double h = grid.spacing();
  const double L = grid.half_length();
  if (0.5 * eps < h) {
    std::ostringstream os;
    os << "inner cutoff band eps/2 = " << 0.5 * eps << " is below the grid spacing " << h;
    out.warnings.push_back(os.str());
  }

  KernelTable& half = out.half;
  half.kind = KernelKind::RegularizedRieszHalf;
  half.order = 0.5 * out.s;
  half.scale = eps;
  half.grid = grid;
  half.values.assign(grid.size(), 0.0);
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    const double r = std::sqrt(grid.offset_radius_squared(flat));
    if (r == 0.0 || r > L * (1.0 + 1e-14)) continue;
    half.values[flat] = riesz_cutoff(r, eps) * std::pow(r, out.s - d);
  }
  refresh_spectrum(half);
  half.fourier_constant = riesz_fourier_constant(d, half.order);

  KernelTable& full = out.full;
  full.kind = KernelKind::ConvolutionSquare;
  full.order = out.s;
  full.scale = eps;
  full.grid = grid;
  full.spectrum.resize(grid.size());
  Spectrum sq(grid.size());
  const double hd = grid.cell_volume();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    full.spectrum[i] = half.spectrum[i] * half.spectrum[i];
    sq[i] = full.spectrum[i] / hd;
  }
  full.values = inverse_transform(grid, sq).values;
  full.fourier_constant = half.fourier_constant * half.fourier_constant;
  return out;
}

KernelTable build_mollifier(const PeriodicGrid& grid, double rho) {
  const double h = grid.spacing();
  if (!(rho < grid.half_length())) throw std::invalid_argument("mollifier width must be below L");
  if (!(rho >= 2.0 * h)) {
    std::ostringstream os;
    os << "mollifier width " << rho << " is below twice the grid spacing " << h;
    throw RhoUnresolved(os.str());
  }
  const int d = grid.dim();
  // int_{|x|<1} (1-|x|^2)^2 dx = |S^{d-1}| * 8 / (d (d+2) (d+4))
  const double c_d = d * (d + 2.0) * (d + 4.0) / (8.0 * special::sphere_area(d));
  KernelTable t;
  t.kind = KernelKind::Mollifier;
  t.order = rho;
  t.scale = rho;
  t.grid = grid;
  t.values.assign(grid.size(), 0.0);
  double mass = 0.0;
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    const double q = 1.0 - grid.offset_radius_squared(flat) / (rho * rho);
    if (q <= 0.0) continue;
    t.values[flat] = c_d * q * q / std::pow(rho, d);
    mass += t.values[flat];
  }
  mass *= grid.cell_volume();
  for (double& v : t.values) v /= mass;
  refresh_spectrum(t);
  return t;
}

KernelTable delta_kernel(const PeriodicGrid& grid) {
  std::vector<double> v(grid.size(), 0.0);
  v[0] = 1.0 / grid.cell_volume();
  return kernel_from_values(grid, std::move(v));
}

KernelTable kernel_from_values(const PeriodicGrid& grid, std::vector<double> values) {
  KernelTable t;
  t.grid = grid;
  t.values = std::move(values);
  if (t.values.size() != grid.size()) throw GridMismatch("kernel sample does not match grid");
  refresh_spectrum(t);
  return t;
}

ScalarField periodic_convolve(const ScalarField& f, const KernelTable& kernel) {
  if (!(f.grid == kernel.grid) || kernel.spectrum.size() != f.size())
    throw GridMismatch("kernel and field live on different grids");
  Spectrum s = forward_transform(f);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= kernel.spectrum[i];
  return inverse_transform(f.grid, s);
}

std::vector<ScalarField> regularized_nonlocal_gradient(const ScalarField& f, const KernelTable& full) {
  ScalarField conv = periodic_convolve(f, full);
  for (double& v : conv.values) v /= full.fourier_constant;
  return spectral_gradient(conv);
}

}  // namespace fracross

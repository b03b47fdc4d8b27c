#include "fracross/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fracross/errors.hpp"
#include "fracross/fracops.hpp"
#include "fracross/spectral.hpp"

namespace fracross {

void require_admissible(std::span<const ScalarField> u) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lo = u[i].min();
    const double hi = std::max(0.0, u[i].max());
    if (lo < -kNegativityTol * hi || (hi == 0.0 && lo < 0.0)) {
      std::ostringstream os;
      os << "species " << i + 1 << " has minimum " << lo << " below the admissible floor";
      throw NonAdmissible(os.str());
    }
  }
}

double entropy_functional(std::span<const ScalarField> u, std::span<const double> pi) {
  if (pi.size() != u.size()) throw std::invalid_argument("entropy_functional: pi length mismatch");
  require_admissible(u);
  double h = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = 0.0;
    for (double v : u[i].values)
      if (v > 0.0) s += v * std::log(std::max(v, kLogFloor));
    h += pi[i] * s * u[i].grid.cell_volume();
  }
  return h;
}

namespace {

// sum_k |k|^{2p} |F_k|^2 * h^d / N^d
double weighted_energy(const ScalarField& f, double p) {
  const Spectrum fh = forward_transform(f);
  double acc = 0.0;
  for_each_mode(f.grid, [&](std::size_t flat, std::span<const double>, double k2, std::span<const int>) {
    if (k2 > 0.0) acc += std::pow(k2, p) * std::norm(fh[flat]);
  });
  return acc * f.grid.cell_volume() / static_cast<double>(f.grid.size());
}

}  // namespace

EntropyProduction entropy_production(std::span<const ScalarField> u, const SystemSpec& spec, double lambda) {
  require_admissible(u);
  EntropyProduction out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (spec.sigma[i] > 0.0) {
      ScalarField root = u[i];
      for (double& v : root.values) v = std::sqrt(std::max(v, 0.0));
      out.frac += 4.0 * spec.sigma[i] * weighted_energy(root, spec.alpha);
    }
    // |i k |k|^{(beta-1)/2}|^2 = |k|^{beta+1}
    if (lambda != 0.0) out.cross += lambda * weighted_energy(u[i], 0.5 * (spec.beta + 1.0));
  }
  return out;
}

ResidualSeries entropy_inequality_residual(std::span<const double> entropy, std::span<const double> production,
                                           std::span<const double> dt, bool midpoint) {
  if (entropy.size() != production.size() || dt.size() + 1 != entropy.size())
    throw std::invalid_argument("entropy_inequality_residual: need K+1 entropy/production values and K steps");
  ResidualSeries out;
  out.max = dt.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  double dissipated = 0.0;
  for (std::size_t k = 0; k < dt.size(); ++k) {
    const double d = midpoint ? 0.5 * (production[k] + production[k + 1]) : production[k];
    const double r = entropy[k + 1] - entropy[k] + dt[k] * d;
    out.per_step.push_back(r);
    out.max = std::max(out.max, r);
    dissipated += dt[k] * d;
  }
  if (!entropy.empty()) out.integrated = entropy.back() - entropy.front() + dissipated;
  return out;
}

ConservedQuantities conserved_quantities(std::span<const ScalarField> u, double m) {
  ConservedQuantities out;
  for (const ScalarField& f : u) {
    double mass = 0.0, moment = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) {
      mass += f[x];
      moment += f[x] * std::pow(1.0 + f.grid.radius_squared(x), 0.5 * m);
    }
    out.mass.push_back(mass * f.grid.cell_volume());
    out.moment.push_back(moment * f.grid.cell_volume());
  }
  return out;
}

std::vector<std::vector<double>> lp_norms(std::span<const ScalarField> u, std::span<const double> exponents) {
  std::vector<std::vector<double>> out;
  for (const ScalarField& f : u) {
    std::vector<double> row;
    for (double p : exponents) {
      if (!(p >= 1.0)) throw std::invalid_argument("lp_norms: exponents must be >= 1");
      if (std::isinf(p)) {
        row.push_back(f.max_abs());
        continue;
      }
      double s = 0.0;
      for (double v : f.values) s += std::pow(std::abs(v), p);
      row.push_back(std::pow(s * f.grid.cell_volume(), 1.0 / p));
    }
    out.push_back(std::move(row));
  }
  return out;
}

StroockVaropoulosTerms stroock_varopoulos_terms(const ScalarField& u, double s, double r_cut) {
  const PeriodicGrid& g = u.grid;
  if (!(r_cut > 0.0) || r_cut > g.half_length() * std::sqrt(double(g.dim())) * (1.0 + 1e-14))
    throw InvalidCutoff("stroock_varopoulos: cutoff outside (0, L sqrt(d)]");
  StroockVaropoulosTerms out;
  std::vector<double> v(u.values);
  for (double& x : v) {
    if (x < 0.0 || !std::isfinite(x)) throw NonPositiveField("Stroock-Varopoulos gap needs a positive field");
    if (x == 0.0) {
      x = kLogFloor;
      out.floor_used = true;
    }
  }
  std::vector<double> logs(v.size()), roots(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    logs[i] = std::log(v[i]);
    roots[i] = std::sqrt(v[i]);
  }
  const int d = g.dim();
  const int n = g.points_per_axis();
  const double h = g.spacing();
  const double c = frac_laplacian_constant(d, s);
  const double cut2 = r_cut * r_cut * (1.0 + 1e-14);

  // weight per displacement index (minimum image), zero outside the cutoff
  std::vector<double> w(g.size(), 0.0);
  const double h2d = std::pow(h, 2.0 * d);
  for (std::size_t off = 1; off < g.size(); ++off) {
    const double r2 = g.offset_radius_squared(off);
    if (r2 <= cut2) w[off] = std::pow(r2, -0.5 * (d + 2.0 * s)) * h2d;
  }

  double lhs = 0.0, rhs = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t y = 0; y < g.size(); ++y) {
      if (x == y) continue;
      // displacement index of x - y
      std::size_t off = 0, fx = x, fy = y, stride = 1;
      for (int a = 0; a < d; ++a) {
        const int jx = static_cast<int>(fx % n), jy = static_cast<int>(fy % n);
        fx /= n;
        fy /= n;
        off += static_cast<std::size_t>(((jx - jy) % n + n) % n) * stride;
        stride *= n;
      }
      const double wxy = w[off];
      if (wxy == 0.0) continue;
      const double dr = roots[x] - roots[y];
      lhs += wxy * (v[x] - v[y]) * (logs[x] - logs[y]);
      rhs += wxy * dr * dr;
    }
  }
  out.lhs = 0.5 * c * lhs;
  out.rhs = 2.0 * c * rhs;
  out.gap = out.lhs - out.rhs;
  return out;
}

double stroock_varopoulos_gap(const ScalarField& u, double s, double r_cut) {
  return stroock_varopoulos_terms(u, s, r_cut).gap;
}

}  // namespace fracross

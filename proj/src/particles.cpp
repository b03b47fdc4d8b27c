#include "fracross/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "fracross/fracops.hpp"

namespace fracross {

namespace {

constexpr int kMaxDim = 3;
constexpr std::size_t kMaxFinePoints = std::size_t{1} << 22;

double open_unit(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = 0.0;
  while (u == 0.0) u = unit(rng);
  return u;
}

std::size_t nearest_index(double x, double half_length, int n) {
  const double h = 2.0 * half_length / n;
  long j = std::lround((x + half_length) / h);
  j %= n;
  if (j < 0) j += n;
  return static_cast<std::size_t>(j);
}

}  // namespace

std::string to_string(LevyConvention c) {
  return c == LevyConvention::Generator ? "generator" : "paper-literal";
}

LevyConvention levy_convention_from_string(const std::string& name) {
  if (name == "generator") return LevyConvention::Generator;
  if (name == "paper-literal") return LevyConvention::PaperLiteral;
  throw std::invalid_argument("unknown Levy convention '" + name + "' (expected generator or paper-literal)");
}

double sample_positive_stable(double index, Rng& rng) {
  if (!(index > 0.0 && index < 1.0)) throw std::invalid_argument("stable index must lie in (0,1)");
  const double u = std::numbers::pi * open_unit(rng);
  const double e = -std::log(open_unit(rng));
  const double a = std::pow(std::pow(std::sin(index * u), index) * std::pow(std::sin((1.0 - index) * u), 1.0 - index) /
                                std::sin(u),
                            1.0 / (1.0 - index));
  return std::pow(a / e, (1.0 - index) / index);
}

double levy_exponent(double alpha, double sigma, double xi, LevyConvention convention) {
  const double k = std::abs(xi);
  if (convention == LevyConvention::Generator) return sigma * std::pow(k, 2.0 * alpha);
  return std::pow(2.0 * sigma, 0.5 * alpha) * std::pow(k, alpha);
}

void sample_levy_increment(double alpha, double sigma, double dt, std::span<double> out, Rng& rng,
                           LevyConvention convention) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (!(sigma >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("need sigma >= 0 and dt > 0");
  if (sigma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  // Subordinator S with E exp(-lambda S) = exp(-c lambda^index); sqrt(2S) Z then has
  // characteristic exponent c |xi|^{2 index}.
  const double index = convention == LevyConvention::Generator ? alpha : 0.5 * alpha;
  const double c = convention == LevyConvention::Generator ? sigma * dt : dt * std::pow(2.0 * sigma, 0.5 * alpha);
  const double s = std::pow(c, 1.0 / index) * sample_positive_stable(index, rng);
  const double scale = std::sqrt(2.0 * s);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = scale * normal(rng);
}

double wrap_coordinate(double x, double half_length) {
  if (x >= -half_length && x < half_length) return x;
  const double period = 2.0 * half_length;
  double y = std::fmod(x + half_length, period);
  if (y < 0.0) y += period;
  if (y >= period) y -= period;
  return y - half_length;
}

std::vector<double> sample_from_density(const ScalarField& density, std::size_t count, Rng& rng) {
  const PeriodicGrid& g = density.grid;
  std::vector<double> cdf(g.size());
  double total = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    total += std::max(density[x], 0.0);
    cdf[x] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_from_density: density has no positive mass");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = g.spacing();
  std::vector<double> out;
  out.reserve(count * static_cast<std::size_t>(g.dim()));
  for (std::size_t p = 0; p < count; ++p) {
    const double target = unit(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), g.size() - 1);
    for (int a = 0; a < g.dim(); ++a)
      out.push_back(wrap_coordinate(g.coordinate(cell, a) + (unit(rng) - 0.5) * h, g.half_length()));
  }
  return out;
}

double default_potential_width(std::size_t particles, int dim, double scale) {
  return scale * std::pow(static_cast<double>(particles), -1.0 / (dim + 2.0));
}

double PotentialSpec::radial(double r) const {
  const double x = r / spacing;
  const std::size_t j = static_cast<std::size_t>(x);
  if (j + 1 >= radial_values.size()) return 0.0;
  const double w = x - static_cast<double>(j);
  return (1.0 - w) * radial_values[j] + w * radial_values[j + 1];
}

void PotentialSpec::evaluate(std::span<const double> x, std::span<double> out) const {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  if (r2 == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double r = std::sqrt(r2);
  const double factor = radial(r) / r;
  for (std::size_t a = 0; a < x.size(); ++a) out[a] = factor * x[a];
}

PotentialSpec build_potential(int dim, double half_length, double beta, double delta, int points_per_delta) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("particle dimension must be 1, 2 or 3");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
  if (!(delta > 0.0) || !(half_length > 0.0)) throw std::invalid_argument("delta and L must be positive");
  if (points_per_delta < 2) throw std::invalid_argument("points_per_delta must be at least 2");

  int m = 64;
  while (2.0 * half_length / m > delta / points_per_delta) m *= 2;
  while (std::pow(static_cast<double>(m), dim) > static_cast<double>(kMaxFinePoints) && m > 64) m /= 2;
  const PeriodicGrid fine(dim, m, half_length);
  if (delta < 2.0 * fine.spacing()) {
    std::ostringstream os;
    os << "potential width " << delta << " is below twice the table spacing " << fine.spacing();
    throw UnresolvedPotential(os.str());
  }

  ScalarField v(fine);
  const double norm = 1.0 / std::pow(std::sqrt(2.0 * std::numbers::pi) * delta, dim);
  for (std::size_t x = 0; x < fine.size(); ++x)
    v[x] = norm * std::exp(-0.5 * fine.offset_radius_squared(x) / (delta * delta));
  const ScalarField g = nonlocal_gradient(v, beta)[0];

  PotentialSpec p;
  p.dim = dim;
  p.half_length = half_length;
  p.beta = beta;
  p.delta = delta;
  p.spacing = fine.spacing();
  // Nodes along the first axis: flat index of (j, 0, ..., 0) is j * m^{d-1}.
  const std::size_t stride = fine.size() / static_cast<std::size_t>(m);
  for (int j = 0; j < m / 2; ++j) p.radial_values.push_back(g[static_cast<std::size_t>(j) * stride]);
  p.radial_values.push_back(0.0);  // odd and periodic, so zero at r = L
  return p;
}

double potential_gradient_closed_form(int dim, double beta, double delta, double r) {
  const double t = 0.5 * (1.0 - beta);
  const double a = 0.5 * delta * delta;
  const double p = 0.5 * dim - t;
  const double q = 0.5 * dim;
  const double c = std::tgamma(p) / (std::pow(2.0, dim) * std::pow(std::numbers::pi, q) * std::tgamma(q) *
                                     std::pow(a, p));
  const double z = -r * r / (4.0 * a);
  return c * (p / q) * boost::math::hypergeometric_1F1(p + 1.0, q + 1.0, z) * (-r / (2.0 * a));
}

namespace {

// Adds the contributions of every pair (k in xs, l in ys) to drift_x (weight wx on
// G(x_k - y_l)) and drift_y (weight wy on G(y_l - x_k) = -G(x_k - y_l)). With
// `same` set, xs and ys are the same species and only pairs k < l are visited.
template <int D>
void accumulate_pairs(const PotentialSpec& pot, double half_length, const std::vector<double>& xs,
                      const std::vector<double>& ys, bool same, double wx, double wy, std::vector<double>& drift_x,
                      std::vector<double>& drift_y) {
  const double period = 2.0 * half_length;
  const double inv_spacing = 1.0 / pot.spacing;
  const double* table = pot.radial_values.data();
  const std::size_t last = pot.radial_values.size() - 1;
  const std::size_t nx = xs.size() / D;
  const std::size_t ny = ys.size() / D;
  for (std::size_t k = 0; k < nx; ++k) {
    double acc[D] = {};
    for (std::size_t l = same ? k + 1 : 0; l < ny; ++l) {
      double dx[D];
      double r2 = 0.0;
      for (int c = 0; c < D; ++c) {
        double v = xs[k * D + c] - ys[l * D + c];
        if (v >= half_length) v -= period;
        else if (v < -half_length) v += period;
        dx[c] = v;
        r2 += v * v;
      }
      if (r2 == 0.0) continue;
      const double r = std::sqrt(r2);
      const double x = r * inv_spacing;
      const std::size_t j = static_cast<std::size_t>(x);
      if (j >= last) continue;
      const double w = x - static_cast<double>(j);
      const double factor = ((1.0 - w) * table[j] + w * table[j + 1]) / r;
      for (int c = 0; c < D; ++c) {
        const double g = factor * dx[c];
        acc[c] += g;
        drift_y[l * D + c] -= wy * g;
      }
    }
    for (int c = 0; c < D; ++c) drift_x[k * D + c] += wx * acc[c];
  }
}

}  // namespace

std::vector<std::vector<double>> pair_drift(const ParticleEnsemble& ensemble, const Matrix& A,
                                            const PotentialSpec& potential) {
  const int d = ensemble.dim;
  const int n = ensemble.species();
  if (potential.dim != d || potential.half_length != ensemble.half_length)
    throw UnresolvedPotential("potential table built for a different box");
  if (A.size() != n) throw std::invalid_argument("pair_drift: A does not match the species count");

  std::vector<std::vector<double>> drift(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) drift[i].assign(ensemble.positions[i].size(), 0.0);
  auto run = [&](int i, int j, double wi, double wj) {
    const bool same = i == j;
    switch (d) {
      case 1:
        accumulate_pairs<1>(potential, ensemble.half_length, ensemble.positions[i], ensemble.positions[j], same, wi,
                            wj, drift[i], drift[j]);
        break;
      case 2:
        accumulate_pairs<2>(potential, ensemble.half_length, ensemble.positions[i], ensemble.positions[j], same, wi,
                            wj, drift[i], drift[j]);
        break;
      default:
        accumulate_pairs<3>(potential, ensemble.half_length, ensemble.positions[i], ensemble.positions[j], same, wi,
                            wj, drift[i], drift[j]);
    }
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // Particle k of species i gets -a_ij/N_j G(x_k - y_l); particle l of species j
      // gets -a_ji/N_i G(y_l - x_k).
      const double wi = -A(i, j) / static_cast<double>(ensemble.count(j));
      const double wj = -A(j, i) / static_cast<double>(ensemble.count(i));
      if (wi == 0.0 && wj == 0.0) continue;
      run(i, j, wi, wj);
    }
  }
  return drift;
}

void em_step(ParticleEnsemble& ensemble, const SystemSpec& spec, const PotentialSpec& potential, double dt,
             LevyConvention convention) {
  if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
  const int d = ensemble.dim;
  const auto drift = pair_drift(ensemble, spec.A, potential);
  std::vector<double> jump(static_cast<std::size_t>(d));
  for (int i = 0; i < ensemble.species(); ++i) {
    auto& x = ensemble.positions[i];
    for (std::size_t k = 0; k < ensemble.count(i); ++k) {
      sample_levy_increment(spec.alpha, spec.sigma.at(i), dt, jump, ensemble.rng, convention);
      for (int c = 0; c < d; ++c) {
        const std::size_t idx = k * d + c;
        x[idx] = wrap_coordinate(x[idx] + drift[i][idx] * dt + jump[c], ensemble.half_length);
      }
    }
  }
  ensemble.t += dt;
}

ScalarField smooth_field(const ScalarField& f, double bandwidth) {
  if (bandwidth == 0.0) return f;
  const PeriodicGrid& g = f.grid;
  if (!(bandwidth >= g.spacing())) throw std::invalid_argument("smoothing bandwidth must be at least h");
  std::vector<double> values(g.size(), 0.0);
  double mass = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const double q = 1.0 - g.offset_radius_squared(x) / (bandwidth * bandwidth);
    if (q <= 0.0) continue;
    values[x] = q * q;
    mass += q * q;
  }
  mass *= g.cell_volume();
  for (double& v : values) v /= mass;
  return periodic_convolve(f, kernel_from_values(g, std::move(values)));
}

std::vector<ScalarField> empirical_density(const ParticleEnsemble& ensemble, const PeriodicGrid& grid,
                                           double bandwidth, std::span<const double> mass) {
  if (grid.dim() != ensemble.dim || grid.half_length() != ensemble.half_length)
    throw GridMismatch("empirical_density: grid does not match the particle box");
  if (!mass.empty() && mass.size() != static_cast<std::size_t>(ensemble.species()))
    throw std::invalid_argument("empirical_density: one mass per species expected");
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  std::vector<ScalarField> out;
  for (int i = 0; i < ensemble.species(); ++i) {
    ScalarField f(grid);
    const std::size_t count = ensemble.count(i);
    const double m = mass.empty() ? 1.0 : mass[i];
    const double per_particle = m / (static_cast<double>(count) * grid.cell_volume());
    const auto& x = ensemble.positions[i];
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t flat = 0;
      for (int c = 0; c < d; ++c) flat = flat * n + nearest_index(x[k * d + c], grid.half_length(), n);
      f[flat] += per_particle;
    }
    out.push_back(smooth_field(f, bandwidth));
  }
  return out;
}

}  // namespace fracross

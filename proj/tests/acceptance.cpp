#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracross/commands.hpp"
#include "fracross/config.hpp"
#include "fracross/diagnostics.hpp"
#include "fracross/fracops.hpp"
#include "fracross/particles.hpp"
#include "fracross/solver.hpp"
#include "fracross/spectral.hpp"

using namespace fracross;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

ScalarField bump(const PeriodicGrid& g, double center, double width, double mass) {
  ScalarField f(g);
  const double norm = mass / (std::sqrt(2.0 * kPi) * width);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double y = g.coordinate(x, 0) - center;
    y -= 2.0 * g.half_length() * std::round(y / (2.0 * g.half_length()));
    f[x] = norm * std::exp(-0.5 * y * y / (width * width));
  }
  return f;
}

SystemSpec system(int n, double alpha, double beta, double sigma, const std::vector<double>& a) {
  SystemSpec s;
  s.n = n;
  s.d = 1;
  s.alpha = alpha;
  s.beta = beta;
  s.sigma.assign(n, sigma);
  s.A = Matrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.A(i, j) = a[i * n + j];
  return s;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid.cell_volume();
}

// Shared by the mass and entropy criteria.
struct BaseRun {
  PeriodicGrid grid{1, 256, 6.0};
  SystemSpec spec = system(2, 0.5, 0.5, 0.5, {2, 1, 1, 2});
  std::vector<ScalarField> u0{bump(grid, -1.0, 0.6, 1.0), bump(grid, 1.2, 0.8, 0.7)};

  Trajectory run(double dt) const {
    SchemeParams p;
    p.dt = dt;
    p.T = 2000 * 1e-3;
    p.snapshot_every = 1 << 30;
    return run_simulation(u0, spec, p);
  }
};

Outcome mass_conservation() {
  const BaseRun base;
  const Trajectory tr = base.run(1e-3);
  double drift = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double m0 = tr.reports.front().mass[i];
    for (const auto& r : tr.reports) drift = std::max(drift, std::abs(r.mass[i] - m0) / m0);
  }
  const std::size_t steps = tr.reports.size() - 1;
  return {steps >= 2000 && drift <= 1e-11, fmt("steps=%zu max relative drift=%.2e (tol 1e-11)", steps, drift)};
}

Outcome entropy_inequality() {
  const BaseRun base;
  std::vector<ResidualSeries> series;
  double h0 = 0.0;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    const Trajectory tr = base.run(dt);
    h0 = *tr.reports.front().entropy;
    series.push_back(entropy_inequality_residual(tr));
  }
  const double tol = 1e-6 * std::abs(h0);
  bool ok = true;
  std::string detail = fmt("H0=%.4f integrated=[", h0);
  for (const auto& s : series) {
    ok = ok && s.integrated <= tol;
    detail += fmt("%.3e ", s.integrated);
  }
  detail += "] max=[";
  for (const auto& s : series) detail += fmt("%.3e ", s.max);
  detail += "] ratios=[";
  for (std::size_t k = 1; k < series.size(); ++k) {
    const double ratio = series[k].max / series[k - 1].max;
    ok = ok && std::abs(ratio - 0.5) <= 0.15;
    detail += fmt("%.3f ", ratio);
  }
  detail += "]";
  return {ok, detail};
}

Outcome stroock_varopoulos() {
  PeriodicGrid g(1, 64, 2.0);
  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> value(0.0, 1.5);
  std::uniform_real_distribution<double> order(0.05, 0.95);
  double worst = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    ScalarField u(g);
    for (double& v : u.values) v = value(rng);
    worst = std::min(worst, stroock_varopoulos_gap(u, order(rng), g.half_length()));
  }
  return {worst >= -1e-12, fmt("1000 trials, smallest gap=%.3e (tol -1e-12)", worst)};
}

Outcome linear_oracle() {
  PeriodicGrid g(1, 64, kPi);
  bool ok = true;
  std::string detail;
  for (double alpha : {0.3, 0.5, 0.8}) {
    const SystemSpec spec = system(1, alpha, 0.5, 1.0, {0.0});
    ScalarField u0(g);
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double y = g.coordinate(x, 0);
      u0[x] = 1.0 + 0.3 * std::cos(y) + 0.2 * std::sin(4 * y) + 0.1 * std::cos(9 * y);
    }
    const Spectrum a = forward_transform(u0);
    const double t_end = 0.5;
    auto evolve = [&](double dt) {
      SchemeParams p;
      p.dt = dt;
      p.T = t_end;
      ImexScheme scheme(g, spec, p);
      const int steps = static_cast<int>(std::lround(t_end / dt));
      State s{0.0, {u0}};
      for (int k = 0; k < steps; ++k) s = scheme.advance(s, dt).state;
      return std::pair{forward_transform(s.u[0]), steps};
    };

    const auto [b, steps] = evolve(0.01);
    double discrete = 0.0;
    for_each_mode(g, [&](std::size_t flat, std::span<const double>, double k2, std::span<const int>) {
      const double factor = std::pow(1.0 + 0.01 * std::pow(k2, alpha), -steps);
      discrete = std::max(discrete, std::abs(b[flat] - a[flat] * factor) / static_cast<double>(g.size()));
    });

    // Continuous decay of the k = 4 mode: first-order error, removed by extrapolation.
    std::vector<double> err;
    std::vector<double> amp;
    std::size_t probe = 0;
    for_each_mode(g, [&](std::size_t flat, std::span<const double>, double k2, std::span<const int> idx) {
      if (idx[0] == 4 && k2 > 0.0) probe = flat;
    });
    const double exact = std::exp(-std::pow(16.0, alpha) * t_end);
    for (double dt : {0.01, 0.005, 0.0025}) {
      const double ratio = std::abs(evolve(dt).first[probe]) / std::abs(a[probe]);
      amp.push_back(ratio);
      err.push_back(std::abs(ratio - exact) / exact);
    }
    const double r1 = err[1] / err[0], r2 = err[2] / err[1];
    const double extrapolated = std::abs(2.0 * amp[2] - amp[1] - exact) / exact;
    const bool first_order = std::abs(r1 - 0.5) <= 0.1 && std::abs(r2 - 0.5) <= 0.1 && extrapolated < 0.2 * err[2];
    ok = ok && discrete <= 1e-12 && first_order;
    detail += fmt("a=%.1f: exact-discrete=%.1e ratios=%.3f,%.3f extrap=%.1e; ", alpha, discrete, r1, r2, extrapolated);
  }
  return {ok, detail};
}

Outcome operator_equivalence() {
  bool ok = true;
  std::string detail;
  for (double s : {0.25, 0.5, 0.75}) {
    std::vector<double> errs;
    for (int n : {64, 128}) {
      PeriodicGrid g(1, n, kPi);
      ScalarField f(g);
      for (std::size_t x = 0; x < g.size(); ++x) {
        const double y = g.coordinate(x, 0);
        f[x] = std::cos(y) + 0.5 * std::sin(3 * y) + 0.2 * std::cos(4 * y + 0.3);
      }
      const ScalarField spec = frac_laplacian_spectral(f, s);
      errs.push_back(max_diff(frac_laplacian_quadrature(f, s, g.half_length()), spec) / spec.max_abs());
    }
    ok = ok && errs[1] < errs[0] && errs[1] <= 1e-3;
    detail += fmt("s=%.2f: %.2e -> %.2e; ", s, errs[0], errs[1]);
  }
  return {ok, detail};
}

Outcome kernel_limit() {
  PeriodicGrid g(1, 8192, 32.0);
  const double beta = 0.4, s = 0.5 * (1.0 - beta);
  ScalarField phi(g);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const double y = g.coordinate(x, 0);
    phi[x] = y * std::exp(-y * y);
  }
  const ScalarField reference = apply_multiplier(
      phi, [&](std::span<const double>, double k2) -> std::complex<double> { return k2 == 0.0 ? 0.0 : std::pow(k2, -s); });
  bool ok = true;
  double previous = 1e300;
  std::string detail = "errors:";
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const RegularizedRiesz rr = build_regularized_riesz(g, beta, eps);
    ScalarField diff = periodic_convolve(phi, rr.full);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = diff[i] / rr.full.fourier_constant - reference[i];
    double sum = 0.0;
    for (double v : diff.values) sum += v * v;
    const double err = std::sqrt(sum * g.cell_volume());
    ok = ok && err < previous;
    previous = err;
    detail += fmt(" %.3e", err);
  }
  return {ok, detail};
}

Outcome scheme_consistency() {
  const std::string base = R"(
[model]
n = 2
alpha = 0.5
beta = 0.5
sigma = 0.5
A = 2, 1; 1, 2

[scheme]
N = 128
L = 16
dt = 0.002
T = 0.5

[initial]
centers = -4.8; 4.8
widths = 2.6666666666666667, 3.2
masses = 1, 1
)";
  const auto root = std::filesystem::temp_directory_path() / "fracross_acceptance_sweep";
  std::filesystem::remove_all(root);
  struct Ladder {
    const char* param;
    const char* values;
    std::vector<std::string> extra;
  };
  const std::vector<Ladder> ladders{{"eps", "0.8,0.4,0.2,0.1", {}},
                                    {"rho", "4,2,1,0.5", {"scheme.kappa=0.05"}},
                                    {"kappa", "0.1,0.05,0.025,0.0125", {}}};
  bool ok = true;
  std::string detail;
  for (const auto& l : ladders) {
    std::vector<std::string> overrides{std::string("sweep.parameter=") + l.param,
                                       std::string("sweep.ladder=") + l.values};
    overrides.insert(overrides.end(), l.extra.begin(), l.extra.end());
    const RunConfig config = parse_config(base, overrides);
    std::ostringstream log;
    const auto rows = run_sweep(config, root / l.param, log);
    detail += std::string(l.param) + ":";
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      detail += fmt(" %.3e", *rows[k].diff_next);
      if (k > 0) ok = ok && *rows[k].diff_next < *rows[k - 1].diff_next;
    }
    detail += "; ";
  }
  return {ok, detail};
}

Outcome stabilizer_bounds() {
  PeriodicGrid g(1, 64, 3.0);
  const KernelTable w = build_mollifier(g, 0.8);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_ratio = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    ScalarField u(g);
    for (double& v : u.values) v = unit(rng) < 0.2 ? 0.0 : unit(rng) * (1 + trial % 7);
    double u2 = 0.0;
    for (double v : u.values) u2 += v * v;
    u2 *= g.cell_volume();
    const ScalarField gu = eval_stabilizer(u, 0.8, &w);
    double l1 = 0.0;
    for (double v : gu.values) l1 += std::abs(v);
    worst_ratio = std::max(worst_ratio, l1 * g.cell_volume() / (2.0 * u2));
    worst_mean = std::max(worst_mean, std::abs(gu.integral()) / g.volume());
  }
  return {worst_ratio <= 1.0 && worst_mean <= 1e-13,
          fmt("max ||g||_1/(2||u||_2^2)=%.4f, max |mean g|=%.1e", worst_ratio, worst_mean)};
}

Outcome moment_control() {
  PeriodicGrid g(1, 128, 8.0);
  SystemSpec spec = system(2, 0.5, 0.5, 0.5, {2, 1, 1, 2});
  spec.m = 0.4;
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> where(-2.5, 2.5);
    const std::vector<ScalarField> u0{bump(g, where(rng), 0.5, 1.0), bump(g, where(rng), 0.6, 1.0)};
    SchemeParams p;
    p.dt = 2e-3;
    p.T = 2.0;
    p.snapshot_every = 1 << 30;
    const Trajectory tr = run_simulation(u0, spec, p);
    for (int i = 0; i < 2; ++i) {
      const double m0 = tr.reports.front().moment[i];
      // C is the largest rate (dM/dt) / (1 + M) seen on [0, 1]; the integrated
      // envelope (M(0) + 1) e^{Ct} - 1 must then keep holding on [0, 2].
      double rate = 0.0;
      for (std::size_t k = 0; k + 1 < tr.reports.size() && tr.reports[k + 1].t <= 1.0 + 1e-12; ++k) {
        const auto& r = tr.reports[k];
        const auto& next = tr.reports[k + 1];
        rate = std::max(rate, (next.moment[i] - r.moment[i]) / (next.dt * (1.0 + r.moment[i])));
      }
      double excess = -1e300;
      for (const auto& r : tr.reports)
        excess = std::max(excess, (r.moment[i] - ((m0 + 1.0) * std::exp(rate * r.t) - 1.0)) / m0);
      ok = ok && std::isfinite(rate) && excess <= 1e-12;
      detail += fmt("seed %d species %d: C=%.4f, M(2)/M(0)=%.4f, max excess=%.1e; ", static_cast<int>(seed), i + 1,
                    rate, tr.reports.back().moment[i] / m0, excess);
    }
  }
  return {ok, detail};
}

double particle_l1(std::size_t count, std::uint64_t seed, const ScalarField& pde, const ScalarField& u0,
                   const SystemSpec& spec) {
  const double bandwidth = 0.25, dt = 0.01;
  ParticleEnsemble e;
  e.dim = 1;
  e.half_length = u0.grid.half_length();
  e.rng.seed(seed);
  e.positions.push_back(sample_from_density(u0, count, e.rng));
  const PotentialSpec potential =
      build_potential(1, e.half_length, spec.beta, default_potential_width(count, 1));
  for (int k = 0; k < 30; ++k) em_step(e, spec, potential, dt);
  const double mass[] = {1.0};
  const auto density = empirical_density(e, u0.grid, bandwidth, mass);
  return l1_distance(density[0], smooth_field(pde, bandwidth));
}

Outcome particle_agreement() {
  PeriodicGrid g(1, 128, 4.0);
  const SystemSpec spec = system(1, 0.5, 0.5, 0.5, {1.0});
  const ScalarField u0 = bump(g, 0.0, 0.5, 1.0);
  SchemeParams p;
  p.dt = 1e-3;
  p.T = 0.3;
  p.snapshot_every = 1 << 30;
  const ScalarField pde = run_simulation({u0}, spec, p).snapshots.back().u[0];
  std::vector<double> mean;
  std::string detail;
  for (std::size_t count : {5000, 10000}) {
    double sum = 0.0;
    detail += fmt("N=%zu:", count);
    for (std::uint64_t seed : {101, 202, 303}) {
      const double l1 = particle_l1(count, seed, pde, u0, spec);
      sum += l1;
      detail += fmt(" %.4f", l1);
    }
    mean.push_back(sum / 3.0);
    detail += fmt(" (mean %.4f); ", mean.back());
  }
  return {mean[0] <= 0.1 && mean[1] < mean[0], detail};
}

Outcome levy_law() {
  const double sigma = 1.0, dt = 0.1;
  const std::vector<double> freqs{0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  bool ok = true;
  double worst = 0.0;
  const std::size_t samples = 1000000;
  std::vector<double> x(samples);
  std::uint64_t seed = 0;
  for (double alpha : {0.3, 0.5, 0.7}) {
    Rng rng(++seed);
    for (double& v : x) sample_levy_increment(alpha, sigma, dt, std::span<double>(&v, 1), rng);
    for (double xi : freqs) {
      double sum = 0.0, sum2 = 0.0;
      for (double v : x) {
        const double c = std::cos(xi * v);
        sum += c;
        sum2 += c * c;
      }
      const double mean = sum / samples;
      const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
      const double z = std::abs(mean - std::exp(-sigma * dt * std::pow(xi, 2.0 * alpha))) / se;
      worst = std::max(worst, z);
      ok = ok && z <= 3.0;
    }
  }
  return {ok, fmt("3 indices x 10 frequencies x 1e6 samples, worst |z|=%.2f (tol 3)", worst)};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"mass conservation", 10, mass_conservation},
      {"entropy inequality", 30, entropy_inequality},
      {"Stroock-Varopoulos inequality", 5, stroock_varopoulos},
      {"linear fractional diffusion oracle", 5, linear_oracle},
      {"spectral vs quadrature operator", 10, operator_equivalence},
      {"regularized kernel limit", 5, kernel_limit},
      {"approximation-scheme consistency", 120, scheme_consistency},
      {"stabilizer bounds", 5, stabilizer_bounds},
      {"moment control", 30, moment_control},
      {"particle-to-PDE agreement", 120, particle_agreement},
      {"Levy increment law", 30, levy_law},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[k].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= criteria[k].budget_seconds;
    const bool passed = outcome.passed && in_time;
    failures += passed ? 0 : 1;
    std::printf("%s %2zu %s | %s | %.2f s (budget %.0f s%s)\n", passed ? "PASS" : "FAIL", k + 1, criteria[k].name,
                outcome.detail.c_str(), seconds, criteria[k].budget_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

#include "fracross/check_suite.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "fracross/diagnostics.hpp"
#include "fracross/fracops.hpp"
#include "fracross/spectral.hpp"

namespace fracross {

namespace {

CheckResult at_most(std::string name, double value, double bound, std::string detail = {}) {
  return CheckResult{std::move(name), value <= bound, value, bound, std::move(detail)};
}

CheckResult at_least(std::string name, double value, double bound, std::string detail = {}) {
  return CheckResult{std::move(name), value >= bound, value, bound, std::move(detail)};
}

ScalarField band_limited(const PeriodicGrid& g, Rng& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  ScalarField f(g);
  const double w = std::numbers::pi / g.half_length();
  for (int m = 1; m <= 6; ++m) {
    const double a = coef(rng), b = coef(rng);
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double y = g.coordinate(x, 0);
      f[x] += (a * std::cos(m * w * y) + b * std::sin(m * w * y)) / m;
    }
  }
  return f;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) m = std::max(m, std::abs(a[x] - b[x]));
  return m;
}

CheckResult check_operator_forms(double s, Rng& rng) {
  const PeriodicGrid g(1, 128, std::numbers::pi);
  const ScalarField f = band_limited(g, rng);
  const ScalarField spectral = frac_laplacian_spectral(f, s);
  const ScalarField quad = frac_laplacian_quadrature(f, s, g.half_length());
  return at_most("frac-laplacian spectral vs quadrature", max_abs_diff(spectral, quad) / spectral.max_abs(), 1e-3,
                 "relative max error, N = 128, s = alpha");
}

CheckResult check_gradient_identity(double beta, Rng& rng) {
  // div grad (-Delta)^{(beta-1)/2} f = -(-Delta)^{(beta+1)/2} f
  const PeriodicGrid g(2, 32, 3.0);
  ScalarField f(g);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& v : f.values) v = noise(rng);
  Spectrum fh = forward_transform(f);
  dealias_in_place(g, fh);
  f = inverse_transform(g, fh);
  const auto grad = nonlocal_gradient(f, beta);
  const ScalarField div = spectral_divergence(grad);
  ScalarField rhs = frac_laplacian_spectral(f, 0.5 * (beta + 1.0));
  for (double& v : rhs.values) v = -v;
  return at_most("nonlocal gradient divergence identity", max_abs_diff(div, rhs) / rhs.max_abs(), 1e-12,
                 "2-D, filtered random field");
}

CheckResult check_stroock_varopoulos(double s, Rng& rng) {
  const PeriodicGrid g(1, 64, 2.0);
  std::lognormal_distribution<double> dist(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    ScalarField u(g);
    for (double& v : u.values) v = dist(rng);
    worst = std::min(worst, stroock_varopoulos_gap(u, s, g.half_length()));
  }
  return at_least("Stroock-Varopoulos gap", worst, -1e-12, "200 random positive fields, worst gap");
}

std::vector<CheckResult> check_stabilizer(Rng& rng) {
  const PeriodicGrid g(1, 64, 3.0);
  const KernelTable w = build_mollifier(g, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_mean = 0.0, worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField u(g);
    for (double& v : u.values) v = unit(rng);
    double u2 = 0.0;
    for (double v : u.values) u2 += v * v;
    u2 *= g.cell_volume();
    const ScalarField gu = eval_stabilizer(u, 0.5, &w);
    double l1 = 0.0;
    for (double v : gu.values) l1 += std::abs(v);
    worst_mean = std::max(worst_mean, std::abs(gu.integral()) / g.volume());
    worst_ratio = std::max(worst_ratio, l1 * g.cell_volume() / (2.0 * u2));
  }
  return {at_most("stabilizer zero mean", worst_mean, 1e-13, "100 random fields"),
          at_most("stabilizer L1 bound ratio", worst_ratio, 1.0, "||g||_1 / (2 ||u||_2^2)")};
}

std::vector<CheckResult> check_matrix(const SystemSpec& spec) {
  std::vector<CheckResult> out;
  if (!spec.pi) {
    out.push_back(CheckResult{"matrix round-trip", true, 0.0, 0.0, "skipped: A has no invariant measure"});
    return out;
  }
  const SymmetrizedSystem sym = symmetrize_and_check(spec.A, *spec.pi);
  out.push_back(at_most("detailed balance defect", sym.symmetry_defect, kDetailedBalanceTol));
  const SymmetricEigen eig = jacobi_eigenvalues(sym.S);
  double trace = 0.0, sum = 0.0, frob2 = 0.0, sum2 = 0.0;
  for (int i = 0; i < sym.S.size(); ++i) trace += sym.S(i, i);
  for (double v : sym.S.data()) frob2 += v * v;
  for (double l : eig.values) {
    sum += l;
    sum2 += l * l;
  }
  const double scale = std::max(sym.S.frobenius(), 1e-300);
  out.push_back(at_most("eigenvalue trace/Frobenius round-trip",
                        std::max(std::abs(trace - sum), std::abs(frob2 - sum2) / scale) / scale, 1e-10));
  out.push_back(CheckResult{"Cholesky agrees with lambda_min", cholesky_succeeds(sym.S) == (sym.lambda_min > 0.0),
                            sym.lambda_min, 0.0, "lambda_min shown"});
  return out;
}

std::vector<CheckResult> check_kernels(const PeriodicGrid& g, double beta) {
  std::vector<CheckResult> out;
  const double rho = std::min(4.0 * g.spacing(), 0.5 * g.half_length());
  const KernelTable w = build_mollifier(g, rho);
  double mass = 0.0;
  for (double v : w.values) mass += v;
  out.push_back(at_most("mollifier unit mass", std::abs(mass * g.cell_volume() - 1.0), 1e-12));
  const double eps = std::clamp(4.0 * g.spacing(), 0.05, 0.9);
  const RegularizedRiesz rr = build_regularized_riesz(g, beta, eps);
  double most_negative = 0.0;
  for (double v : rr.half.values) most_negative = std::min(most_negative, v);
  out.push_back(at_least("regularized Riesz kernel nonnegative", most_negative, 0.0));
  return out;
}

CheckResult check_levy(double alpha, Rng& rng) {
  const int n = 100000;
  const double sigma = 1.0, dt = 0.1;
  std::vector<double> x(n);
  for (double& v : x) sample_levy_increment(alpha, sigma, dt, std::span<double>(&v, 1), rng);
  double worst = 0.0;
  for (double xi : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    double re = 0.0;
    for (double v : x) re += std::cos(xi * v);
    re /= n;
    const double phi = std::exp(-dt * levy_exponent(alpha, sigma, xi));
    const double phi2 = std::exp(-dt * levy_exponent(alpha, sigma, 2 * xi));
    const double se = std::sqrt(std::max((1 + phi2) / 2 - phi * phi, 1e-300) / n);
    worst = std::max(worst, std::abs(re - phi) / se);
  }
  return at_most("Levy characteristic function (std errors)", worst, 4.0, "1e5 samples, 5 frequencies");
}

CheckResult check_mass(const RunConfig& config) {
  SchemeParams p = config.scheme;
  p.T = std::min(p.T, 50 * p.dt);
  p.snapshot_every = 1 << 30;
  const auto u0 = initial_state(config);
  const Trajectory tr = run_simulation(u0, config.spec, p);
  double worst = 0.0;
  for (int i = 0; i < config.spec.n; ++i) {
    const double m0 = tr.reports.front().mass[i];
    for (const StepReport& r : tr.reports) worst = std::max(worst, std::abs(r.mass[i] - m0) / std::max(m0, 1e-300));
  }
  return at_most("mass conservation (configured system)", worst, 1e-11, "up to 50 steps");
}

}  // namespace

std::vector<CheckResult> run_check_suite(const RunConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const SystemSpec& spec = config.spec;
  std::vector<CheckResult> out;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      out.push_back(CheckResult{name, false, 0.0, 0.0, std::string("threw: ") + e.what()});
    }
  };
  guarded("frac-laplacian spectral vs quadrature", [&] { out.push_back(check_operator_forms(spec.alpha, rng)); });
  guarded("nonlocal gradient divergence identity", [&] { out.push_back(check_gradient_identity(spec.beta, rng)); });
  guarded("Stroock-Varopoulos gap", [&] { out.push_back(check_stroock_varopoulos(spec.alpha, rng)); });
  guarded("stabilizer", [&] {
    for (auto& r : check_stabilizer(rng)) out.push_back(std::move(r));
  });
  guarded("matrix round-trip", [&] {
    for (auto& r : check_matrix(spec)) out.push_back(std::move(r));
  });
  guarded("kernel tables", [&] {
    for (auto& r : check_kernels(config.grid(), spec.beta)) out.push_back(std::move(r));
  });
  guarded("Levy characteristic function", [&] { out.push_back(check_levy(spec.alpha, rng)); });
  guarded("mass conservation", [&] { out.push_back(check_mass(config)); });
  return out;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
  std::size_t width = 5;
  for (const auto& r : results) width = std::max(width, r.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "check"
     << "  result  " << std::setw(12) << "value" << "  " << std::setw(12) << "bound" << "  detail\n";
  for (const auto& r : results) {
    os << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << (r.passed ? "PASS  " : "FAIL  ") << "  "
       << std::setw(12) << std::setprecision(4) << r.value << "  " << std::setw(12) << r.threshold << "  " << r.detail
       << "\n";
  }
  const auto failed = std::count_if(results.begin(), results.end(), [](const CheckResult& r) { return !r.passed; });
  os << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " checks passed\n";
  return os.str();
}

}  // namespace fracross

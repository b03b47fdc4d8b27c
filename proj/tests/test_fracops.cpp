#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "fracross/errors.hpp"
#include "fracross/fracops.hpp"

using namespace fracross;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField sample(const PeriodicGrid& g, auto&& fn) {
  ScalarField f(g);
  for (std::size_t x = 0; x < g.size(); ++x) {
    std::vector<double> p(g.dim());
    for (int a = 0; a < g.dim(); ++a) p[a] = g.coordinate(x, a);
    f[x] = fn(p);
  }
  return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double inner(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid.cell_volume();
}

double l2(const ScalarField& a) { return std::sqrt(inner(a, a)); }

// Random field built from a few low modes (band-limited, smooth).
ScalarField random_smooth(const PeriodicGrid& g, std::mt19937_64& rng, int modes = 6) {
  std::normal_distribution<double> n01;
  std::vector<double> ca(modes), cb(modes);
  for (int m = 0; m < modes; ++m) {
    ca[m] = n01(rng);
    cb[m] = n01(rng);
  }
  const double w = kPi / g.half_length();
  return sample(g, [&](const std::vector<double>& p) {
    double v = 0.0;
    for (int m = 0; m < modes; ++m)
      for (double x : p) v += ca[m] * std::cos(w * m * x) + cb[m] * std::sin(w * (m + 1) * x);
    return v;
  });
}

ScalarField random_field(const PeriodicGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  ScalarField f(g);
  for (auto& v : f.values) v = n01(rng);
  return f;
}

}  // namespace

TEST_CASE("fractional Laplacian constant") {
  CHECK(frac_laplacian_constant(2, 0.5) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-15));
  CHECK(frac_laplacian_constant(2, 0.5) == doctest::Approx(0.1591549).epsilon(1e-7));
  // Independent route in d = 1: c = 1 / (2 int_0^inf (1 - cos y) y^{-1-2s} dy)
  // with int_0^inf (1 - cos y) y^{-1-2s} dy = -Gamma(-2s) cos(pi s).
  for (double s : {0.2, 0.3, 0.7, 0.9}) {
    const double integral = -std::tgamma(-2.0 * s) * std::cos(kPi * s);
    CHECK(frac_laplacian_constant(1, s) == doctest::Approx(1.0 / (2.0 * integral)).epsilon(1e-13));
  }
}

TEST_CASE("spectral fractional Laplacian") {
  PeriodicGrid g(1, 64, kPi);
  SUBCASE("constant field maps to zero") {
    auto out = frac_laplacian_spectral(ScalarField(g, 3.7), 0.4);
    CHECK(out.max_abs() <= 1e-13);
  }
  SUBCASE("cosine modes are eigenfunctions") {
    for (int j : {1, 3, 17}) {
      for (double s : {0.1, 0.5, 0.9}) {
        auto f = sample(g, [&](const std::vector<double>& p) { return std::cos(j * p[0]); });
        auto out = frac_laplacian_spectral(f, s);
        ScalarField expect = f;
        for (auto& v : expect.values) v *= std::pow(double(j), 2.0 * s);
        CHECK(max_diff(out, expect) <= 1e-12 * std::pow(double(j), 2.0 * s));
      }
    }
  }
  SUBCASE("Parseval: quadratic form evaluated both ways") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
      auto f = random_smooth(g, rng);
      const double s = 0.3;
      const double physical = inner(f, frac_laplacian_spectral(f, s));
      const Spectrum fh = forward_transform(f);
      double spectral = 0.0;
      for_each_mode(g, [&](std::size_t flat, std::span<const double>, double k2, std::span<const int>) {
        spectral += (k2 == 0.0 ? 0.0 : std::pow(k2, s)) * std::norm(fh[flat]);
      });
      spectral *= g.cell_volume() / g.size();
      CHECK(physical >= 0.0);
      CHECK(physical == doctest::Approx(spectral).epsilon(1e-12));
    }
  }
  SUBCASE("self-adjoint and semigroup") {
    PeriodicGrid g2(2, 32, 2.0);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
      auto f = random_field(g2, rng), h = random_field(g2, rng);
      const double lhs = inner(frac_laplacian_spectral(f, 0.35), h);
      const double rhs = inner(f, frac_laplacian_spectral(h, 0.35));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
      auto comp = frac_laplacian_spectral(frac_laplacian_spectral(f, 0.2), 0.45);
      auto direct = frac_laplacian_spectral(f, 0.65);
      CHECK(max_diff(comp, direct) <= 1e-12 * direct.max_abs());
    }
  }
}

TEST_CASE("quadrature form of the fractional Laplacian") {
  SUBCASE("constant field") {
    PeriodicGrid g(1, 64, kPi);
    for (bool periodize : {true, false}) {
      auto out = frac_laplacian_quadrature(ScalarField(g, 2.0), 0.6, kPi, {periodize, true});
      CHECK(out.max_abs() <= 1e-12);
    }
  }
  SUBCASE("invalid cutoff") {
    PeriodicGrid g(1, 16, 1.0);
    CHECK_THROWS_AS(frac_laplacian_quadrature(ScalarField(g), 0.5, 1.5), InvalidCutoff);
    CHECK_THROWS_AS(frac_laplacian_quadrature(ScalarField(g), 0.5, 0.0), InvalidCutoff);
  }
  SUBCASE("agreement with the multiplier improves under refinement") {
    for (double s : {0.25, 0.5, 0.75}) {
      double previous = 1e300;
      for (int n : {32, 64, 128}) {
        PeriodicGrid g(1, n, kPi);
        auto f = sample(g, [](const std::vector<double>& p) {
          return std::cos(p[0]) + 0.5 * std::sin(3 * p[0]) + 0.2 * std::cos(4 * p[0] + 0.3);
        });
        auto spec = frac_laplacian_spectral(f, s);
        const double err = max_diff(frac_laplacian_quadrature(f, s, kPi), spec) / spec.max_abs();
        CHECK(err < previous);
        previous = err;
      }
      CHECK(previous <= 1e-3);
    }
  }
  SUBCASE("truncation radius controls the gap") {
    PeriodicGrid g(1, 64, kPi);
    auto f = sample(g, [](const std::vector<double>& p) { return std::cos(2 * p[0]); });
    auto spec = frac_laplacian_spectral(f, 0.5);
    double previous = 1e300;
    for (double r : {0.5, 1.0, 2.0, kPi}) {
      const double err = max_diff(frac_laplacian_quadrature(f, 0.5, r), spec);
      CHECK(err < previous);
      previous = err;
    }
    // the literal whole-space sum misses the periodic images and the singular lattice term
    const double literal = max_diff(frac_laplacian_quadrature(f, 0.5, kPi, {false, false}), spec);
    CHECK(literal > 10.0 * previous);
  }
  SUBCASE("two-dimensional low mode") {
    for (double s : {0.3, 0.7}) {
      PeriodicGrid g(2, 32, kPi);
      auto f = sample(g, [](const std::vector<double>& p) { return std::cos(p[0] + 2 * p[1]); });
      auto spec = frac_laplacian_spectral(f, s);
      const double corrected = max_diff(frac_laplacian_quadrature(f, s, kPi), spec) / spec.max_abs();
      const double raw = max_diff(frac_laplacian_quadrature(f, s, kPi, {true, false}), spec) / spec.max_abs();
      CHECK(corrected < 0.2 * raw);
      CHECK(corrected < 1e-2);
    }
  }
}

TEST_CASE("nonlocal gradient") {
  PeriodicGrid g(1, 64, kPi);
  SUBCASE("constant field") {
    auto out = nonlocal_gradient(ScalarField(g, 1.3), 0.4);
    REQUIRE(out.size() == 1);
    CHECK(out[0].max_abs() <= 1e-13);
  }
  SUBCASE("single mode, cos/sin pair") {
    const double beta = 0.3;
    for (int j : {1, 5}) {
      // i k |k|^{beta-1} e^{ikx}: real part maps cos(kx) to -k|k|^{beta-1} sin(kx)
      auto c = sample(g, [&](const std::vector<double>& p) { return std::cos(j * p[0]); });
      auto s = sample(g, [&](const std::vector<double>& p) { return std::sin(j * p[0]); });
      const double factor = std::pow(double(j), beta);
      auto gc = nonlocal_gradient(c, beta)[0];
      auto gs = nonlocal_gradient(s, beta)[0];
      for (std::size_t x = 0; x < g.size(); ++x) {
        CHECK(gc[x] == doctest::Approx(-factor * s[x]).epsilon(1e-12).scale(1.0));
        CHECK(gs[x] == doctest::Approx(factor * c[x]).epsilon(1e-12).scale(1.0));
      }
    }
  }
  SUBCASE("beta = 1 reproduces the spectral gradient") {
    PeriodicGrid g2(2, 16, 1.5);
    std::mt19937_64 rng(3);
    auto f = random_field(g2, rng);
    auto a = nonlocal_gradient(f, 1.0);
    auto b = spectral_gradient(f);
    for (int ax = 0; ax < 2; ++ax) CHECK(max_diff(a[ax], b[ax]) <= 1e-12 * std::max(1.0, b[ax].max_abs()));
  }
  SUBCASE("splitting identity: div of nonlocal gradient is -(-Delta)^{(beta+1)/2}") {
    PeriodicGrid g2(2, 32, 2.0);
    std::mt19937_64 rng(4);
    for (double beta : {0.2, 0.6, 0.9}) {
      auto f = random_smooth(g2, rng);  // no Nyquist content
      auto grad = nonlocal_gradient(f, beta);
      auto div = spectral_divergence(grad);
      auto lap = frac_laplacian_spectral(f, 0.5 * (beta + 1.0));
      for (auto& v : lap.values) v = -v;
      CHECK(max_diff(div, lap) <= 1e-12 * std::max(1.0, lap.max_abs()));
    }
  }
}

TEST_CASE("regularized Riesz kernel") {
  PeriodicGrid g(1, 1024, 16.0);
  const double beta = 0.4;
  SUBCASE("equals |x|^{s-d} on the plateau") {
    const double eps = 0.2;
    auto rr = build_regularized_riesz(g, beta, eps);
    CHECK(rr.s == doctest::Approx(0.3));
    int checked = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = std::sqrt(g.offset_radius_squared(i));
      if (r >= eps && r <= std::min(1.0 / eps, g.half_length())) {
        CHECK(rr.half.values[i] == std::pow(r, rr.s - 1.0));
        ++checked;
      }
    }
    CHECK(checked > 100);
  }
  SUBCASE("convolution square has a nonnegative transform") {
    for (double eps : {0.5, 0.2, 0.1}) {
      auto rr = build_regularized_riesz(g, beta, eps);
      double mx = 0.0, mn = 0.0;
      double im = 0.0;
      for (auto c : rr.full.spectrum) {
        mx = std::max(mx, c.real());
        mn = std::min(mn, c.real());
        im = std::max(im, std::abs(c.imag()));
      }
      CHECK(mn >= -1e-10 * mx);
      CHECK(im <= 1e-10 * mx);
    }
  }
  SUBCASE("nested cutoffs are monotone and bounded by the full kernel") {
    auto coarse = build_regularized_riesz(g, beta, 0.4);
    auto fine = build_regularized_riesz(g, beta, 0.1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = std::sqrt(g.offset_radius_squared(i));
      CHECK(coarse.half.values[i] >= 0.0);
      CHECK(coarse.half.values[i] <= fine.half.values[i]);
      if (r > 0) CHECK(fine.half.values[i] <= std::pow(r, fine.s - 1.0));
    }
  }
  SUBCASE("cutoff profile is C^1 at the band edges and stays in [0,1]") {
    const double eps = 0.3, dr = 1e-6;
    for (double edge : {eps / 2, eps, 1 / eps, 2 / eps}) {
      const double left = (riesz_cutoff(edge, eps) - riesz_cutoff(edge - dr, eps)) / dr;
      const double right = (riesz_cutoff(edge + dr, eps) - riesz_cutoff(edge, eps)) / dr;
      CHECK(std::abs(left) < 1e-4);
      CHECK(std::abs(right) < 1e-4);
    }
    for (double r = 0; r < 8; r += 0.01) {
      CHECK(riesz_cutoff(r, eps) >= 0.0);
      CHECK(riesz_cutoff(r, eps) <= 1.0);
    }
  }
  SUBCASE("degenerate and unresolved eps") {
    CHECK_THROWS_AS(build_regularized_riesz(g, beta, 1.5), EpsilonTooLarge);
    CHECK_THROWS_AS(build_regularized_riesz(g, beta, 0.0), EpsilonTooLarge);
    auto rr = build_regularized_riesz(g, beta, 0.04);  // eps/2 < h = 1/32
    CHECK(rr.warnings.size() == 1);
    CHECK(build_regularized_riesz(g, beta, 0.2).warnings.empty());
  }
}

TEST_CASE("regularized Riesz convolution approaches the Riesz potential as eps halves") {
  PeriodicGrid g(1, 8192, 32.0);
  const double beta = 0.4, s = 0.5 * (1.0 - beta);
  auto phi = sample(g, [](const std::vector<double>& p) { return p[0] * std::exp(-p[0] * p[0]); });
  auto reference = apply_multiplier(phi, [&](std::span<const double>, double k2) -> std::complex<double> {
    return k2 == 0.0 ? 0.0 : std::pow(k2, -s);
  });
  double previous = 1e300;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    auto rr = build_regularized_riesz(g, beta, eps);
    auto conv = periodic_convolve(phi, rr.full);
    for (auto& v : conv.values) v /= rr.full.fourier_constant;
    ScalarField diff = conv;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= reference[i];
    const double err = l2(diff);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("mollifier") {
  PeriodicGrid g(1, 256, 4.0);
  SUBCASE("unit mass and nonnegative") {
    for (double rho : {0.1, 0.5, 2.0}) {
      auto w = build_mollifier(g, rho);
      CHECK(std::abs(ScalarField(g, w.values).integral() - 1.0) <= 1e-14);
      for (double v : w.values) CHECK(v >= 0.0);
    }
    PeriodicGrid g2(2, 64, 2.0);
    auto w2 = build_mollifier(g2, 0.3);
    CHECK(std::abs(ScalarField(g2, w2.values).integral() - 1.0) <= 1e-14);
  }
  SUBCASE("continuous normalization is already close before renormalizing") {
    // c_1 = 15/16 on the fine grid: discrete mass before renormalization ~ 1
    auto w = build_mollifier(PeriodicGrid(1, 4096, 4.0), 1.0);
    CHECK(w.values[0] == doctest::Approx(15.0 / 16.0).epsilon(1e-5));
  }
  SUBCASE("second-order approximation of the identity") {
    auto u = sample(g, [](const std::vector<double>& p) { return std::exp(-p[0] * p[0]); });
    std::vector<double> errs;
    for (double rho : {0.8, 0.4, 0.2}) {
      auto wu = periodic_convolve(u, build_mollifier(g, rho));
      ScalarField diff = wu;
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= u[i];
      errs.push_back(l2(diff));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double ratio = errs[i - 1] / errs[i];
      CHECK(ratio > 3.0);
      CHECK(ratio < 5.0);
    }
  }
  SUBCASE("unresolved width") {
    CHECK_THROWS_AS(build_mollifier(g, 0.05), RhoUnresolved);
  }
}

TEST_CASE("periodic convolution") {
  PeriodicGrid g(2, 32, 3.0);
  std::mt19937_64 rng(11);
  auto f = random_field(g, rng);
  SUBCASE("delta kernel is the identity") {
    CHECK(max_diff(periodic_convolve(f, delta_kernel(g)), f) <= 1e-12 * f.max_abs());
  }
  SUBCASE("unit-mass kernel preserves the integral") {
    auto out = periodic_convolve(f, build_mollifier(g, 0.8));
    CHECK(std::abs(out.integral() - f.integral()) <= 1e-12 * std::max(1.0, l2(f)));
  }
  SUBCASE("commutative") {
    auto h = random_field(g, rng);
    auto a = periodic_convolve(f, kernel_from_values(g, h.values));
    auto b = periodic_convolve(h, kernel_from_values(g, f.values));
    CHECK(max_diff(a, b) <= 1e-12 * a.max_abs());
  }
  SUBCASE("linear and translation-commuting") {
    auto w = build_mollifier(g, 0.6);
    auto h = random_field(g, rng);
    ScalarField comb = f;
    for (std::size_t i = 0; i < f.size(); ++i) comb[i] = 2.0 * f[i] - 0.5 * h[i];
    auto lhs = periodic_convolve(comb, w);
    auto cf = periodic_convolve(f, w), ch = periodic_convolve(h, w);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(lhs[i] == doctest::Approx(2.0 * cf[i] - 0.5 * ch[i]).scale(1.0).epsilon(1e-12));
    // shift by 3 along the last axis
    auto shift = [&](const ScalarField& in) {
      ScalarField out(g);
      for (std::size_t i = 0; i < in.size(); ++i) {
        const std::size_t row = i / 32, col = i % 32;
        out[row * 32 + (col + 3) % 32] = in[i];
      }
      return out;
    };
    CHECK(max_diff(periodic_convolve(shift(f), w), shift(cf)) <= 1e-12 * cf.max_abs());
  }
  SUBCASE("grid mismatch") {
    CHECK_THROWS_AS(periodic_convolve(f, build_mollifier(PeriodicGrid(2, 16, 3.0), 0.8)), GridMismatch);
  }
}

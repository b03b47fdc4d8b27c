#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fracross/diagnostics.hpp"
#include "fracross/errors.hpp"
#include "fracross/spectral.hpp"

using namespace fracross;

namespace {

ScalarField gaussian(const PeriodicGrid& g, double center, double width, double mass) {
  ScalarField f(g);
  const double norm = mass / std::pow(std::sqrt(2.0 * std::numbers::pi) * width, g.dim());
  for (std::size_t x = 0; x < g.size(); ++x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double y = g.coordinate(x, a) - center;
      r2 += y * y;
    }
    f[x] = norm * std::exp(-0.5 * r2 / (width * width));
  }
  return f;
}

ScalarField random_positive(const PeriodicGrid& g, std::mt19937_64& rng) {
  std::lognormal_distribution<double> dist(0.0, 1.5);
  ScalarField f(g);
  for (auto& v : f.values) v = dist(rng);
  return f;
}

SystemSpec spec_for(int n, double alpha, double beta, double sigma) {
  SystemSpec s;
  s.n = n;
  s.alpha = alpha;
  s.beta = beta;
  s.sigma.assign(n, sigma);
  s.A = Matrix::identity(n);
  return s;
}

}  // namespace

TEST_CASE("entropy functional") {
  SUBCASE("unit density has zero entropy") {
    PeriodicGrid g(2, 16, 3.0);
    std::vector<ScalarField> u{ScalarField(g, 1.0), ScalarField(g, 1.0)};
    CHECK(entropy_functional(u, std::vector<double>{1.0, 2.5}) == 0.0);
  }
  SUBCASE("constant e on unit volume") {
    PeriodicGrid g(1, 32, 0.5);
    std::vector<ScalarField> u{ScalarField(g, std::numbers::e)};
    CHECK(entropy_functional(u, std::vector<double>{1.0}) == doctest::Approx(std::numbers::e).epsilon(1e-14));
  }
  SUBCASE("zeros contribute nothing") {
    PeriodicGrid g(1, 8, 1.0);
    ScalarField f(g, 0.0);
    f[3] = 2.0;
    std::vector<ScalarField> u{f};
    CHECK(entropy_functional(u, std::vector<double>{1.0}) == doctest::Approx(2.0 * std::log(2.0) * g.cell_volume()));
  }
  SUBCASE("Gaussian profile against the closed form") {
    // int G log G = M log(M / (sqrt(2 pi) w)) - M / 2 in d = 1
    const double w = 0.7, mass = 1.3;
    const double exact = mass * std::log(mass / (std::sqrt(2.0 * std::numbers::pi) * w)) - 0.5 * mass;
    double previous = 1.0;
    for (int n : {32, 64, 128}) {
      PeriodicGrid g(1, n, 8.0);
      std::vector<ScalarField> u{gaussian(g, 0.2, w, mass)};
      const double err = std::abs(entropy_functional(u, std::vector<double>{1.0}) - exact);
      CHECK(err <= previous);
      previous = err;
    }
    CHECK(previous <= 1e-8);
  }
  SUBCASE("negative values abort") {
    PeriodicGrid g(1, 16, 1.0);
    ScalarField f(g, 1.0);
    f[2] = -1e-3;
    std::vector<ScalarField> u{f};
    CHECK_THROWS_AS(entropy_functional(u, std::vector<double>{1.0}), NonAdmissible);
    f[2] = -1e-10;  // inside the tolerance band
    u[0] = f;
    CHECK_NOTHROW(entropy_functional(u, std::vector<double>{1.0}));
  }
  SUBCASE("constant state minimizes entropy at fixed mass") {
    PeriodicGrid g(1, 64, 2.0);
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
      std::vector<ScalarField> u{random_positive(g, rng)};
      const double mass = u[0].integral();
      std::vector<ScalarField> flat{ScalarField(g, mass / g.volume())};
      CHECK(entropy_functional(u, std::vector<double>{1.0}) >= entropy_functional(flat, std::vector<double>{1.0}));
    }
  }
}

TEST_CASE("entropy production") {
  PeriodicGrid g(1, 64, std::numbers::pi);
  const SystemSpec spec = spec_for(2, 0.4, 0.6, 0.8);
  SUBCASE("constant state") {
    std::vector<ScalarField> u{ScalarField(g, 2.0), ScalarField(g, 0.5)};
    auto p = entropy_production(u, spec, 1.0);
    CHECK(std::abs(p.frac) <= 1e-20);
    CHECK(std::abs(p.cross) <= 1e-20);
  }
  SUBCASE("nonnegative on random states") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
      std::vector<ScalarField> u{random_positive(g, rng), random_positive(g, rng)};
      auto p = entropy_production(u, spec, 0.7);
      CHECK(p.frac >= 0.0);
      CHECK(p.cross >= 0.0);
    }
  }
  SUBCASE("single-mode perturbation of a constant") {
    // u = 2 + a cos(3x): D_cross = lambda |k|^{beta+1} a^2 L for one species
    const double a = 0.1, lambda = 1.7;
    ScalarField f(g);
    for (std::size_t x = 0; x < g.size(); ++x) f[x] = 2.0 + a * std::cos(3.0 * g.coordinate(x, 0));
    std::vector<ScalarField> u{f, ScalarField(g, 1.0)};
    const double expect = lambda * std::pow(3.0, spec.beta + 1.0) * a * a * std::numbers::pi;
    CHECK(entropy_production(u, spec, lambda).cross == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("translation invariance") {
    PeriodicGrid g2(2, 16, 2.0);
    std::mt19937_64 rng(10);
    ScalarField f = random_positive(g2, rng);
    ScalarField shifted(g2);
    for (std::size_t i = 0; i < f.size(); ++i) shifted[(i + 5 * 16) % f.size()] = f[i];
    std::vector<ScalarField> a{f, f}, b{shifted, shifted};
    auto pa = entropy_production(a, spec, 1.0);
    auto pb = entropy_production(b, spec, 1.0);
    CHECK(pa.frac == doctest::Approx(pb.frac).epsilon(1e-12));
    CHECK(pa.cross == doctest::Approx(pb.cross).epsilon(1e-12));
  }
}

TEST_CASE("entropy inequality residual bookkeeping") {
  std::vector<double> H{1.0, 0.8, 0.7}, D{3.0, 1.0, 0.5}, dt{0.1, 0.1};
  auto r = entropy_inequality_residual(H, D, dt);
  REQUIRE(r.per_step.size() == 2);
  CHECK(r.per_step[0] == doctest::Approx(-0.2 + 0.3));
  CHECK(r.per_step[1] == doctest::Approx(-0.1 + 0.1));
  CHECK(r.integrated == doctest::Approx(-0.3 + 0.4));
  CHECK(r.max == doctest::Approx(0.1));
  auto mid = entropy_inequality_residual(H, D, dt, true);
  CHECK(mid.per_step[0] == doctest::Approx(-0.2 + 0.2));
  std::vector<double> flat{0.0, 0.0, 0.0}, zero{0.0, 0.0, 0.0};
  auto still = entropy_inequality_residual(flat, zero, dt);
  CHECK(still.max == 0.0);
  CHECK(still.integrated == 0.0);
}

TEST_CASE("mass and moments") {
  PeriodicGrid g(1, 256, 8.0);
  auto bump = gaussian(g, 0.0, 0.2, 1.0);
  std::vector<ScalarField> u{bump};
  auto q = conserved_quantities(u, 0.4);
  CHECK(q.mass[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.moment[0] == doctest::Approx(q.mass[0]).epsilon(1e-2));
  CHECK(q.moment[0] >= q.mass[0]);
  // translate by 17 cells
  ScalarField moved(g);
  for (std::size_t i = 0; i < g.size(); ++i) moved[(i + 17) % g.size()] = bump[i];
  std::vector<ScalarField> v{moved};
  CHECK(std::abs(conserved_quantities(v, 0.4).mass[0] - q.mass[0]) <= 1e-13);
}

TEST_CASE("Lp norms") {
  PeriodicGrid g(2, 8, 0.5);
  std::vector<ScalarField> u{ScalarField(g, 3.0)};
  const std::vector<double> ps{1.0, 2.0, 3.5, std::numeric_limits<double>::infinity()};
  const auto table = lp_norms(u, ps);
  for (double v : table[0]) CHECK(v == doctest::Approx(3.0).epsilon(1e-14));

  std::mt19937_64 rng(12);
  PeriodicGrid g1(1, 64, 3.0);
  std::vector<ScalarField> w{random_positive(g1, rng)};
  const std::vector<double> ps2{1.0, 2.0};
  auto norms = lp_norms(w, ps2);
  CHECK(norms[0][0] == doctest::Approx(w[0].integral()).epsilon(1e-14));
  CHECK(norms[0][1] == doctest::Approx(parseval_l2(g1, forward_transform(w[0]))).epsilon(1e-12));
  const std::vector<double> bad{0.5};
  CHECK_THROWS(lp_norms(w, bad));
}

TEST_CASE("Stroock-Varopoulos gap") {
  SUBCASE("scalar inequality at a = 4, b = 1") {
    const double lhs = (4.0 - 1.0) * (std::log(4.0) - std::log(1.0));
    CHECK(lhs == doctest::Approx(4.1589).epsilon(1e-4));
    CHECK(lhs >= 4.0 * (2.0 - 1.0) * (2.0 - 1.0));
  }
  SUBCASE("constant field") {
    PeriodicGrid g(1, 64, 1.0);
    CHECK(stroock_varopoulos_gap(ScalarField(g, 2.5), 0.5, 1.0) == 0.0);
  }
  SUBCASE("random positive fields") {
    PeriodicGrid g(1, 64, 1.0);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> sdist(0.05, 0.95);
    double worst = 1.0;
    for (int t = 0; t < 1000; ++t) {
      auto terms = stroock_varopoulos_terms(random_positive(g, rng), sdist(rng), 1.0);
      worst = std::min(worst, terms.gap);
      CHECK(terms.rhs >= 0.0);
    }
    CHECK(worst >= -1e-12);
  }
  SUBCASE("two-dimensional field and truncation") {
    PeriodicGrid g(2, 8, 1.0);
    std::mt19937_64 rng(14);
    auto u = random_positive(g, rng);
    CHECK(stroock_varopoulos_gap(u, 0.3, 0.5) >= 0.0);
    CHECK(stroock_varopoulos_gap(u, 0.3, 1.4) >= 0.0);
  }
  SUBCASE("errors and floor") {
    PeriodicGrid g(1, 16, 1.0);
    ScalarField u(g, 1.0);
    u[0] = -0.1;
    CHECK_THROWS_AS(stroock_varopoulos_gap(u, 0.5, 1.0), NonPositiveField);
    u[0] = 0.0;
    auto t = stroock_varopoulos_terms(u, 0.5, 1.0);
    CHECK(t.floor_used);
    CHECK(t.gap >= 0.0);
  }
}

#include "fracross/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace fracross::special {

double hurwitz_zeta(double a, double q) {
  if (!(a > 1.0) || !(q > 0.0)) throw std::domain_error("hurwitz_zeta: need a > 1, q > 0");
  // B_{2j}/(2j)! for j = 1..8
  static constexpr std::array<double, 8> kBernoulliOverFactorial = {
      1.0 / 12.0,           -1.0 / 720.0,           1.0 / 30240.0,
      -1.0 / 1209600.0,     1.0 / 47900160.0,       -691.0 / 1307674368000.0,
      1.0 / 74724249600.0,  -3617.0 / 10670622842880000.0};
  constexpr int kHead = 16;
  double sum = 0.0;
  for (int k = 0; k < kHead; ++k) sum += std::pow(q + k, -a);
  const double x = q + kHead;
  sum += std::pow(x, 1.0 - a) / (a - 1.0) + 0.5 * std::pow(x, -a);
  // rising product a (a+1) ... (a+2j-2) times x^{-a-2j+1}
  double rising = a;
  double xpow = std::pow(x, -a - 1.0);
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    sum += kBernoulliOverFactorial[j] * rising * xpow;
    rising *= (a + 2.0 * j + 1.0) * (a + 2.0 * j + 2.0);
    xpow /= x * x;
  }
  return sum;
}

double riemann_zeta(double a) { return std::riemann_zeta(a); }

namespace {

// Upper incomplete gamma for any real a (x > 0).
double upper_gamma(double a, double x) {
  if (a > 0.0) return boost::math::tgamma(a, x);
  if (a == 0.0) return boost::math::expint(1, x);
  // Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a
  return (upper_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

}  // namespace

double epstein_zeta(int d, double nu) {
  if (d < 1) throw std::domain_error("epstein_zeta: d >= 1");
  if (d == 1) return 2.0 * riemann_zeta(nu);
  const double s = 0.5 * nu;
  if (!(s > 0.0) || s == 0.5 * d) throw std::domain_error("epstein_zeta: nu outside supported range");
  const double pi = std::numbers::pi;
  constexpr int kRange = 6;
  std::vector<int> m(static_cast<std::size_t>(d), -kRange);
  double lattice = 0.0;
  for (;;) {
    long norm2 = 0;
    for (int c : m) norm2 += static_cast<long>(c) * c;
    if (norm2 > 0) {
      const double x = pi * static_cast<double>(norm2);
      lattice += upper_gamma(s, x) * std::pow(x, -s) +
                 upper_gamma(0.5 * d - s, x) * std::pow(x, s - 0.5 * d);
    }
    int axis = 0;
    while (axis < d && ++m[axis] > kRange) m[axis++] = -kRange;
    if (axis == d) break;
  }
  const double completed = -1.0 / s - 1.0 / (0.5 * d - s) + lattice;
  return completed * std::pow(pi, s) / std::tgamma(s);
}

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace fracross::special

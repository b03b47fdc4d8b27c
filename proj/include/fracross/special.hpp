#pragma once

namespace fracross::special {

/// Hurwitz zeta sum_{k>=0} (q+k)^{-a}, a > 1, q > 0 (Euler-Maclaurin).
double hurwitz_zeta(double a, double q);

/// Riemann zeta for any real a != 1, including the analytic continuation.
double riemann_zeta(double a);

/// Epstein zeta of the cubic lattice, sum over nonzero m in Z^d of |m|^{-nu},
/// analytically continued in nu (nu != d, nu != 0).
double epstein_zeta(int d, double nu);

/// Surface measure of the unit sphere in R^d.
double sphere_area(int d);

}  // namespace fracross::special

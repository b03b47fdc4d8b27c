#pragma once

#include <span>
#include <vector>

#include "fracross/grid.hpp"
#include "fracross/model.hpp"

namespace fracross {

/// Floor for log u inside diagnostics.
inline constexpr double kLogFloor = 1e-300;
/// Values below -kNegativityTol * max u make a state non-admissible.
inline constexpr double kNegativityTol = 1e-8;

/// Throws NonAdmissible when some species dips below -kNegativityTol * max.
void require_admissible(std::span<const ScalarField> u);

/// H[u] = sum_i pi_i sum_x u_i log u_i h^d with 0 log 0 = 0.
double entropy_functional(std::span<const ScalarField> u, std::span<const double> pi);

struct EntropyProduction {
  double frac = 0.0;   ///< 4 sum_i sigma_i int |(-Delta)^{alpha/2} sqrt(u_i)|^2
  double cross = 0.0;  ///< lambda sum_i int |grad (-Delta)^{(beta-1)/4} u_i|^2
  double total() const noexcept { return frac + cross; }
};

EntropyProduction entropy_production(std::span<const ScalarField> u, const SystemSpec& spec, double lambda);

struct ResidualSeries {
  std::vector<double> per_step;
  double integrated = 0.0;  ///< H(T) - H(0) + sum dt D
  double max = 0.0;
};

/// residual_k = H_{k+1} - H_k + dt_k D_k, with D_k taken at the step start, or
/// the trapezoid average of D_k and D_{k+1} when `midpoint` is set.
ResidualSeries entropy_inequality_residual(std::span<const double> entropy, std::span<const double> production,
                                           std::span<const double> dt, bool midpoint = false);

struct ConservedQuantities {
  std::vector<double> mass;
  std::vector<double> moment;
};

/// Grid masses and moments sum u_i (1+|x|^2)^{m/2} h^d with box coordinates.
ConservedQuantities conserved_quantities(std::span<const ScalarField> u, double m);

/// norms[i][p] = (sum |u_i|^p h^d)^{1/p}; an infinite exponent gives the max norm.
std::vector<std::vector<double>> lp_norms(std::span<const ScalarField> u, std::span<const double> exponents);

struct StroockVaropoulosTerms {
  double lhs = 0.0;  ///< (c/2) sum w (u(x)-u(y)) (log u(x) - log u(y))
  double rhs = 0.0;  ///< 2c sum w (sqrt u(x) - sqrt u(y))^2
  double gap = 0.0;  ///< lhs - rhs
  bool floor_used = false;
};

/// Both sides of the fractional chain-rule inequality in pairwise quadrature
/// form with w = |x-y|^{-d-2s} h^{2d}, minimum-image distances up to r_cut.
/// Throws NonPositiveField for negative values; zeros are lifted to kLogFloor.
StroockVaropoulosTerms stroock_varopoulos_terms(const ScalarField& u, double s, double r_cut);

double stroock_varopoulos_gap(const ScalarField& u, double s, double r_cut);

}  // namespace fracross

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fracross/grid.hpp"

namespace fracross {

/// Relative tolerance for detailed balance and symmetry checks.
inline constexpr double kDetailedBalanceTol = 1e-10;

/// Small dense row-major square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n, double fill = 0.0) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}
  Matrix(int n, std::vector<double> row_major);

  static Matrix identity(int n);

  int size() const noexcept { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<double>& data() const noexcept { return a_; }

  double frobenius() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int n_ = 0;
  std::vector<double> a_;
};

/// The model: species count, dimension, orders, coefficients.
struct SystemSpec {
  int n = 1;
  int d = 1;
  double alpha = 0.5;
  double beta = 0.5;
  std::vector<double> sigma{1.0};
  Matrix A{Matrix::identity(1)};
  std::optional<std::vector<double>> pi;
  double m = 0.4;
};

struct InvariantMeasure {
  std::vector<double> pi;
  /// Component label of each species in the interaction graph.
  std::vector<int> component;
  int component_count = 1;
  bool connected() const noexcept { return component_count == 1; }
};

/// Weights pi with pi_i a_ij = pi_j a_ji, normalized to 1 at the first index
/// of each connected component. Throws NoInvariantMeasure.
InvariantMeasure find_invariant_measure(const Matrix& A);

struct SymmetricEigen {
  std::vector<double> values;  ///< ascending
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until off-diagonal Frobenius mass < 1e-12 ||S||.
SymmetricEigen jacobi_eigenvalues(const Matrix& S);

/// True when a symmetric triangular (Cholesky) factorization succeeds.
bool cholesky_succeeds(const Matrix& S);

struct SymmetrizedSystem {
  Matrix S;
  double symmetry_defect = 0.0;
  double lambda_min = 0.0;
  bool positive_definite = false;
};

/// S = diag(pi) A with its smallest eigenvalue. Throws NotSymmetric.
SymmetrizedSystem symmetrize_and_check(const Matrix& A, const std::vector<double>& pi);

struct Violation {
  std::string what;
};

/// Report-style admissibility check of the model and initial data.
std::vector<Violation> validate_system(const SystemSpec& spec, const std::vector<ScalarField>& u0);

/// Only the model invariants (no initial data).
std::vector<Violation> validate_spec(const SystemSpec& spec);

}  // namespace fracross

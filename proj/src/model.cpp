#include "fracross/model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "fracross/errors.hpp"

namespace fracross {

Matrix::Matrix(int n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
  if (a_.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("matrix data is not n x n");
}

Matrix Matrix::identity(int n) {
  Matrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::frobenius() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

namespace {

bool balanced(double lhs, double rhs) {
  return std::abs(lhs - rhs) <= kDetailedBalanceTol * std::max(1.0, std::abs(lhs));
}

}  // namespace

InvariantMeasure find_invariant_measure(const Matrix& A) {
  const int n = A.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (A(i, j) < 0.0) throw std::invalid_argument("interaction matrix has negative entries");

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((A(i, j) > 0.0) != (A(j, i) > 0.0)) {
        std::ostringstream os;
        os << "a_" << i + 1 << j + 1 << " and a_" << j + 1 << i + 1
           << " must be both zero or both positive";
        throw NoInvariantMeasure(os.str());
      }

  InvariantMeasure out;
  out.pi.assign(static_cast<std::size_t>(n), 0.0);
  out.component.assign(static_cast<std::size_t>(n), -1);
  out.component_count = 0;
  for (int root = 0; root < n; ++root) {
    if (out.component[root] >= 0) continue;
    const int label = out.component_count++;
    out.component[root] = label;
    out.pi[root] = 1.0;
    std::queue<int> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      const int i = frontier.front();
      frontier.pop();
      for (int j = 0; j < n; ++j) {
        if (j == i || out.component[j] >= 0 || A(i, j) == 0.0) continue;
        out.component[j] = label;
        out.pi[j] = out.pi[i] * A(i, j) / A(j, i);
        frontier.push(j);
      }
    }
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!balanced(out.pi[i] * A(i, j), out.pi[j] * A(j, i))) {
        std::ostringstream os;
        os << "cycle condition fails for pair (" << i + 1 << ", " << j + 1 << ")";
        throw NoInvariantMeasure(os.str());
      }
  return out;
}

SymmetricEigen jacobi_eigenvalues(const Matrix& S0) {
  Matrix S = S0;
  const int n = S.size();
  const double threshold = 1e-12 * S.frobenius();
  auto off_mass = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += S(i, j) * S(i, j);
    return std::sqrt(s);
  };

  SymmetricEigen out;
  constexpr int kMaxSweeps = 100;
  while (out.sweeps < kMaxSweeps && off_mass() >= threshold && threshold > 0.0) {
    ++out.sweeps;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = S(p, q);
        if (apq == 0.0) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
    }
  }
  out.values.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.values[i] = S(i, i);
  std::sort(out.values.begin(), out.values.end());
  return out;
}

bool cholesky_succeeds(const Matrix& S) {
  const int n = S.size();
  Matrix L(n);
  for (int j = 0; j < n; ++j) {
    double diag = S(j, j);
    for (int k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
    if (!(diag > 0.0)) return false;
    L(j, j) = std::sqrt(diag);
    for (int i = j + 1; i < n; ++i) {
      double v = S(i, j);
      for (int k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / L(j, j);
    }
  }
  return true;
}

SymmetrizedSystem symmetrize_and_check(const Matrix& A, const std::vector<double>& pi) {
  const int n = A.size();
  if (pi.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("pi has wrong length");
  for (double p : pi)
    if (!(p > 0.0)) throw std::invalid_argument("pi must be strictly positive");

  SymmetrizedSystem out;
  out.S = Matrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.S(i, j) = pi[i] * A(i, j);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double defect = std::abs(out.S(i, j) - out.S(j, i)) / std::max(1.0, std::abs(out.S(i, j)));
      out.symmetry_defect = std::max(out.symmetry_defect, defect);
    }
  if (out.symmetry_defect > kDetailedBalanceTol) {
    std::ostringstream os;
    os << "diag(pi) A is not symmetric (defect " << out.symmetry_defect << "); detailed balance fails";
    throw NotSymmetric(os.str());
  }
  // Average the two triangles so Jacobi sees an exactly symmetric matrix.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.S(i, j) = out.S(j, i) = 0.5 * (out.S(i, j) + out.S(j, i));

  out.positive_definite = cholesky_succeeds(out.S);
  out.lambda_min = jacobi_eigenvalues(out.S).values.front();
  return out;
}

std::vector<Violation> validate_spec(const SystemSpec& spec) {
  std::vector<Violation> v;
  auto add = [&](std::string s) { v.push_back({std::move(s)}); };
  if (spec.n < 1) add("n must be at least 1");
  if (spec.d < 1) add("d must be at least 1");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) add("alpha must lie in (0,1)");
  if (!(spec.beta > 0.0 && spec.beta < 1.0)) add("beta must lie in (0,1)");
  if (spec.sigma.size() != static_cast<std::size_t>(spec.n)) add("sigma must have n entries");
  for (double s : spec.sigma)
    if (!(s >= 0.0) || !std::isfinite(s)) add("sigma entries must be nonnegative");
  if (spec.A.size() != spec.n) {
    add("A must be n x n");
  } else {
    for (double a : spec.A.data())
      if (!(a >= 0.0) || !std::isfinite(a)) {
        add("A entries must be nonnegative");
        break;
      }
  }
  if (spec.pi) {
    const auto& pi = *spec.pi;
    if (pi.size() != static_cast<std::size_t>(spec.n)) {
      add("pi must have n entries");
    } else {
      bool positive = std::all_of(pi.begin(), pi.end(), [](double p) { return p > 0.0; });
      if (!positive) add("pi entries must be positive");
      if (positive && spec.A.size() == spec.n) {
        for (int i = 0; i < spec.n; ++i)
          for (int j = 0; j < spec.n; ++j)
            if (!balanced(pi[i] * spec.A(i, j), pi[j] * spec.A(j, i))) {
              std::ostringstream os;
              os << "detailed balance fails: pi_" << i + 1 << " a_" << i + 1 << j + 1 << " != pi_" << j + 1
                 << " a_" << j + 1 << i + 1;
              add(os.str());
              i = spec.n;
              break;
            }
      }
    }
  }
  const double mmax = std::min(1.0, 2.0 * spec.alpha);
  if (!(spec.m > 0.0 && spec.m < mmax)) add("moment exponent m must lie in (0, min(1, 2 alpha))");
  return v;
}

std::vector<Violation> validate_system(const SystemSpec& spec, const std::vector<ScalarField>& u0) {
  std::vector<Violation> v = validate_spec(spec);
  auto add = [&](std::string s) { v.push_back({std::move(s)}); };
  if (u0.size() != static_cast<std::size_t>(spec.n)) {
    add("initial data must provide n fields");
    return v;
  }
  for (std::size_t i = 0; i < u0.size(); ++i) {
    const ScalarField& f = u0[i];
    const std::string tag = " (species " + std::to_string(i + 1) + ")";
    if (f.grid.dim() != spec.d) add("initial data grid dimension differs from d" + tag);
    if (!f.all_finite()) {
      add("initial data not finite" + tag);
      continue;
    }
    if (f.min() < 0.0) add("initial data not nonnegative" + tag);
    double moment = 0.0, entropy = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) {
      const double u = f[x];
      moment += std::abs(u) * std::pow(1.0 + f.grid.radius_squared(x), 0.5 * spec.m);
      if (u > 0.0) entropy += u * std::log(u);
    }
    if (!std::isfinite(moment)) add("initial moment not finite" + tag);
    if (!std::isfinite(entropy)) add("initial u log u not integrable" + tag);
  }
  return v;
}

}  // namespace fracross

#include "fracross/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fracross/spectral.hpp"

namespace fracross {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

bool matrix_is_zero(const Matrix& A) {
  return std::all_of(A.data().begin(), A.data().end(), [](double a) { return a == 0.0; });
}

ScalarField filtered(const ScalarField& f) {
  Spectrum s = forward_transform(f);
  dealias_in_place(f.grid, s);
  return inverse_transform(f.grid, s);
}

// Spectrum of div((u_i)_+ V) with V the transport velocity components.
Spectrum transport_divergence(const ScalarField& u, const std::vector<ScalarField>& velocity, bool dealias) {
  const PeriodicGrid& grid = u.grid;
  ScalarField positive = u;
  for (double& v : positive.values) v = std::max(v, 0.0);
  if (dealias) positive = filtered(positive);
  Spectrum div(grid.size(), 0.0);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const ScalarField va = dealias ? filtered(velocity[axis]) : velocity[axis];
    ScalarField product(grid);
    for (std::size_t x = 0; x < grid.size(); ++x) product[x] = positive[x] * va[x];
    Spectrum ph = forward_transform(product);
    if (dealias) dealias_in_place(grid, ph);
    for_each_mode(grid, [&](std::size_t flat, std::span<const double> k, double, std::span<const int> idx) {
      if (!grid.is_nyquist(idx[axis])) div[flat] += kI * k[axis] * ph[flat];
    });
  }
  div[0] = 0.0;
  return div;
}

std::vector<ScalarField> velocity_of(int i, const SystemSpec& spec, const std::vector<std::vector<ScalarField>>& grads,
                                     const PeriodicGrid& grid) {
  std::vector<ScalarField> v(static_cast<std::size_t>(grid.dim()), ScalarField(grid));
  for (int j = 0; j < spec.n; ++j) {
    const double a = spec.A(i, j);
    if (a == 0.0) continue;
    for (int axis = 0; axis < grid.dim(); ++axis)
      for (std::size_t x = 0; x < grid.size(); ++x) v[axis][x] += a * grads[j][axis][x];
  }
  return v;
}

}  // namespace

void validate_params(const SchemeParams& p) {
  if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(p.T >= p.dt)) throw std::invalid_argument("T must be at least dt");
  if (!(p.kappa >= 0.0) || !(p.eps >= 0.0) || !(p.rho >= 0.0))
    throw std::invalid_argument("kappa, eps and rho must be nonnegative");
  if (!(p.cfl > 0.0)) throw std::invalid_argument("cfl must be positive");
  if (p.snapshot_every < 1) throw std::invalid_argument("snapshot_every must be at least 1");
}

std::optional<EntropyStructure> entropy_structure(const SystemSpec& spec) {
  EntropyStructure out;
  try {
    if (spec.pi) {
      out.pi = *spec.pi;
    } else {
      auto measure = find_invariant_measure(spec.A);
      out.pi = measure.pi;
      out.connected = measure.connected();
    }
    auto sym = symmetrize_and_check(spec.A, out.pi);
    out.lambda = sym.lambda_min;
    out.positive_definite = sym.positive_definite;
  } catch (const NoInvariantMeasure&) {
    return std::nullopt;
  } catch (const NotSymmetric&) {
    return std::nullopt;
  }
  return out;
}

ScalarField eval_stabilizer(const ScalarField& u, double rho, const KernelTable* mollifier) {
  const PeriodicGrid& grid = u.grid;
  ScalarField p(grid);
  if (rho > 0.0) {
    if (mollifier == nullptr) throw MissingMollifier("rho > 0 needs a mollifier table");
    if (!(mollifier->grid == grid) || mollifier->kind != KernelKind::Mollifier || mollifier->scale != rho)
      throw MissingMollifier("mollifier table does not match the grid or rho");
    const ScalarField wu = periodic_convolve(u, *mollifier);
    for (std::size_t x = 0; x < grid.size(); ++x) p[x] = u[x] * wu[x];
  } else {
    for (std::size_t x = 0; x < grid.size(); ++x) p[x] = u[x] * u[x];
  }
  ScalarField weight(grid);
  double weight_mass = 0.0;
  const double norm = 1.0 / std::pow(std::numbers::pi, 0.5 * grid.dim());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    weight[x] = norm * std::exp(-grid.radius_squared(x));
    weight_mass += weight[x];
  }
  weight_mass *= grid.cell_volume();
  const double total = p.integral();
  for (std::size_t x = 0; x < grid.size(); ++x) p[x] -= weight[x] / weight_mass * total;
  return p;
}

TransportOperator TransportOperator::exact(double beta) {
  TransportOperator t;
  t.beta_ = beta;
  return t;
}

TransportOperator TransportOperator::regularized(const PeriodicGrid& grid, double beta, double eps) {
  TransportOperator t;
  t.beta_ = beta;
  t.riesz_ = build_regularized_riesz(grid, beta, eps);
  return t;
}

std::vector<ScalarField> TransportOperator::field_gradient(const ScalarField& u) const {
  if (riesz_) return regularized_nonlocal_gradient(u, riesz_->full);
  return nonlocal_gradient(u, beta_);
}

const std::vector<std::string>& TransportOperator::warnings() const noexcept {
  static const std::vector<std::string> none;
  return riesz_ ? riesz_->warnings : none;
}

std::vector<ScalarField> cross_diffusion_flux(const State& state, int i, const SystemSpec& spec,
                                              const TransportOperator& transport, bool dealias) {
  const PeriodicGrid& grid = state.u.at(i).grid;
  std::vector<std::vector<ScalarField>> grads(static_cast<std::size_t>(spec.n));
  for (int j = 0; j < spec.n; ++j)
    if (spec.A(i, j) != 0.0) grads[j] = transport.field_gradient(state.u[j]);
  const auto velocity = velocity_of(i, spec, grads, grid);

  ScalarField positive = state.u[i];
  for (double& v : positive.values) v = std::max(v, 0.0);
  if (dealias) positive = filtered(positive);
  std::vector<ScalarField> flux;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const ScalarField va = dealias ? filtered(velocity[axis]) : velocity[axis];
    ScalarField product(grid);
    for (std::size_t x = 0; x < grid.size(); ++x) product[x] = positive[x] * va[x];
    if (dealias) product = filtered(product);
    flux.push_back(std::move(product));
  }
  return flux;
}

ImexScheme::ImexScheme(const PeriodicGrid& grid, SystemSpec spec, SchemeParams params)
    : grid_(grid), spec_(std::move(spec)), params_(params) {
  validate_params(params_);
  transport_ = params_.eps > 0.0 ? TransportOperator::regularized(grid_, spec_.beta, params_.eps)
                                 : TransportOperator::exact(spec_.beta);
  if (params_.kappa > 0.0 && params_.rho > 0.0) mollifier_ = build_mollifier(grid_, params_.rho);
  structure_ = entropy_structure(spec_);
}

std::vector<std::string> ImexScheme::notes() const {
  std::vector<std::string> out = transport_.warnings();
  if (params_.kappa == 0.0) out.push_back("kappa = 0: limit system, no stabilizer, rho ignored");
  if (params_.kappa > 0.0 && params_.rho == 0.0) out.push_back("rho = 0: stabilizer g_0");
  if (!structure_) {
    out.push_back("A admits no invariant measure: entropy diagnostics disabled");
  } else {
    if (!structure_->connected) out.push_back("interaction graph disconnected: pi normalized per component");
    if (!structure_->positive_definite) out.push_back("diag(pi) A is not positive definite: D_cross uses lambda = 0");
  }
  return out;
}

std::vector<std::vector<ScalarField>> ImexScheme::gradients(const State& state) const {
  std::vector<std::vector<ScalarField>> grads(static_cast<std::size_t>(spec_.n));
  for (int j = 0; j < spec_.n; ++j) {
    bool used = false;
    for (int i = 0; i < spec_.n; ++i) used = used || spec_.A(i, j) != 0.0;
    if (used) grads[j] = transport_.field_gradient(state.u[j]);
  }
  return grads;
}

double ImexScheme::stable_dt(const State& state) const {
  if (matrix_is_zero(spec_.A)) return std::numeric_limits<double>::infinity();
  const auto grads = gradients(state);
  double vmax = 0.0;
  for (int i = 0; i < spec_.n; ++i)
    for (const ScalarField& v : velocity_of(i, spec_, grads, grid_)) vmax = std::max(vmax, v.max_abs());
  return vmax > 0.0 ? params_.cfl * grid_.spacing() / vmax : std::numeric_limits<double>::infinity();
}

StepOutcome ImexScheme::advance(const State& state, double dt_request) const {
  if (state.u.size() != static_cast<std::size_t>(spec_.n)) throw std::invalid_argument("state has wrong species count");
  StepOutcome out;
  out.dt = dt_request;

  std::vector<std::vector<ScalarField>> velocity(static_cast<std::size_t>(spec_.n));
  if (!matrix_is_zero(spec_.A)) {
    const auto grads = gradients(state);
    double vmax = 0.0;
    for (int i = 0; i < spec_.n; ++i) {
      velocity[i] = velocity_of(i, spec_, grads, grid_);
      for (const ScalarField& v : velocity[i]) vmax = std::max(vmax, v.max_abs());
    }
    if (params_.adaptive_dt && vmax > 0.0) out.dt = std::min(out.dt, params_.cfl * grid_.spacing() / vmax);
  }
  const double dt = out.dt;

  out.state.t = state.t + dt;
  for (int i = 0; i < spec_.n; ++i) {
    const ScalarField& u = state.u[i];
    Spectrum explicit_part = velocity[i].empty() ? Spectrum(grid_.size(), 0.0)
                                                 : transport_divergence(u, velocity[i], params_.dealias);
    if (params_.kappa > 0.0) {
      const Spectrum gh = forward_transform(eval_stabilizer(u, params_.rho, mollifier_ ? &*mollifier_ : nullptr));
      for (std::size_t k = 0; k < gh.size(); ++k) explicit_part[k] -= params_.kappa * gh[k];
    }
    explicit_part[0] = 0.0;

    Spectrum uh = forward_transform(u);
    const double sigma = spec_.sigma[i];
    for_each_mode(grid_, [&](std::size_t flat, std::span<const double>, double k2, std::span<const int>) {
      const double implicit = params_.kappa * k2 + (k2 > 0.0 ? sigma * std::pow(k2, spec_.alpha) : 0.0);
      uh[flat] = (uh[flat] + dt * explicit_part[flat]) / (1.0 + dt * implicit);
    });
    out.state.u.push_back(inverse_transform(grid_, uh));
  }

  for (int i = 0; i < spec_.n; ++i) {
    if (!out.state.u[i].all_finite()) {
      std::ostringstream os;
      os << "non-finite values in species " << i + 1 << " at t = " << out.state.t;
      throw NonFinite(os.str(), state, 0);
    }
  }

  if (params_.positivity == PositivityPolicy::Clamp) {
    for (ScalarField& f : out.state.u) {
      const double before = f.integral();
      double removed = 0.0;
      for (double& v : f.values)
        if (v < 0.0) {
          removed -= v;
          v = 0.0;
        }
      if (removed == 0.0) continue;
      const double after = f.integral();
      if (after > 0.0)
        for (double& v : f.values) v *= before / after;
      out.clamp_correction += removed * grid_.cell_volume();
    }
  }
  return out;
}

StepReport ImexScheme::diagnose(const State& state, std::size_t step, double dt, double clamp_correction) const {
  StepReport r;
  r.step = step;
  r.t = state.t;
  r.dt = dt;
  r.clamp_correction = clamp_correction;
  auto q = conserved_quantities(state.u, spec_.m);
  r.mass = std::move(q.mass);
  r.moment = std::move(q.moment);
  for (const ScalarField& f : state.u) r.min.push_back(f.min());
  if (structure_) {
    try {
      r.entropy = entropy_functional(state.u, structure_->pi);
      r.production = entropy_production(state.u, spec_, structure_->dissipation_weight());
    } catch (const NonAdmissible&) {
      r.entropy.reset();
      r.production = {};
    }
  }
  return r;
}

std::pair<State, StepReport> imex_step(const State& state, const SystemSpec& spec, const SchemeParams& params) {
  if (state.u.empty()) throw std::invalid_argument("imex_step: empty state");
  ImexScheme scheme(state.u.front().grid, spec, params);
  const StepReport before = scheme.diagnose(state, 0, 0.0, 0.0);
  StepOutcome out = scheme.advance(state, params.dt);
  StepReport report = scheme.diagnose(out.state, 1, out.dt, out.clamp_correction);
  if (before.entropy && report.entropy) {
    const double d = params.production == ProductionStamp::Midpoint
                         ? 0.5 * (before.production.total() + report.production.total())
                         : before.production.total();
    report.residual = *report.entropy - *before.entropy + out.dt * d;
  }
  return {std::move(out.state), std::move(report)};
}

Trajectory run_simulation(const std::vector<ScalarField>& u0, const SystemSpec& spec, const SchemeParams& params,
                          RunObserver* observer) {
  const auto violations = validate_system(spec, u0);
  if (!violations.empty()) {
    std::string msg = "inadmissible system:";
    for (const auto& v : violations) msg += " " + v.what + ";";
    throw ValidationError(msg);
  }
  ImexScheme scheme(u0.front().grid, spec, params);
  Trajectory traj;
  State state{0.0, u0};

  auto record_snapshot = [&](std::size_t step) {
    traj.snapshots.push_back(state);
    traj.snapshot_steps.push_back(step);
    if (observer) observer->on_snapshot(step, state);
  };

  StepReport previous = scheme.diagnose(state, 0, 0.0, 0.0);
  traj.reports.push_back(previous);
  if (observer) observer->on_report(previous);
  record_snapshot(0);

  const double tail = 1e-12 * std::max(1.0, params.T);
  std::size_t step = 0;
  while (params.T - state.t > tail) {
    const double remaining = params.T - state.t;
    const double request = remaining <= params.dt * (1.0 + 1e-9) ? remaining : params.dt;
    ++step;
    StepOutcome out;
    try {
      out = scheme.advance(state, request);
    } catch (const NonFinite& e) {
      throw NonFinite(e.what(), e.last_good(), step);
    }
    if (out.dt == request && request == remaining) out.state.t = params.T;
    state = std::move(out.state);

    StepReport report = scheme.diagnose(state, step, out.dt, out.clamp_correction);
    if (previous.entropy && report.entropy) {
      const double d = params.production == ProductionStamp::Midpoint
                           ? 0.5 * (previous.production.total() + report.production.total())
                           : previous.production.total();
      report.residual = *report.entropy - *previous.entropy + out.dt * d;
    }
    traj.reports.push_back(report);
    if (observer) observer->on_report(report);
    previous = std::move(report);

    const bool last = !(params.T - state.t > tail);
    if (step % static_cast<std::size_t>(params.snapshot_every) == 0 || last) record_snapshot(step);
  }
  return traj;
}

ResidualSeries entropy_inequality_residual(const Trajectory& trajectory, bool midpoint) {
  std::vector<double> H, D, dt;
  for (const StepReport& r : trajectory.reports) {
    if (!r.entropy) throw NonAdmissible("trajectory lacks entropy records");
    H.push_back(*r.entropy);
    D.push_back(r.production.total());
    if (r.step > 0) dt.push_back(r.dt);
  }
  return entropy_inequality_residual(H, D, dt, midpoint);
}

}  // namespace fracross

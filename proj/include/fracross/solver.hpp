#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracross/diagnostics.hpp"
#include "fracross/errors.hpp"
#include "fracross/fracops.hpp"
#include "fracross/model.hpp"

namespace fracross {

enum class PositivityPolicy { Monitor, Clamp };
enum class ProductionStamp { StepStart, Midpoint };

struct SchemeParams {
  double dt = 1e-3;
  double T = 1.0;
  double kappa = 0.0;  ///< artificial viscosity; 0 selects the limit system
  double eps = 0.0;    ///< kernel regularization; 0 uses the exact multiplier
  double rho = 0.0;    ///< mollifier width; 0 selects g_0 (only used when kappa > 0)
  bool dealias = true;
  PositivityPolicy positivity = PositivityPolicy::Monitor;
  int snapshot_every = 100;
  bool adaptive_dt = true;
  double cfl = 0.4;
  ProductionStamp production = ProductionStamp::StepStart;
};

/// Throws std::invalid_argument when dt, T, cfl or snapshot_every are unusable.
void validate_params(const SchemeParams& params);

struct State {
  double t = 0.0;
  std::vector<ScalarField> u;
};

struct StepReport {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;  ///< step that produced this state (0 for the initial row)
  std::vector<double> mass;
  std::vector<double> min;
  std::vector<double> moment;
  std::optional<double> entropy;
  EntropyProduction production;
  std::optional<double> residual;
  double clamp_correction = 0.0;
};

struct Trajectory {
  std::vector<State> snapshots;
  std::vector<std::size_t> snapshot_steps;
  std::vector<StepReport> reports;
};

/// Raised on blow-up; carries the last state with finite values.
class NonFinite : public Error {
 public:
  NonFinite(const std::string& what, State last_good, std::size_t step)
      : Error(what), last_good_(std::move(last_good)), step_(step) {}
  const State& last_good() const noexcept { return last_good_; }
  std::size_t step() const noexcept { return step_; }

 private:
  State last_good_;
  std::size_t step_;
};

/// pi and lambda for entropy diagnostics; empty when A has no invariant measure.
struct EntropyStructure {
  std::vector<double> pi;
  double lambda = 0.0;  ///< smallest eigenvalue of diag(pi) A
  bool positive_definite = false;
  bool connected = true;
  /// lambda used in D_cross: max(lambda, 0)
  double dissipation_weight() const noexcept { return lambda > 0.0 ? lambda : 0.0; }
};

std::optional<EntropyStructure> entropy_structure(const SystemSpec& spec);

/// g_rho[u] = u (W_rho * u) - G int u (W_rho * u), or g_0[u] = u^2 - G int u^2 when
/// rho = 0, with G the grid-renormalized Gaussian exp(-|x|^2)/pi^{d/2}.
/// Throws MissingMollifier when rho > 0 and no matching table is given.
ScalarField eval_stabilizer(const ScalarField& u, double rho, const KernelTable* mollifier);

/// Evaluates F_j: grad (K^(eps) * u_j) normalized, or the exact nonlocal gradient.
class TransportOperator {
 public:
  static TransportOperator exact(double beta);
  static TransportOperator regularized(const PeriodicGrid& grid, double beta, double eps);

  std::vector<ScalarField> field_gradient(const ScalarField& u) const;
  bool is_regularized() const noexcept { return riesz_.has_value(); }
  const std::vector<std::string>& warnings() const noexcept;

 private:
  double beta_ = 0.5;
  std::optional<RegularizedRiesz> riesz_;
};

/// sum_j a_ij (u_i)_+ F_j, products in physical space, optional 2/3-rule filtering.
std::vector<ScalarField> cross_diffusion_flux(const State& state, int i, const SystemSpec& spec,
                                              const TransportOperator& transport, bool dealias = true);

struct StepOutcome {
  State state;
  double dt = 0.0;
  double clamp_correction = 0.0;
};

/// First-order IMEX pseudospectral scheme: explicit div(flux) - kappa g,
/// implicit kappa |k|^2 + sigma_i |k|^{2 alpha} per mode.
class ImexScheme {
 public:
  ImexScheme(const PeriodicGrid& grid, SystemSpec spec, SchemeParams params);

  /// One step of size min(dt_request, adaptive bound). Throws NonFinite.
  StepOutcome advance(const State& state, double dt_request) const;

  /// Diagnostics of a state (residual left empty).
  StepReport diagnose(const State& state, std::size_t step, double dt, double clamp_correction) const;

  /// cfl h / max_i ||sum_j a_ij F_j||_inf (infinite when transport vanishes).
  double stable_dt(const State& state) const;

  const SystemSpec& spec() const noexcept { return spec_; }
  const SchemeParams& params() const noexcept { return params_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }
  const std::optional<EntropyStructure>& structure() const noexcept { return structure_; }
  const TransportOperator& transport() const noexcept { return transport_; }
  std::vector<std::string> notes() const;

 private:
  std::vector<std::vector<ScalarField>> gradients(const State& state) const;

  PeriodicGrid grid_;
  SystemSpec spec_;
  SchemeParams params_;
  TransportOperator transport_;
  std::optional<KernelTable> mollifier_;
  std::optional<EntropyStructure> structure_;
};

/// Convenience single step building the operators on the fly.
std::pair<State, StepReport> imex_step(const State& state, const SystemSpec& spec, const SchemeParams& params);

/// Receives rows and snapshots as a run progresses.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_report(const StepReport&) {}
  virtual void on_snapshot(std::size_t /*step*/, const State&) {}
};

/// Steps to T, reporting every step and snapshotting every snapshot_every steps
/// (plus the initial and final states). Throws ValidationError, NonFinite.
Trajectory run_simulation(const std::vector<ScalarField>& u0, const SystemSpec& spec, const SchemeParams& params,
                          RunObserver* observer = nullptr);

/// Residual series over a trajectory's reports.
ResidualSeries entropy_inequality_residual(const Trajectory& trajectory, bool midpoint = false);

}  // namespace fracross

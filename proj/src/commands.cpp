#include "fracross/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "fracross/check_suite.hpp"
#include "fracross/errors.hpp"
#include "fracross/particles.hpp"
#include "fracross/snapshot.hpp"

namespace fracross {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string step_name(const char* prefix, std::size_t step) {
  std::ostringstream os;
  os << prefix << std::setw(6) << std::setfill('0') << step << ".fxd";
  return os.str();
}

class CsvRunWriter : public RunObserver {
 public:
  CsvRunWriter(const fs::path& dir, int n) : dir_(dir), csv_(open_output(dir / "diagnostics.csv")) {
    csv_ << "step,t";
    for (int i = 1; i <= n; ++i) csv_ << ",mass_" << i;
    for (int i = 1; i <= n; ++i) csv_ << ",min_" << i;
    csv_ << ",entropy,D_frac,D_cross,residual";
    for (int i = 1; i <= n; ++i) csv_ << ",moment_" << i;
    csv_ << ",dt\n";
  }

  void on_report(const StepReport& r) override {
    csv_ << r.step << ',' << num(r.t);
    for (double v : r.mass) csv_ << ',' << num(v);
    for (double v : r.min) {
      csv_ << ',' << num(v);
      min_value_ = std::min(min_value_, v);
    }
    csv_ << ',' << (r.entropy ? num(*r.entropy) : "");
    csv_ << ',' << (r.entropy ? num(r.production.frac) : "");
    csv_ << ',' << (r.entropy ? num(r.production.cross) : "");
    csv_ << ',' << (r.residual ? num(*r.residual) : "");
    for (double v : r.moment) csv_ << ',' << num(v);
    csv_ << ',' << num(r.dt) << '\n';
  }

  void on_snapshot(std::size_t step, const State& state) override {
    write_snapshot(dir_ / step_name("state_", step), Snapshot{state.t, state.u});
    flush();
  }

  void flush() { csv_.flush(); }
  double min_value() const { return min_value_; }

 private:
  fs::path dir_;
  std::ofstream csv_;
  double min_value_ = std::numeric_limits<double>::infinity();
};

void write_manifest(const fs::path& path, const std::string& command, const RunConfig& config,
                    const std::vector<std::string>& notes, const std::vector<std::string>& extra = {}) {
  std::ofstream out = open_output(path);
  out << "# fracross run manifest\n";
  out << "tool = fracross " << version() << "\n";
  out << "command = " << command << "\n\n";
  out << render_config(config) << "\n";
  const SchemeParams& p = config.scheme;
  out << "[selections]\n";
  out << "transport = "
      << (p.eps > 0.0 ? "regularized kernel K^(eps), eps = " + num(p.eps) : std::string("exact Fourier multiplier"))
      << "\n";
  out << "stabilizer = "
      << (p.kappa == 0.0 ? std::string("none (kappa = 0, limit system; rho ignored)")
                         : (p.rho > 0.0 ? "g_rho, rho = " + num(p.rho) : std::string("g_0")))
      << "\n";
  out << "stabilizer_weight = grid-renormalized Gaussian\n";
  out << "time_stepping = first-order IMEX, implicit linear diffusion\n";
  out << "adaptive_dt = " << (p.adaptive_dt ? "on, cfl = " + num(p.cfl) : std::string("off")) << "\n";
  out << "dealias = " << (p.dealias ? "2/3 rule" : "off") << "\n";
  out << "positivity = " << (p.positivity == PositivityPolicy::Clamp ? "clamp with mass restore" : "monitor") << "\n";
  out << "production_stamp = " << (p.production == ProductionStamp::Midpoint ? "trapezoid" : "step start") << "\n";
  out << "pi = ";
  if (config.spec.pi) {
    for (std::size_t i = 0; i < config.spec.pi->size(); ++i) out << (i ? ", " : "") << num((*config.spec.pi)[i]);
    out << (config.pi_from_config ? " (from config)" : " (detailed balance solve)") << "\n";
  } else {
    out << "none (no invariant measure; entropy diagnostics disabled)\n";
  }
  out << "levy_convention = " << to_string(config.particles.convention) << "\n";
  out << "quadrature = periodized weights with lattice correction\n";
  for (const std::string& line : extra) out << line << "\n";
  for (const std::string& note : notes) out << "note = " << note << "\n";
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) s += std::abs(a[x] - b[x]);
  return s * a.grid.cell_volume();
}

}  // namespace

const char* version() { return FRACROSS_VERSION; }

int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NonFinite& e) {
    err << "error: blow-up at step " << e.step() << ": " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const ParseError& e) {
    err << "error: config " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

double l2_distance(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance: species counts differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    require_same_grid(a[i], b[i]);
    for (std::size_t x = 0; x < a[i].size(); ++x) s += (a[i][x] - b[i][x]) * (a[i][x] - b[i][x]);
  }
  return a.empty() ? 0.0 : std::sqrt(s * a.front().grid.cell_volume());
}

SimulationSummary simulate_to_directory(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  ensure_directory(dir);
  const auto u0 = initial_state(config);
  const ImexScheme probe(config.grid(), config.spec, config.scheme);
  write_manifest(dir / "run_manifest.txt", "simulate", config, probe.notes());

  CsvRunWriter writer(dir, config.spec.n);
  SimulationSummary summary;
  Trajectory tr;
  try {
    tr = run_simulation(u0, config.spec, config.scheme, &writer);
  } catch (const NonFinite& e) {
    writer.flush();
    write_snapshot(dir / "state_last_good.fxd", Snapshot{e.last_good().t, e.last_good().u});
    throw;
  }
  writer.flush();
  summary.final_state = tr.snapshots.back();
  summary.steps = tr.reports.back().step;
  summary.min_value = writer.min_value();
  if (std::all_of(tr.reports.begin(), tr.reports.end(), [](const StepReport& r) { return r.entropy.has_value(); }))
    summary.residual = entropy_inequality_residual(tr, config.scheme.production == ProductionStamp::Midpoint);
  log << "simulate: " << summary.steps << " steps to t = " << num(summary.final_state.t) << ", output in "
      << dir.string() << "\n";
  return summary;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  simulate_to_directory(config, config.output_dir, log);
  return kExitSuccess;
}

int cmd_particles(const RunConfig& config, const std::optional<fs::path>& compare_dir, std::ostream& log) {
  if (!config.seed) throw ValidationError("particle runs need a seed ([particles] seed or --seed)");
  const fs::path dir = config.output_dir;
  ensure_directory(dir);
  const SystemSpec& spec = config.spec;
  const ParticleSettings& ps = config.particles;
  const PeriodicGrid grid = config.grid();
  const auto u0 = initial_state(config);

  ParticleEnsemble ensemble;
  ensemble.dim = spec.d;
  ensemble.half_length = config.half_length;
  ensemble.rng.seed(*config.seed);
  std::vector<double> mass;
  for (int i = 0; i < spec.n; ++i) {
    ensemble.positions.push_back(sample_from_density(u0[i], ps.count.at(i), ensemble.rng));
    mass.push_back(u0[i].integral());
  }
  const std::size_t largest = *std::max_element(ps.count.begin(), ps.count.end());
  const double delta = ps.delta ? *ps.delta : default_potential_width(largest, spec.d, ps.delta_scale);
  const PotentialSpec potential = build_potential(spec.d, config.half_length, spec.beta, delta);

  const double T = ps.T ? *ps.T : config.scheme.T;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(T / ps.dt - 1e-9)));
  const double dt = T / static_cast<double>(steps);

  write_manifest(dir / "run_manifest.txt", "particles", config, {},
                 {"particle_delta = " + num(delta), "particle_dt = " + num(dt),
                  "particle_drift = pairwise, minimum image, 1/N_j per species"});

  std::ofstream csv = open_output(dir / "particles.csv");
  csv << "step,t";
  for (int i = 1; i <= spec.n; ++i) csv << ",mass_" << i;
  for (int i = 1; i <= spec.n; ++i) csv << ",mean_" << i;
  for (int i = 1; i <= spec.n; ++i) csv << ",max_density_" << i;
  csv << "\n";

  std::vector<std::pair<std::size_t, Snapshot>> written;
  auto record = [&](std::size_t step) {
    const auto density = empirical_density(ensemble, grid, ps.bandwidth, mass);
    csv << step << ',' << num(ensemble.t);
    for (const auto& f : density) csv << ',' << num(f.integral());
    for (int i = 0; i < spec.n; ++i) {
      double mean = 0.0;
      const std::size_t count = ensemble.count(i);
      for (std::size_t k = 0; k < count; ++k) mean += ensemble.positions[i][k * spec.d];
      csv << ',' << num(mean / static_cast<double>(count));
    }
    for (const auto& f : density) csv << ',' << num(f.max());
    csv << '\n';
    Snapshot snap{ensemble.t, density};
    write_snapshot(dir / step_name("density_", step), snap);
    csv.flush();
    written.emplace_back(step, std::move(snap));
  };

  record(0);
  for (std::size_t step = 1; step <= steps; ++step) {
    em_step(ensemble, spec, potential, dt, ps.convention);
    if (step == steps) ensemble.t = T;
    if (step % static_cast<std::size_t>(ps.snapshot_every) == 0 || step == steps) record(step);
  }
  log << "particles: " << steps << " steps to t = " << num(T) << ", output in " << dir.string() << "\n";

  if (compare_dir) {
    std::vector<Snapshot> pde;
    for (const auto& entry : fs::directory_iterator(*compare_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("state_", 0) == 0 && entry.path().extension() == ".fxd" && name != "state_last_good.fxd")
        pde.push_back(read_snapshot(entry.path()));
    }
    const fs::path out_path = dir / "compare.csv";
    const bool fresh = !fs::exists(out_path);
    std::ofstream cmp = open_output(out_path, std::ios::app);
    if (fresh) {
      cmp << "step,t";
      for (int i = 1; i <= spec.n; ++i) cmp << ",l1_" << i;
      cmp << "\n";
    }
    std::size_t matched = 0;
    for (const auto& [step, snap] : written) {
      const double tol = 1e-9 * std::max(1.0, T);
      auto it = std::find_if(pde.begin(), pde.end(), [&](const Snapshot& s) { return std::abs(s.t - snap.t) <= tol; });
      if (it == pde.end()) continue;
      if (it->fields.size() != snap.fields.size()) throw GridMismatch("PDE run has a different species count");
      cmp << step << ',' << num(snap.t);
      for (std::size_t i = 0; i < snap.fields.size(); ++i)
        cmp << ',' << num(l1_distance(snap.fields[i], smooth_field(it->fields[i], ps.bandwidth)));
      cmp << '\n';
      ++matched;
    }
    log << "particles: compared " << matched << " snapshot time(s) against " << compare_dir->string() << "\n";
    if (matched == 0) log << "warning: no PDE snapshot times matched the particle snapshots\n";
  }
  return kExitSuccess;
}

int cmd_check(const RunConfig& config, std::ostream& out) {
  const auto results = run_check_suite(config, config.seed.value_or(1));
  out << format_check_table(results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  return ok ? kExitSuccess : kExitCheckFailed;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const SweepSettings& sw = config.sweep;
  if (sw.ladder.size() < 2) throw ValidationError("sweep needs a ladder with at least two rungs");
  if (sw.parameter == "rho" && config.scheme.kappa == 0.0)
    throw ValidationError("sweeping rho needs kappa > 0 (rho is ignored in the limit system)");
  ensure_directory(dir);

  std::vector<RunConfig> rungs;
  for (double v : sw.ladder) {
    RunConfig c = config;
    if (sw.parameter == "eps") c.scheme.eps = v;
    else if (sw.parameter == "rho") c.scheme.rho = v;
    else if (sw.parameter == "kappa") c.scheme.kappa = v;
    else if (sw.parameter == "dt") c.scheme.dt = v;
    else throw ValidationError("unknown sweep parameter " + sw.parameter);
    try {
      validate_params(c.scheme);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("sweep rung invalid: ") + e.what());
    }
    rungs.push_back(std::move(c));
  }

  std::vector<std::optional<SimulationSummary>> results(rungs.size());
  std::vector<std::exception_ptr> errors(rungs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < rungs.size(); k = next++) {
      try {
        std::ostringstream local;
        const fs::path sub = dir / (sw.parameter + "_" + std::to_string(k));
        results[k] = simulate_to_directory(rungs[k], sub, local);
        std::lock_guard lock(log_mutex);
        log << local.str();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(sw.jobs, 1, static_cast<int>(rungs.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < rungs.size(); ++k) {
    SweepRow row;
    row.rung = k;
    row.value = sw.ladder[k];
    row.min_value = results[k]->min_value;
    row.steps = results[k]->steps;
    if (k + 1 < rungs.size()) row.diff_next = l2_distance(results[k]->final_state.u, results[k + 1]->final_state.u);
    if (const auto& r = results[k]->residual) {
      row.residual_max = r->max;
      double m = 0.0;
      for (double v : r->per_step) m = std::max(m, std::abs(v));
      row.residual_max_abs = m;
      row.residual_integrated = r->integrated;
    }
    rows.push_back(row);
  }

  std::ofstream csv = open_output(dir / "sweep.csv");
  csv << "rung,parameter,value,diff_next,residual_max,residual_max_abs,residual_integrated,min_value,steps\n";
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const SweepRow& r : rows)
    csv << r.rung << ',' << sw.parameter << ',' << num(r.value) << ',' << opt(r.diff_next) << ','
        << opt(r.residual_max) << ',' << opt(r.residual_max_abs) << ',' << opt(r.residual_integrated) << ','
        << num(r.min_value) << ',' << r.steps << '\n';
  return rows;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  const auto rows = run_sweep(config, config.output_dir, log);
  log << "sweep over " << config.sweep.parameter << ": " << rows.size() << " rungs, sweep.csv in "
      << config.output_dir.string() << "\n";
  return kExitSuccess;
}

}  // namespace fracross

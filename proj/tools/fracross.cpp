#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracross/commands.hpp"
#include "fracross/config.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> seed;
  std::optional<int> jobs;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "configuration file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory (overrides [output] dir)");
  sub->add_option("--seed", c.seed, "64-bit seed (required for particle runs)");
  sub->add_option("--jobs", c.jobs, "concurrent sweep runs")->check(CLI::PositiveNumber);
  sub->add_option("overrides", c.overrides, "section.key=value overrides");
}

std::vector<std::string> overrides_of(const Common& c) {
  std::vector<std::string> o = c.overrides;
  if (c.out) o.push_back("output.dir=" + *c.out);
  if (c.seed) o.push_back("particles.seed=" + *c.seed);
  if (c.jobs) o.push_back("sweep.jobs=" + std::to_string(*c.jobs));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional cross-diffusion simulator and checker"};
  app.set_version_flag("--version", std::string("fracross ") + fracross::version());
  app.require_subcommand(1);

  Common simulate_opts, particles_opts, check_opts, sweep_opts;
  auto* simulate = app.add_subcommand("simulate", "run the PDE and write diagnostics and snapshots");
  add_common(simulate, simulate_opts);

  auto* particles = app.add_subcommand("particles", "run the interacting particle system");
  add_common(particles, particles_opts);
  std::optional<std::string> compare;
  particles->add_option("--compare", compare, "PDE run directory to compare densities against")
      ->check(CLI::ExistingDirectory);

  auto* check = app.add_subcommand("check", "run the invariant suite and print a pass/fail table");
  add_common(check, check_opts);

  auto* sweep = app.add_subcommand("sweep", "repeat a simulation along a parameter ladder");
  add_common(sweep, sweep_opts);
  std::optional<std::string> param, ladder;
  sweep->add_option("--param", param, "eps, rho, kappa or dt")->check(CLI::IsMember({"eps", "rho", "kappa", "dt"}));
  sweep->add_option("--ladder", ladder, "comma-separated ladder values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fracross::kExitValidation;
  }

  return fracross::run_guarded(std::cerr, [&]() -> int {
    if (*simulate) {
      const auto cfg = fracross::load_config(simulate_opts.config, overrides_of(simulate_opts));
      return fracross::cmd_simulate(cfg, std::cout);
    }
    if (*particles) {
      const auto cfg = fracross::load_config(particles_opts.config, overrides_of(particles_opts));
      std::optional<std::filesystem::path> dir;
      if (compare) dir = *compare;
      return fracross::cmd_particles(cfg, dir, std::cout);
    }
    if (*check) {
      const auto cfg = fracross::load_config(check_opts.config, overrides_of(check_opts));
      return fracross::cmd_check(cfg, std::cout);
    }
    auto o = overrides_of(sweep_opts);
    if (param) o.push_back("sweep.parameter=" + *param);
    if (ladder) o.push_back("sweep.ladder=" + *ladder);
    const auto cfg = fracross::load_config(sweep_opts.config, o);
    return fracross::cmd_sweep(cfg, std::cout);
  });
}

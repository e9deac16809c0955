#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "renewal/config.hpp"
#include "renewal/errors.hpp"
#include "renewal/pipeline.hpp"

namespace {

enum Exit : int { kOk = 0, kCheckFailure = 1, kConfigError = 2, kNumericError = 3 };

}  // namespace

int main(int argc, char** argv) {
  using namespace renewal;
  CLI::App app{"Renewal processes in a periodic environment"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "INI file with [kernel], [phase], [volterra], [sim], [pdmp], [output]");
  // Every config key is also a flag; flags override the file.
  std::map<std::string, std::string> overrides;
  for (const ConfigKey& key : config_keys()) {
    app.add_option("--" + key.name, overrides[key.name], key.help);
  }

  auto* rho = app.add_subcommand("rho", "stationary phase law and rate function");
  auto* limits = app.add_subcommand("limits", "limit laws of the recurrence times");
  std::vector<double> phases;
  limits->add_option("--phi", phases, "phases (default 0, T/4, T/2, 3T/4)");
  auto* converge = app.add_subcommand("converge", "distances of the exact laws to the limit laws");
  double start = 0.0;
  std::vector<double> times;
  auto* start_opt = converge->add_option("--s", start, "start time (default sim.start)");
  converge->add_option("--t", times, "evaluation times (default s + kT, k = 1..10)");
  auto* simulate = app.add_subcommand("simulate", "event paths and recurrence times");
  auto* pdmp = app.add_subcommand("pdmp", "PDMP trajectories and occupation measures");
  auto* check = app.add_subcommand("check", "invariant suite, exit 1 on failure");
  bool corrupt = false;
  check->add_flag("--corrupt-rho", corrupt, "perturb rho by 1% before checking");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const ConfigKey& key : config_keys()) {
      if (app.count("--" + key.name) > 0) set_config_value(cfg, key.name, overrides[key.name]);
    }
    validate(cfg);

    if (rho->parsed()) {
      const RhoResult r = run_rho(cfg);
      std::printf("beta %.9g spread %.3g iterations %d\n", r.chain.delta.beta, r.chain.rate.spread,
                  r.chain.stationary.iterations);
    } else if (limits->parsed()) {
      if (phases.empty()) {
        for (int i = 0; i < 4; ++i) phases.push_back(i * cfg.kernel.period / 4.0);
      }
      const LimitsResult r = run_limits(cfg, phases);
      for (std::size_t i = 0; i < r.phases.size(); ++i) {
        std::printf("phi %.6g nu_mass %.12f mu_mass %.12f\n", r.phases[i], r.nu_mass[i], r.mu_mass[i]);
      }
    } else if (converge->parsed()) {
      if (start_opt->count() == 0) start = cfg.sim.start;
      if (times.empty()) {
        RunConfig shifted = cfg;
        shifted.sim.start = start;
        times = default_times(shifted);
      }
      const ConvergeResult r = run_converge(cfg, start, times);
      for (const ConvergeRow& row : r.rows) {
        std::printf("t %-8.4g backward %.6e bound %.6e forward %.6e\n", row.t, row.backward, row.bound,
                    row.forward);
      }
      std::printf("backward within bound %d, forward slope %.4f r2 %.5f\n", r.backward_within,
                  r.forward_fit.slope, r.forward_fit.r_squared);
    } else if (simulate->parsed()) {
      const SimulationResult r = run_simulate(cfg);
      std::printf("replicas %zu, recurrence times %zu\n", r.paths.size(), r.times.size());
    } else if (pdmp->parsed()) {
      const PdmpResult r = run_pdmp(cfg);
      std::printf("occupation tv forward %.4g backward %.4g\n", r.tv_forward, r.tv_backward);
    } else if (check->parsed()) {
      const CheckReport r = run_check(cfg, {corrupt});
      for (const CheckItem& c : r.items) {
        std::printf("%s %s value=%.4g tol=%.4g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.tolerance);
      }
      return r.all_pass() ? kOk : kCheckFailure;
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    return kNumericError;
  } catch (const InconsistencyError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kNumericError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kCheckFailure;
  }
}

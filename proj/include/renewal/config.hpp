#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "renewal/kernel.hpp"

namespace renewal {

struct KernelConfig {
  std::string family = "constant";  // constant | time_modulated | age_time | age_only | burst
  double period = 1.0;
  double lambda0 = 1.0;
  double a = 1.0;
  double b = 0.5;
  double c = 1.0;
  double d = 1.0;
};

struct PhaseConfig {
  Eigen::Index m = 256;
  double tail_tol = 1e-12;
  double tol = 1e-12;
  int max_iter = 100000;
};

struct VolterraConfig {
  double h = 0.005;
  double t_end = 10.0;
  double u_max = 0.0;  // 0 selects limit_u_max(kernel)
  double h_u = 0.01;
  int richardson = 1;
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t replicas = 1000;
  double start = 0.0;
  double horizon = 10.0;
};

struct PdmpConfig {
  double horizon = 50000.0;
  double burn_in = 20.0;
  double u_max = 8.0;
  Eigen::Index u_bins = 16;
  Eigen::Index phase_bins = 8;
};

struct RunConfig {
  KernelConfig kernel;
  PhaseConfig phase;
  VolterraConfig volterra;
  SimConfig sim;
  PdmpConfig pdmp;
  std::string output_dir = "out";
};

/// One settable key "section.name" of a RunConfig.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> assign;
};

const std::vector<ConfigKey>& config_keys();

/// Parses `value` into the key; unknown keys and unparsable values raise ConfigError
/// naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads an INI file of [section] key = value lines on top of `base`.
RunConfig load_config(const std::string& path, RunConfig base = {});
RunConfig parse_config(const std::string& text, RunConfig base = {});

/// Range checks on every field; throws ConfigError.
void validate(const RunConfig& cfg);

KernelHandle build_kernel(const KernelConfig& cfg);

/// Truncation that keeps the tail mass of the limit laws below 1e-8.
double limit_u_max(const KernelHandle& k);

double effective_u_max(const RunConfig& cfg, const KernelHandle& k);

}  // namespace renewal

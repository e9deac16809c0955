#include "renewal/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "renewal/errors.hpp"

namespace renewal {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

template <class T, class Field>
ConfigKey numeric(std::string name, std::string help, Field field) {
  return {name, std::move(help), [name, field](RunConfig& cfg, const std::string& v) {
            cfg.*(field.first).*(field.second) = parse_number<T>(name, v);
          }};
}

template <class Section, class T>
std::pair<Section RunConfig::*, T Section::*> at(Section RunConfig::*s, T Section::*f) {
  return {s, f};
}

std::vector<ConfigKey> make_keys() {
  std::vector<ConfigKey> keys;
  keys.push_back({"kernel.family", "constant | time_modulated | age_time | age_only | burst",
                  [](RunConfig& cfg, const std::string& v) { cfg.kernel.family = v; }});
  keys.push_back(numeric<double>("kernel.T", "period", at(&RunConfig::kernel, &KernelConfig::period)));
  keys.push_back(numeric<double>("kernel.lambda0", "rate of the constant kernel",
                                 at(&RunConfig::kernel, &KernelConfig::lambda0)));
  keys.push_back(numeric<double>("kernel.a", "baseline rate", at(&RunConfig::kernel, &KernelConfig::a)));
  keys.push_back(numeric<double>("kernel.b", "modulation amplitude", at(&RunConfig::kernel, &KernelConfig::b)));
  keys.push_back(numeric<double>("kernel.c", "burst amplitude", at(&RunConfig::kernel, &KernelConfig::c)));
  keys.push_back(numeric<double>("kernel.d", "age decay rate", at(&RunConfig::kernel, &KernelConfig::d)));
  keys.push_back(numeric<Eigen::Index>("phase.m", "circle grid size", at(&RunConfig::phase, &PhaseConfig::m)));
  keys.push_back(numeric<double>("phase.tail_tol", "folding tail tolerance",
                                 at(&RunConfig::phase, &PhaseConfig::tail_tol)));
  keys.push_back(numeric<double>("phase.tol", "power iteration tolerance", at(&RunConfig::phase, &PhaseConfig::tol)));
  keys.push_back(numeric<int>("phase.max_iter", "power iteration cap", at(&RunConfig::phase, &PhaseConfig::max_iter)));
  keys.push_back(numeric<double>("volterra.h", "time step", at(&RunConfig::volterra, &VolterraConfig::h)));
  keys.push_back(numeric<double>("volterra.t_end", "horizon of the solve, relative to sim.start",
                                 at(&RunConfig::volterra, &VolterraConfig::t_end)));
  keys.push_back(numeric<double>("volterra.u_max", "law truncation, 0 = automatic",
                                 at(&RunConfig::volterra, &VolterraConfig::u_max)));
  keys.push_back(numeric<double>("volterra.h_u", "law grid step", at(&RunConfig::volterra, &VolterraConfig::h_u)));
  keys.push_back(numeric<int>("volterra.richardson", "step halving levels",
                              at(&RunConfig::volterra, &VolterraConfig::richardson)));
  keys.push_back(numeric<std::uint64_t>("sim.seed", "base seed", at(&RunConfig::sim, &SimConfig::seed)));
  keys.push_back(numeric<std::size_t>("sim.replicas", "independent paths", at(&RunConfig::sim, &SimConfig::replicas)));
  keys.push_back(numeric<double>("sim.start", "start time s", at(&RunConfig::sim, &SimConfig::start)));
  keys.push_back(numeric<double>("sim.horizon", "simulation horizon", at(&RunConfig::sim, &SimConfig::horizon)));
  keys.push_back(numeric<double>("pdmp.horizon", "trajectory length", at(&RunConfig::pdmp, &PdmpConfig::horizon)));
  keys.push_back(numeric<double>("pdmp.burn_in", "discarded prefix", at(&RunConfig::pdmp, &PdmpConfig::burn_in)));
  keys.push_back(numeric<double>("pdmp.u_max", "occupation grid extent", at(&RunConfig::pdmp, &PdmpConfig::u_max)));
  keys.push_back(numeric<Eigen::Index>("pdmp.u_bins", "occupation bins in u",
                                       at(&RunConfig::pdmp, &PdmpConfig::u_bins)));
  keys.push_back(numeric<Eigen::Index>("pdmp.phase_bins", "occupation bins in phase",
                                       at(&RunConfig::pdmp, &PdmpConfig::phase_bins)));
  keys.push_back({"output.dir", "output directory",
                  [](RunConfig& cfg, const std::string& v) { cfg.output_dir = v; }});
  return keys;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const ConfigKey& k : config_keys()) {
    if (k.name == key) {
      k.assign(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    // Section open/close markers.
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    if (item.inputs.size() != 1) throw ConfigError("config key '" + key + "' needs exactly one value");
    set_config_value(base, key, item.inputs.front());
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

void validate(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  build_kernel(cfg.kernel);
  require(cfg.phase.m >= 8 && cfg.phase.m <= 8192, "phase.m must lie in [8, 8192]");
  require(cfg.phase.tail_tol > 0.0 && cfg.phase.tail_tol < 1.0, "phase.tail_tol must lie in (0, 1)");
  require(cfg.phase.tol > 0.0 && cfg.phase.tol < 1.0, "phase.tol must lie in (0, 1)");
  require(cfg.phase.max_iter > 0, "phase.max_iter must be positive");
  require(cfg.volterra.h > 0.0 && cfg.volterra.h <= cfg.kernel.period / 50.0,
          "volterra.h must lie in (0, T/50]");
  require(cfg.volterra.t_end > 0.0, "volterra.t_end must be positive");
  require(cfg.volterra.u_max >= 0.0, "volterra.u_max must be >= 0");
  require(cfg.volterra.h_u > 0.0, "volterra.h_u must be positive");
  require(cfg.volterra.richardson >= 0 && cfg.volterra.richardson <= 3,
          "volterra.richardson must lie in [0, 3]");
  require(cfg.sim.replicas >= 1, "sim.replicas must be >= 1");
  require(std::isfinite(cfg.sim.start), "sim.start must be finite");
  require(cfg.sim.horizon > cfg.sim.start, "sim.horizon must exceed sim.start");
  require(cfg.pdmp.horizon > cfg.pdmp.burn_in && cfg.pdmp.burn_in >= 0.0,
          "pdmp.horizon must exceed pdmp.burn_in >= 0");
  require(cfg.pdmp.u_max > 0.0, "pdmp.u_max must be positive");
  require(cfg.pdmp.u_bins >= 1 && cfg.pdmp.phase_bins >= 1, "pdmp bins must be >= 1");
  require(!cfg.output_dir.empty(), "output.dir must not be empty");
}

KernelHandle build_kernel(const KernelConfig& cfg) {
  const std::string& f = cfg.family;
  if (f == "constant") return make_constant(cfg.lambda0, cfg.period);
  if (f == "time_modulated") return make_time_modulated(cfg.a, cfg.b, cfg.period);
  if (f == "age_time") return make_age_time(cfg.a, cfg.b, cfg.period, cfg.d);
  if (f == "age_only") return make_age_only(cfg.a, cfg.b, cfg.d, cfg.period);
  if (f == "burst") return make_burst(cfg.a, cfg.b, cfg.c, cfg.d, cfg.period);
  throw ConfigError("kernel.family: unknown family '" + f + "'");
}

double limit_u_max(const KernelHandle& k) {
  // Both limit densities are bounded by λ_max e^{-λ_min u}.
  return std::log(1e8 * k.lambda_max / k.lambda_min) / k.lambda_min;
}

double effective_u_max(const RunConfig& cfg, const KernelHandle& k) {
  return cfg.volterra.u_max > 0.0 ? cfg.volterra.u_max : limit_u_max(k);
}

}  // namespace renewal

#include "renewal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "renewal/errors.hpp"
#include "renewal/parallel.hpp"
#include "renewal/svg.hpp"
#include "renewal/volterra.hpp"

namespace renewal {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::filesystem::path output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output.dir '" + cfg.output_dir + "': " + ec.message());
  return dir;
}

void plot(const std::filesystem::path& path, const PlotSpec& spec) {
  if (!write_svg_plot(path.string(), spec)) {
    std::fprintf(stderr, "warning: plot %s not written\n", path.string().c_str());
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Standard error of the sample mean.
std::pair<double, double> mean_and_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= std::max(1.0, n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

void perturb_rho(PhaseField& rho, double amplitude) {
  const double omega = 2.0 * std::numbers::pi / rho.grid.period;
  for (Eigen::Index i = 0; i < rho.values.size(); ++i) {
    rho.values[i] *= 1.0 + amplitude * std::sin(omega * rho.grid.node(i) + 0.3);
  }
}

PhaseChainSolution run_phase_chain(const RunConfig& cfg, const KernelHandle& k) {
  return solve_phase_chain(k, cfg.phase.m, cfg.phase.tail_tol, cfg.phase.tol, cfg.phase.max_iter);
}

RhoResult run_rho(const RunConfig& cfg) {
  validate(cfg);
  const KernelHandle k = build_kernel(cfg.kernel);
  RhoResult out{run_phase_chain(cfg, k), harris_constants(k.lambda_min, k.lambda_max, k.period)};
  const auto dir = output_dir(cfg);
  const PhaseField& pi = out.chain.stationary.pi;
  const PhaseField& rho = out.chain.rate.rho;
  {
    Csv csv(dir / "phase.csv", {"t", "pi", "rho"});
    for (Eigen::Index i = 0; i < rho.values.size(); ++i) {
      csv.row({num(rho.grid.node(i)), num(pi.values[i]), num(rho.values[i])});
    }
  }
  std::ofstream c(dir / "constants.txt");
  const HarrisConstants& h = out.harris;
  c << "kernel " << k.name << "\nperiod " << num(k.period) << "\nlambda_min " << num(k.lambda_min)
    << "\nlambda_max " << num(k.lambda_max) << "\nbeta_mean_delta " << num(out.chain.delta.beta)
    << "\nbeta_tail_bound " << num(out.chain.delta.tail_bound) << "\nnormalization_c "
    << num(out.chain.rate.c) << "\nnormalization_spread " << num(out.chain.rate.spread)
    << "\npower_iterations " << out.chain.stationary.iterations << "\npower_residual "
    << num(out.chain.stationary.residual) << "\nfolded_periods " << out.chain.folded.periods
    << "\ndoeblin_beta " << num(h.beta) << "\nrate_c " << num(h.c) << "\nconstant_C " << num(h.C)
    << "\nlyapunov_gamma " << num(h.gamma) << "\nlyapunov_kappa " << num(h.kappa)
    << "\nminorization_alpha " << num(h.alpha) << "\nharris_doeblin_beta " << num(h.doeblin_beta)
    << "\nlarge_period " << (h.large_period ? 1 : 0) << "\nperiod_multiple " << h.period_multiple
    << '\n';
  plot(dir / "phase.svg", {"stationary phase", "t", "", false,
                           {{"pi", to_std(rho.grid.nodes()), to_std(pi.values)},
                            {"rho", to_std(rho.grid.nodes()), to_std(rho.values)}}});
  return out;
}

LimitsResult run_limits(const RunConfig& cfg, const std::vector<double>& phases) {
  validate(cfg);
  if (phases.empty()) throw ConfigError("limits needs at least one phase");
  const KernelHandle k = build_kernel(cfg.kernel);
  const PhaseChainSolution chain = run_phase_chain(cfg, k);
  const PhaseField& rho = chain.rate.rho;
  const double u_max = effective_u_max(cfg, k);
  const auto dir = output_dir(cfg);
  LimitsResult out;
  Csv csv(dir / "limits.csv", {"phi", "u", "nu", "mu"});
  Csv mass(dir / "limits_mass.csv", {"phi", "nu_mass", "mu_mass"});
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const double phi = phases[p];
    const LimitLaw nu = nu_infty(rho, k, phi, u_max, cfg.volterra.h_u);
    const LimitLaw mu = mu_infty(rho, k, phi, u_max, cfg.volterra.h_u);
    std::vector<double> us(static_cast<std::size_t>(nu.density.size()));
    for (Eigen::Index i = 0; i < nu.density.size(); ++i) {
      us[static_cast<std::size_t>(i)] = nu.step * static_cast<double>(i);
      csv.row({num(phi), num(us[static_cast<std::size_t>(i)]), num(nu.density[i]), num(mu.density[i])});
    }
    out.phases.push_back(phi);
    out.nu_mass.push_back(nu.mass());
    out.mu_mass.push_back(mu.mass());
    mass.row({num(phi), num(nu.mass()), num(mu.mass())});
    plot(dir / ("limits_" + std::to_string(p) + ".svg"),
         {"limit laws at phi = " + num(phi), "u", "density", false,
          {{"nu", us, to_std(nu.density)}, {"mu", us, to_std(mu.density)}}});
  }
  return out;
}

std::vector<double> default_times(const RunConfig& cfg) {
  std::vector<double> times;
  for (int j = 1; j <= 10; ++j) times.push_back(cfg.sim.start + j * cfg.kernel.period);
  return times;
}

ConvergeResult run_converge(const RunConfig& cfg, double s, const std::vector<double>& times) {
  validate(cfg);
  if (times.empty()) throw ConfigError("converge needs at least one time");
  const KernelHandle k = build_kernel(cfg.kernel);
  const PhaseChainSolution chain = run_phase_chain(cfg, k);
  const double h = cfg.volterra.h;
  double t_last = s;
  for (double t : times) {
    if (!(t > s)) throw ConfigError("converge times must exceed s");
    const double steps = (t - s) / h;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
      throw ConfigError("converge time " + num(t) + " is not on the volterra.h grid");
    }
    t_last = std::max(t_last, t);
  }
  // One extra period for the expected-count window [t, t + T].
  const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), s, t_last + k.period, h,
                                            chain.rate.rho, cfg.volterra.richardson);
  ConvergeResult out;
  out.start = s;
  out.harris = harris_constants(k.lambda_min, k.lambda_max, k.period);
  const HarrisConstants& hc = out.harris;
  const double u_max = effective_u_max(cfg, k);
  out.rows.resize(times.size());
  parallel_for(times.size(), [&](std::size_t i) {
    ConvergeRow& row = out.rows[i];
    row.t = times[i];
    row.backward = backward_distance(sol, row.t);
    row.bound = hc.C * std::exp(-hc.c * (row.t - s));
    const ForwardDistance fd = forward_distance(sol, row.t, u_max, cfg.volterra.h_u);
    row.forward = fd.tv;
    row.forward_weighted = fd.weighted;
    row.rate_gap = std::abs(sol.deviation[sol.index_of(row.t)]);
    row.count_gap = std::abs(expected_count_gap(sol, row.t, row.t + k.period));
  });
  out.backward_within = out.rate_within = out.count_within = true;
  std::vector<double> ts;
  std::vector<double> back;
  std::vector<double> fwd;
  std::vector<double> bound;
  for (const ConvergeRow& row : out.rows) {
    const double decay = std::exp(-hc.c * (row.t - s));
    out.backward_within = out.backward_within && row.backward <= row.bound;
    out.rate_within = out.rate_within && row.rate_gap <= hc.C * k.lambda_max * decay;
    out.count_within = out.count_within && row.count_gap <= hc.C * k.lambda_max / hc.c * decay;
    ts.push_back(row.t);
    back.push_back(row.backward);
    fwd.push_back(row.forward);
    bound.push_back(row.bound);
  }
  auto try_fit = [](const std::vector<double>& t, const std::vector<double>& d) {
    try {
      return decay_fit(t, d);
    } catch (const DomainError&) {
      return DecayFit{};
    }
  };
  out.backward_fit = try_fit(ts, back);
  out.forward_fit = try_fit(ts, fwd);

  const auto dir = output_dir(cfg);
  {
    Csv csv(dir / "converge.csv", {"t", "distance", "bound_value", "within_bound"});
    for (const ConvergeRow& row : out.rows) {
      csv.row({num(row.t), num(row.backward), num(row.bound), row.backward <= row.bound ? "1" : "0"});
    }
    Csv fcsv(dir / "converge_forward.csv", {"t", "distance", "weighted_distance"});
    for (const ConvergeRow& row : out.rows) {
      fcsv.row({num(row.t), num(row.forward), num(row.forward_weighted)});
    }
  }
  std::ofstream sum(dir / "converge_summary.txt");
  sum << "start " << num(s) << "\nbeta " << num(hc.beta) << "\nc " << num(hc.c) << "\nC " << num(hc.C)
      << "\nbackward_within_bound " << out.backward_within << "\nrate_within_bound " << out.rate_within
      << "\ncount_within_bound " << out.count_within << "\nbackward_slope " << num(out.backward_fit.slope)
      << "\nbackward_r2 " << num(out.backward_fit.r_squared) << "\nforward_slope "
      << num(out.forward_fit.slope) << "\nforward_r2 " << num(out.forward_fit.r_squared)
      << "\nvolterra_residual " << num(volterra_residual(sol)) << '\n';
  plot(dir / "converge.svg", {"distance to the limit law", "t", "distance", true,
                              {{"backward", ts, back}, {"forward", ts, fwd}, {"bound", ts, bound}}});
  return out;
}

SimulationResult simulate_replicas(const KernelHandle& k, const SimConfig& sim) {
  SimulationResult out;
  out.paths.resize(sim.replicas);
  parallel_for(sim.replicas, [&](std::size_t i) {
    RngStream rng(sim.seed, i);
    out.paths[i] = simulate_path(k, sim.start, sim.horizon, rng);
  });
  for (int j = 1;; ++j) {
    const double t = sim.start + j * k.period;
    if (t > sim.horizon + 1e-12) break;
    out.times.push_back(t);
  }
  if (out.times.empty()) out.times.push_back(sim.horizon);
  return out;
}

SimulationResult run_simulate(const RunConfig& cfg) {
  validate(cfg);
  const KernelHandle k = build_kernel(cfg.kernel);
  SimulationResult out = simulate_replicas(k, cfg.sim);
  const auto dir = output_dir(cfg);
  Csv paths(dir / "paths.csv", {"replica", "k", "T_k"});
  Csv rec(dir / "recurrence.csv", {"replica", "t", "N", "X", "Y"});
  for (std::size_t i = 0; i < out.paths.size(); ++i) {
    const EventPath& p = out.paths[i];
    paths.row({std::to_string(i), "0", num(p.start)});
    for (std::size_t j = 0; j < p.arrivals.size(); ++j) {
      paths.row({std::to_string(i), std::to_string(j + 1), num(p.arrivals[j])});
    }
    for (double t : out.times) {
      const Recurrence r = recurrence_at(p, t);
      rec.row({std::to_string(i), num(t), std::to_string(r.count), num(r.forward), num(r.backward)});
    }
  }
  return out;
}

double occupation_tv(const OccupationHistogram& occ, const Eigen::MatrixXd& exact) {
  if (occ.mass.rows() != exact.rows() || occ.mass.cols() != exact.cols()) {
    throw DomainError("occupation_tv: grid mismatch");
  }
  return (occ.mass - exact).cwiseAbs().sum() + std::abs(occ.discarded - (1.0 - exact.sum()));
}

PdmpResult run_pdmp(const RunConfig& cfg) {
  validate(cfg);
  const KernelHandle k = build_kernel(cfg.kernel);
  const PhaseChainSolution chain = run_phase_chain(cfg, k);
  const PdmpConfig& p = cfg.pdmp;
  const double s = cfg.sim.start;
  RngStream fwd_rng(cfg.sim.seed, 0);
  const double first = sample_next_arrival(k, s, fwd_rng);
  const PdmpTrajectory fwd = simulate_forward_pdmp(k, {first - s, first}, s + p.horizon, fwd_rng, s);
  RngStream back_rng(cfg.sim.seed, 1);
  const PdmpTrajectory back = simulate_backward_pdmp(k, {0.0, s}, s + p.horizon, back_rng, s);
  const OccupationHistogram occ_f = occupation_histogram(fwd, p.u_max, p.u_bins, p.phase_bins, p.burn_in);
  const OccupationHistogram occ_b = occupation_histogram(back, p.u_max, p.u_bins, p.phase_bins, p.burn_in);
  const Eigen::MatrixXd exact_f =
      joint_cell_masses(LimitKind::forward, chain.rate.rho, k, p.u_max, p.u_bins, p.phase_bins);
  const Eigen::MatrixXd exact_b =
      joint_cell_masses(LimitKind::backward, chain.rate.rho, k, p.u_max, p.u_bins, p.phase_bins);
  PdmpResult out{occupation_tv(occ_f, exact_f), occupation_tv(occ_b, exact_b)};

  const auto dir = output_dir(cfg);
  for (const auto& [name, traj] : {std::pair{"pdmp_forward.csv", &fwd}, std::pair{"pdmp_backward.csv", &back}}) {
    Csv csv(dir / name, {"time", "value", "phase"});
    for (const PdmpSample& smp : traj->samples) csv.row({num(smp.time), num(smp.value), num(smp.phase)});
  }
  Csv csv(dir / "occupation.csv", {"kind", "u_bin", "phase_bin", "empirical", "exact"});
  for (const auto& [name, occ, exact] :
       {std::tuple{"forward", &occ_f, &exact_f}, std::tuple{"backward", &occ_b, &exact_b}}) {
    for (Eigen::Index i = 0; i < exact->rows(); ++i) {
      for (Eigen::Index j = 0; j < exact->cols(); ++j) {
        csv.row({name, std::to_string(i), std::to_string(j), num(occ->mass(i, j)), num((*exact)(i, j))});
      }
    }
  }
  std::ofstream sum(dir / "pdmp_summary.txt");
  sum << "forward_jumps " << fwd.jump_times.size() << "\nbackward_jumps " << back.jump_times.size()
      << "\ntv_forward " << num(out.tv_forward) << "\ntv_backward " << num(out.tv_backward) << '\n';
  std::vector<double> us;
  for (Eigen::Index i = 0; i < p.u_bins; ++i) us.push_back((i + 0.5) * p.u_max / p.u_bins);
  plot(dir / "occupation.svg",
       {"occupation u-marginals", "u", "mass per bin", false,
        {{"forward empirical", us, to_std(occ_f.u_marginal())},
         {"forward exact", us, to_std(Eigen::VectorXd(exact_f.rowwise().sum()))},
         {"backward empirical", us, to_std(occ_b.u_marginal())},
         {"backward exact", us, to_std(Eigen::VectorXd(exact_b.rowwise().sum()))}}});
  return out;
}

bool CheckReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

CheckReport run_check(const RunConfig& cfg, const CheckOptions& options) {
  validate(cfg);
  const KernelHandle k = build_kernel(cfg.kernel);
  CheckReport report;
  auto add = [&](std::string name, double value, double tol, bool pass) {
    report.items.push_back({std::move(name), value, tol, pass});
  };
  auto at_most = [&](std::string name, double value, double tol) {
    add(std::move(name), value, tol, value <= tol);
  };

  const KernelReport kr = verify_kernel(k, 10000, 1e-9, cfg.sim.seed);
  at_most("kernel_violations", static_cast<double>(kr.violations.size()), 0.0);

  PhaseChainSolution chain = run_phase_chain(cfg, k);
  PhaseField rho = chain.rate.rho;
  if (options.corrupt_rho) perturb_rho(rho);
  const RhoResidual rr = residual_rho(rho, k, cfg.phase.tail_tol);
  at_most("rho_equation", rr.equation, 1e-6);
  at_most("rho_normalization", rr.normalization, 1e-6);
  const double margin = std::min(rho.values.minCoeff() - k.lambda_min, k.lambda_max - rho.values.maxCoeff());
  add("rho_within_rate_bounds", margin, -1e-9, margin >= -1e-9);
  at_most("normalization_spread", chain.rate.spread, 1e-6);

  const double u_max = effective_u_max(cfg, k);
  const double T = k.period;
  double identities = 0.0;
  double invariance = 0.0;
  double mass_defect = 0.0;
  double periodicity = 0.0;
  for (double phi : {0.0, T / 3.0}) {
    identities = std::max(identities, identity_checks(rho, k, phi).max());
    const LimitLaw nu = nu_infty(rho, k, phi, u_max, cfg.volterra.h_u);
    const LimitLaw mu = mu_infty(rho, k, phi, u_max, cfg.volterra.h_u);
    invariance = std::max(invariance, invariance_residual_forward(mu, k));
    mass_defect = std::max({mass_defect, std::abs(nu.mass() - 1.0), std::abs(mu.mass() - 1.0)});
    const LimitLaw nu_shift = nu_infty(rho, k, phi + T, u_max, cfg.volterra.h_u);
    const LimitLaw mu_shift = mu_infty(rho, k, phi + T, u_max, cfg.volterra.h_u);
    periodicity = std::max({periodicity, (nu.density - nu_shift.density).cwiseAbs().maxCoeff(),
                            (mu.density - mu_shift.density).cwiseAbs().maxCoeff()});
  }
  at_most("identity_residual", identities, 1e-4);
  at_most("invariance_residual", invariance, 1e-4);
  at_most("limit_mass_defect", mass_defect, 1e-6);
  at_most("limit_periodicity", periodicity, 1e-8);
  const LyapunovCheck ly = lyapunov_check(k, 0.0, 10.0 * T);
  add("lyapunov_margin", ly.worst_margin, 0.0, ly.holds);

  // Monte-Carlo cross-checks against an independent plain Volterra solve.
  const SimConfig& sim = cfg.sim;
  const double span = std::min(sim.horizon - sim.start, cfg.volterra.t_end);
  const double steps = std::floor(span / cfg.volterra.h + 1e-9);
  const double t = sim.start + steps * cfg.volterra.h;
  const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), sim.start, t, cfg.volterra.h,
                                            cfg.volterra.richardson);
  SimConfig mc = sim;
  mc.horizon = t;
  const SimulationResult paths = simulate_replicas(k, mc);
  std::vector<double> counts;
  std::vector<double> rates;
  for (const EventPath& p : paths.paths) {
    const Recurrence r = recurrence_at(p, t);
    counts.push_back(static_cast<double>(r.count));
    rates.push_back(hazard(k, t, t - r.backward));
  }
  const auto [count_mean, count_err] = mean_and_error(counts);
  const double count_z = std::abs(count_mean - expected_count(sol, sim.start, t)) / count_err;
  at_most("mc_expected_count_sigmas", count_z, 4.0);
  const auto [rate_mean, rate_err] = mean_and_error(rates);
  // A constant kernel has zero variance; fall back to an absolute tolerance.
  const double rate_z = std::abs(rate_mean - sol.r[sol.nodes() - 1]) / std::max(rate_err, 1e-9);
  at_most("mc_rate_sigmas", rate_z, 4.0);

  const auto dir = output_dir(cfg);
  std::ofstream out(dir / "check.txt");
  for (const CheckItem& c : report.items) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << num(c.value) << " tol=" << num(c.tolerance)
        << '\n';
  }
  return report;
}

}  // namespace renewal

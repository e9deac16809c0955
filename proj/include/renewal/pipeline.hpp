#pragma once

#include <string>
#include <vector>

#include "renewal/asymptotics.hpp"
#include "renewal/config.hpp"
#include "renewal/metrics.hpp"
#include "renewal/phasechain.hpp"
#include "renewal/simulate.hpp"

namespace renewal {

/// Multiplies ρ by 1 + amplitude sin(2π t / T + 0.3). A non-constant factor is
/// needed because every check is linear in ρ.
void perturb_rho(PhaseField& rho, double amplitude = 0.01);

PhaseChainSolution run_phase_chain(const RunConfig& cfg, const KernelHandle& k);

struct RhoResult {
  PhaseChainSolution chain;
  HarrisConstants harris;
};

/// phase.csv (t, pi, rho) and constants.txt.
RhoResult run_rho(const RunConfig& cfg);

struct LimitsResult {
  std::vector<double> phases;
  std::vector<double> nu_mass;
  std::vector<double> mu_mass;
};

/// limits.csv (phi, u, nu, mu), limits_mass.csv (phi, nu_mass, mu_mass), limits_<i>.svg.
LimitsResult run_limits(const RunConfig& cfg, const std::vector<double>& phases);

struct ConvergeRow {
  double t = 0.0;
  double backward = 0.0;
  double bound = 0.0;
  double forward = 0.0;
  double forward_weighted = 0.0;
  double rate_gap = 0.0;   // |r(t, s) - ρ(t)|
  double count_gap = 0.0;  // |E(N_{t+T} - N_t) - ∫_t^{t+T} ρ|
};

struct ConvergeResult {
  double start = 0.0;
  HarrisConstants harris;
  std::vector<ConvergeRow> rows;
  DecayFit backward_fit;
  DecayFit forward_fit;
  bool backward_within = false;
  bool rate_within = false;
  bool count_within = false;
};

/// Default grid s + kT, k = 1..10.
std::vector<double> default_times(const RunConfig& cfg);

/// converge.csv (t, distance, bound_value, within_bound) for the backward law,
/// converge_forward.csv (t, distance, weighted_distance), converge_summary.txt, converge.svg.
ConvergeResult run_converge(const RunConfig& cfg, double s, const std::vector<double>& times);

struct SimulationResult {
  std::vector<EventPath> paths;
  std::vector<double> times;
};

/// sim.replicas paths on [sim.start, sim.horizon]; replica i uses stream i.
SimulationResult simulate_replicas(const KernelHandle& k, const SimConfig& sim);

/// paths.csv (replica, k, T_k) and recurrence.csv (replica, t, N, X, Y) at t = s + jT.
SimulationResult run_simulate(const RunConfig& cfg);

struct PdmpResult {
  double tv_forward = 0.0;
  double tv_backward = 0.0;
};

/// pdmp_forward.csv and pdmp_backward.csv (time, value, phase), occupation.csv
/// (kind, u_bin, phase_bin, empirical, exact) and pdmp_summary.txt.
PdmpResult run_pdmp(const RunConfig& cfg);

/// Σ |empirical - exact| over the occupation cells plus the mass beyond u_max.
double occupation_tv(const OccupationHistogram& occ, const Eigen::MatrixXd& exact);

struct CheckItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool all_pass() const;
};

struct CheckOptions {
  bool corrupt_rho = false;
};

/// Invariant suite; writes check.txt.
CheckReport run_check(const RunConfig& cfg, const CheckOptions& options = {});

}  // namespace renewal

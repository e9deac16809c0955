#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "renewal/kernel.hpp"
#include "renewal/rng.hpp"

namespace renewal {

/// Proposals allowed per arrival before thinning gives up.
inline constexpr std::size_t kProposalCap = 1'000'000;

/// Next arrival after an event at u, exact by thinning against λ_max.
double sample_next_arrival(const KernelHandle& k, double u, RngStream& rng);

/// Next arrival after an event at u, conditioned on no event in (u, from].
double sample_arrival_after(const KernelHandle& k, double u, double from, RngStream& rng);

/// Inversion sampler: solves Λ(u + τ, u) = E by bisection on [E/λ_max, E/λ_min].
/// Requires a closed-form cumulative hazard.
double sample_next_arrival_inversion(const KernelHandle& k, double u, RngStream& rng,
                                     double tol = 1e-10);

/// One realization T_1 < T_2 < ... started from T_0 = start. The last arrival
/// lies beyond the horizon, so recurrence times are defined on [start, horizon].
struct EventPath {
  double start = 0.0;
  double horizon = 0.0;
  std::vector<double> arrivals;
};

EventPath simulate_path(const KernelHandle& k, double start, double horizon, RngStream& rng);

struct Recurrence {
  std::size_t count;  // N_t
  double forward;     // X_t
  double backward;    // Y_t
};

Recurrence recurrence_at(const EventPath& path, double t);

enum class PdmpKind { forward, backward };

struct PdmpSample {
  double time;
  double value;  // X̃ (forward) or Ỹ (backward)
  double phase;  // in [0, T)
};

/**
 * Piecewise deterministic trajectory on R+ x T.
 *
 * `samples` holds the initial state, the state right after every jump and the
 * state at `t_end`; between consecutive samples the first coordinate moves with
 * slope -1 (forward) or +1 (backward) and the phase is constant.
 */
struct PdmpTrajectory {
  PdmpKind kind = PdmpKind::forward;
  double period = 1.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<PdmpSample> samples;
  std::vector<double> jump_times;
  double pending_event = 0.0;  // forward kind: clock time of the first jump after t_end
};

/**
 * Initial state of a PDMP.
 *
 * The phase is given as a real "anchor" time whose class mod T is the phase:
 * for the forward process the (kernel) time of the next event, for the backward
 * process the time of the last event. Passing the unreduced event time makes the
 * PDMP reproduce a renewal path bit-for-bit when both consume the same stream.
 */
struct PdmpInit {
  double value = 0.0;
  double anchor = 0.0;
};

PdmpTrajectory simulate_forward_pdmp(const KernelHandle& k, PdmpInit init, double t_end,
                                     RngStream& rng, double t_start = 0.0);
PdmpTrajectory simulate_backward_pdmp(const KernelHandle& k, PdmpInit init, double t_end,
                                      RngStream& rng, double t_start = 0.0);

/// State at time t (right-continuous).
PdmpSample state_at(const PdmpTrajectory& traj, double t);

/// Time-averaged occupation of [0, u_max] x T, cells indexed (u bin, phase bin).
struct OccupationHistogram {
  double u_max = 0.0;
  double period = 1.0;
  Eigen::MatrixXd mass;   // fraction of observation time per cell
  double discarded = 0.0; // fraction of time with first coordinate above u_max

  Eigen::VectorXd u_marginal() const { return mass.rowwise().sum(); }
  Eigen::VectorXd phase_marginal() const { return mass.colwise().sum().transpose(); }
};

OccupationHistogram occupation_histogram(const PdmpTrajectory& traj, double u_max,
                                         Eigen::Index n_u, Eigen::Index n_phase, double burn_in);

}  // namespace renewal

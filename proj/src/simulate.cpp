#include "renewal/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "renewal/errors.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

double sample_arrival_after(const KernelHandle& k, double u, double from, RngStream& rng) {
  const double bound = k.lambda_max;
  double t = from;
  for (std::size_t n = 0; n < kProposalCap; ++n) {
    t += rng.exponential() / bound;
    if (rng.uniform() * bound <= k.hazard(t, u)) return t;
  }
  throw SamplerError("thinning exceeded the proposal cap; check the kernel's rate bounds");
}

double sample_next_arrival(const KernelHandle& k, double u, RngStream& rng) {
  return sample_arrival_after(k, u, u, rng);
}

double sample_next_arrival_inversion(const KernelHandle& k, double u, RngStream& rng, double tol) {
  if (!k.has_closed_form()) {
    throw ConfigError("inversion sampling needs a closed-form cumulative hazard");
  }
  const double target = rng.exponential();
  double lo = target / k.lambda_max;
  double hi = target / k.lambda_min;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (k.cumulative(u + mid, u) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return u + 0.5 * (lo + hi);
}

EventPath simulate_path(const KernelHandle& k, double start, double horizon, RngStream& rng) {
  if (!(horizon > start)) throw DomainError("simulate_path needs horizon > start");
  EventPath path{start, horizon, {}};
  double last = start;
  do {
    last = sample_next_arrival(k, last, rng);
    path.arrivals.push_back(last);
  } while (last <= horizon);
  return path;
}

Recurrence recurrence_at(const EventPath& path, double t) {
  if (t < path.start || t > path.horizon) {
    throw DomainError("recurrence_at: t outside [start, horizon]");
  }
  const auto next = std::upper_bound(path.arrivals.begin(), path.arrivals.end(), t);
  const auto count = static_cast<std::size_t>(next - path.arrivals.begin());
  const double last = count == 0 ? path.start : path.arrivals[count - 1];
  return {count, *next - t, t - last};
}

PdmpTrajectory simulate_forward_pdmp(const KernelHandle& k, PdmpInit init, double t_end,
                                     RngStream& rng, double t_start) {
  if (!(init.value >= 0.0)) throw DomainError("forward PDMP needs x0 >= 0");
  const double T = k.period;
  PdmpTrajectory traj;
  traj.kind = PdmpKind::forward;
  traj.period = T;
  traj.t_start = t_start;
  traj.t_end = t_end;
  // Clock time = kernel time + offset. An anchor within rounding of t_start + x0
  // is the same clock, which keeps a coupled start bit-exact.
  double offset = (t_start + init.value) - init.anchor;
  if (std::abs(offset) <= 8.0 * std::numeric_limits<double>::epsilon() *
                               std::max({1.0, std::abs(init.anchor), std::abs(t_start)})) {
    offset = 0.0;
  }
  double kernel_next = init.anchor;
  double clock_next = kernel_next + offset;
  traj.samples.push_back({t_start, init.value, wrap_phase(init.anchor, T)});
  while (clock_next <= t_end) {
    const double jump = clock_next;
    kernel_next = sample_next_arrival(k, kernel_next, rng);
    clock_next = kernel_next + offset;
    traj.jump_times.push_back(jump);
    traj.samples.push_back({jump, clock_next - jump, wrap_phase(kernel_next, T)});
  }
  traj.samples.push_back({t_end, clock_next - t_end, wrap_phase(kernel_next, T)});
  traj.pending_event = clock_next;
  return traj;
}

PdmpTrajectory simulate_backward_pdmp(const KernelHandle& k, PdmpInit init, double t_end,
                                      RngStream& rng, double t_start) {
  if (!(init.value >= 0.0)) throw DomainError("backward PDMP needs y0 >= 0");
  const double T = k.period;
  PdmpTrajectory traj;
  traj.kind = PdmpKind::backward;
  traj.period = T;
  traj.t_start = t_start;
  traj.t_end = t_end;
  const double offset = t_start - (init.anchor + init.value);
  double kernel_last = init.anchor;
  double clock_last = t_start - init.value;
  traj.samples.push_back({t_start, init.value, wrap_phase(init.anchor, T)});
  double kernel_event = sample_arrival_after(k, kernel_last, init.anchor + init.value, rng);
  double clock_event = kernel_event + offset;
  while (clock_event <= t_end) {
    traj.jump_times.push_back(clock_event);
    traj.samples.push_back({clock_event, 0.0, wrap_phase(kernel_event, T)});
    kernel_last = kernel_event;
    clock_last = clock_event;
    kernel_event = sample_next_arrival(k, kernel_last, rng);
    clock_event = kernel_event + offset;
  }
  traj.samples.push_back({t_end, t_end - clock_last, wrap_phase(kernel_last, T)});
  return traj;
}

PdmpSample state_at(const PdmpTrajectory& traj, double t) {
  if (t < traj.t_start || t > traj.t_end) throw DomainError("state_at: t outside trajectory");
  auto it = std::upper_bound(traj.samples.begin(), traj.samples.end(), t,
                             [](double x, const PdmpSample& s) { return x < s.time; });
  const PdmpSample& s = *std::prev(it);
  if (traj.kind == PdmpKind::backward) return {t, s.value + (t - s.time), s.phase};
  // Forward value from the end of the segment, so coupled paths agree exactly.
  const auto j = static_cast<std::size_t>(std::prev(it) - traj.samples.begin());
  const double end = j < traj.jump_times.size() ? traj.jump_times[j] : traj.pending_event;
  return {t, end - t, s.phase};
}

OccupationHistogram occupation_histogram(const PdmpTrajectory& traj, double u_max,
                                         Eigen::Index n_u, Eigen::Index n_phase, double burn_in) {
  if (n_u < 1 || n_phase < 1 || !(u_max > 0.0)) {
    throw DomainError("occupation_histogram: invalid grid");
  }
  const double window_start = traj.t_start + burn_in;
  const double window = traj.t_end - window_start;
  if (!(window > 0.0)) throw DomainError("occupation_histogram: empty observation window");

  OccupationHistogram hist;
  hist.u_max = u_max;
  hist.period = traj.period;
  hist.mass = Eigen::MatrixXd::Zero(n_u, n_phase);
  const double du = u_max / static_cast<double>(n_u);
  const double sign = traj.kind == PdmpKind::forward ? -1.0 : 1.0;

  for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    const PdmpSample& s = traj.samples[i];
    const double a = std::max(s.time, window_start);
    const double b = std::min(traj.samples[i + 1].time, traj.t_end);
    if (!(b > a)) continue;
    const double ca = s.value + sign * (a - s.time);
    const double cb = s.value + sign * (b - s.time);
    const double lo = std::max(0.0, std::min(ca, cb));
    const double hi = std::max(ca, cb);
    auto col = static_cast<Eigen::Index>(std::floor(s.phase / traj.period * n_phase));
    col = std::clamp<Eigen::Index>(col, 0, n_phase - 1);
    if (hi > u_max) hist.discarded += hi - std::max(lo, u_max);
    const double top = std::min(hi, u_max);
    if (!(top > lo)) continue;
    auto row = static_cast<Eigen::Index>(std::floor(lo / du));
    for (; row < n_u; ++row) {
      const double cell_lo = static_cast<double>(row) * du;
      const double cell_hi = cell_lo + du;
      if (cell_lo >= top) break;
      const double overlap = std::min(top, cell_hi) - std::max(lo, cell_lo);
      if (overlap > 0.0) hist.mass(row, col) += overlap;
    }
  }
  hist.mass /= window;
  hist.discarded /= window;
  return hist;
}

}  // namespace renewal

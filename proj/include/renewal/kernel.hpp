#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace renewal {

/// Rate λ(t, u) at time t given the previous event at u (t >= u).
using HazardFn = std::function<double(double t, double u)>;

/**
 * A periodic hazard environment.
 *
 * The hazard is the primitive. The survival kernel H(t, u) = exp(-Λ(t, u)) and
 * the density K(t, u) = λ(t, u) H(t, u) are derived from it, where
 * Λ(t, u) = ∫_u^t λ(θ, u) dθ is either supplied in closed form or integrated
 * numerically with step at most `quadrature_step`.
 *
 * Immutable after construction; every evaluator is a pure function.
 */
struct KernelHandle {
  double period = 1.0;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  HazardFn hazard;
  HazardFn cumulative;  // optional closed form of Λ(t, u)
  double quadrature_step = 1e-3;
  std::string name;

  bool has_closed_form() const { return static_cast<bool>(cumulative); }
};

/// Validates the handle (positive period and rates, hazard present) and returns it.
KernelHandle make_kernel(double period, double lambda_min, double lambda_max, HazardFn hazard,
                         HazardFn cumulative = {}, double quadrature_step = 1e-3,
                         std::string name = "custom");

double hazard(const KernelHandle& k, double t, double u);
double cumulative_hazard(const KernelHandle& k, double t, double u);
double survival(const KernelHandle& k, double t, double u);
double density(const KernelHandle& k, double t, double u);

/// Λ(t_j, u) along an increasing grid t_0 >= u, integrated in a single pass.
/// Uses the closed form when present.
Eigen::VectorXd cumulative_hazard_profile(const KernelHandle& k, double u,
                                          const Eigen::Ref<const Eigen::VectorXd>& times);

enum class ViolationKind { below_min, above_max, not_periodic, survival_bracket };

struct KernelViolation {
  ViolationKind kind;
  double t;
  double u;
  double value;
};

struct KernelReport {
  std::size_t samples = 0;
  std::vector<KernelViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Samples (t, u) pairs on [0, 3T]^2 and checks rate bounds, periodicity and the
/// exponential bracket of H within `tol`.
KernelReport verify_kernel(const KernelHandle& k, std::size_t n_samples, double tol,
                           std::uint64_t seed = 0x5eed);

const char* to_string(ViolationKind kind);

// Builtin families.

/// λ(t, u) = λ₀.
KernelHandle make_constant(double lambda0, double period);
/// λ(t, u) = a + b sin(2πt/T), requires 0 < b < a.
KernelHandle make_time_modulated(double a, double b, double period);
/// λ(t, u) = a + b ½(1 + sin(2πt/T)) (1 - e^{-d(t-u)}), rates in [a, a + b].
KernelHandle make_age_time(double a, double b, double period, double d);
/// Classical renewal hazard λ(t, u) = a + b (1 - e^{-d(t-u)}), any period. A negative b
/// (with a + b > 0) gives a decreasing hazard.
KernelHandle make_age_only(double a, double b, double d, double period = 1.0);

/// λ(t, u) = a + b ½(1 + sin(2πt/T)) + c e^{-d(t-u)}: a periodic base rate plus a
/// boost after every event that relaxes at rate d. Rates in [a, a + b + c].
KernelHandle make_burst(double a, double b, double c, double d, double period);

}  // namespace renewal

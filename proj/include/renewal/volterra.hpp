#pragma once

#include <optional>

#include <Eigen/Core>

#include "renewal/distribution.hpp"
#include "renewal/kernel.hpp"
#include "renewal/phasechain.hpp"

namespace renewal {

/// Law ν of the age at the start time: a point mass δ_x or a density on a uniform grid.
class InitialLaw {
 public:
  static InitialLaw dirac(double x = 0.0);
  /// Density from node values at x_i = i step; renormalized to unit mass.
  static InitialLaw gridded(double step, Eigen::VectorXd density);

  bool is_dirac() const { return density_.size() == 0; }
  double location() const { return location_; }
  double step() const { return step_; }
  const Eigen::VectorXd& density() const { return density_; }
  /// Linear interpolation of the gridded density; zero outside the grid.
  double density_at(double x) const;

 private:
  double location_ = 0.0;
  double step_ = 0.0;
  Eigen::VectorXd density_;
  Eigen::VectorXd weights_;  // quadrature weights x density
  friend double mixed_survival(const KernelHandle&, const InitialLaw&, double, double);
  friend double mixed_density(const KernelHandle&, const InitialLaw&, double, double);
};

/// H^{δ_x}(t, s): survival on (s, t] when the last event happened at s - x.
double aged_survival(const KernelHandle& k, double x, double t, double s);

/// H^ν(t, s) = P(no event in (s, t]).
double mixed_survival(const KernelHandle& k, const InitialLaw& nu, double t, double s);
/// K^ν(t, s) = -d/dt H^ν(t, s).
double mixed_density(const KernelHandle& k, const InitialLaw& nu, double t, double s);

/**
 * r^ν(t_j, s) on t_j = s + j h, j = 0..J.
 *
 * When solved against a rate function ρ, `deviation` holds e = r - ρ obtained
 * from its own equation, which keeps distances to the stationary regime
 * accurate long after they drop below the discretization error of r.
 */
struct RenewalSolution {
  KernelHandle kernel;
  InitialLaw initial;
  double start = 0.0;
  double step = 0.0;
  Eigen::VectorXd r;
  Eigen::VectorXd deviation;
  std::optional<PhaseField> rho;

  Eigen::Index nodes() const { return r.size(); }
  double t_end() const { return start + step * static_cast<double>(r.size() - 1); }
  double time(Eigen::Index j) const { return start + step * static_cast<double>(j); }
  bool has_deviation() const { return deviation.size() == r.size(); }
  /// Index of a grid time; throws DomainError off the grid or out of range.
  Eigen::Index index_of(double t) const;
  /// Linear interpolation of r.
  double at(double t) const;
};

/// Product-trapezoid solution of r^ν(t, s) = K^ν(t, s) + ∫_s^t K(t, u) r^ν(u, s) du.
/// `richardson` levels of step halving are combined into an O(h^{2 + 2 levels}) result
/// on the coarse grid. Requires h <= T / 50.
RenewalSolution solve_renewal(const KernelHandle& k, const InitialLaw& nu, double s, double t_end,
                              double h, int richardson = 0);

/// Same, solving for e = r - ρ with forcing K^ν(t, s) - ∫_{-∞}^s K(t, v) ρ(v) dv.
RenewalSolution solve_renewal(const KernelHandle& k, const InitialLaw& nu, double s, double t_end,
                              double h, const PhaseField& rho, int richardson = 0);

/// sup_j |r_j - K^ν(t_j, s) - ∫_s^{t_j} K(t_j, u) r(u) du|, integral by fourth-order quadrature.
double volterra_residual(const RenewalSolution& sol);

/// Law of the backward recurrence time Y^{ν,s}_t; t must be a grid time.
HalfLineDistribution law_backward(const RenewalSolution& sol, double t);

/// Density of the forward recurrence time X^{ν,s}_t on [0, u_max] with step h_u.
HalfLineDistribution law_forward(const RenewalSolution& sol, double t, double u_max, double h_u);

/// E(N_{t2} - N_{t1}) = ∫_{t1}^{t2} r; t1 and t2 must be grid times.
double expected_count(const RenewalSolution& sol, double t1, double t2);

/// ∫_{t1}^{t2} e, the gap between the expected count and ∫ ρ. Needs a deviation solve.
double expected_count_gap(const RenewalSolution& sol, double t1, double t2);

struct ForwardDistance {
  double tv = 0.0;
  double weighted = 0.0;
  double tail_estimate = 0.0;  // weighted mass beyond u_max, extrapolated
};

/// d_TV(ℒ(Y_t), ν^t_∞) from the deviation e, exact up to quadrature. Needs a deviation solve.
double backward_distance(const RenewalSolution& sol, double t);

/// d_TV and d^f_TV between ℒ(X_t) and μ^t_∞ on [0, u_max]. Needs a deviation solve.
ForwardDistance forward_distance(const RenewalSolution& sol, double t, double u_max, double h_u);

}  // namespace renewal

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "renewal/distribution.hpp"
#include "renewal/kernel.hpp"
#include "renewal/phasechain.hpp"

namespace renewal {

/**
 * Integrals over the stationary past, ∫_{-∞}^s w(t, v) ρ(v) dv for w = K or H.
 *
 * The half line (-∞, s] is cut into panels of one period ending at s, each
 * integrated with 16-point Gauss-Legendre. All panels share the same phases, so
 * ρ is interpolated only once per start s. Panels stop once the remainder is
 * below `tol`, using K(t, v) ρ(v) <= λ_max² e^{-λ_min (t - v)}.
 */
class PastIntegral {
 public:
  PastIntegral(const KernelHandle& k, const PeriodicInterpolant& rho, double s, double tol = 1e-15);

  double start() const { return s_; }
  /// ∫_{-∞}^s K(t, v) ρ(v) dv, t >= s.
  double kernel(double t) const;
  /// ∫_{-∞}^s H(t, v) ρ(v) dv, t >= s.
  double survival(double t) const;

 private:
  template <class F>
  double sum(double t, F&& f) const;

  const KernelHandle* k_;
  double s_;
  double length_;                // truncation length at t = s
  Eigen::VectorXd offsets_;      // v = s - pT - offsets_[q]
  Eigen::VectorXd weighted_rho_; // quadrature weight x ρ at each offset
};

/// Default truncation max(10 / λ_min, 5 T).
double default_u_max(const KernelHandle& k);

enum class LimitKind { backward, forward };

/// ν^φ_∞ or μ^φ_∞ sampled at u_i = i h on [0, u_max].
struct LimitLaw {
  LimitKind kind = LimitKind::backward;
  double phase = 0.0;
  double step = 0.0;
  Eigen::VectorXd density;    // node values
  HalfLineDistribution law;   // piecewise-linear payload, no atoms
  double tail_bound = 0.0;    // mass beyond u_max

  /// Fourth-order quadrature of the node values.
  double mass() const;
};

/// ν^φ_∞(u) = ρ(φ - u) H(φ, φ - u).
LimitLaw nu_infty(const PhaseField& rho, const KernelHandle& k, double phase, double u_max,
                  double h_u);

/// μ^φ_∞(u) = ∫_{-∞}^φ K(φ + u, v) ρ(v) dv.
LimitLaw mu_infty(const PhaseField& rho, const KernelHandle& k, double phase, double u_max,
                  double h_u, double tail_tol = 1e-15);

/// Pointwise joint densities ν̃_∞(u, φ) and μ̃_∞(u, φ).
double nu_joint_density(const PeriodicInterpolant& rho, const KernelHandle& k, double u,
                        double phase);
double mu_joint_density(const PeriodicInterpolant& rho, const KernelHandle& k, double u,
                        double phase);

/// Joint law tabulated on u_i = i h_u (rows) by the phase nodes of a circle grid (columns).
struct JointLimitLaw {
  LimitKind kind = LimitKind::backward;
  double u_step = 0.0;
  CircleGrid phases;
  Eigen::MatrixXd values;

  double mass() const;
};

struct JointLimits {
  JointLimitLaw nu;
  JointLimitLaw mu;
};

JointLimits joint_limits(const PhaseField& rho, const KernelHandle& k, double u_max, double h_u,
                         Eigen::Index n_phase);

/// Exact masses of ν̃_∞ or μ̃_∞ over the cells of an n_u x n_φ grid on
/// [0, u_max] x T, matching OccupationHistogram's layout.
Eigen::MatrixXd joint_cell_masses(LimitKind kind, const PhaseField& rho, const KernelHandle& k,
                                  double u_max, Eigen::Index n_u, Eigen::Index n_phase);

using TestFunction = std::function<double(double)>;

/**
 * Transition operator 𝒫 of the sampled forward chain X^φ_n = X_{nT + φ} and its
 * adjoint 𝒫_*.
 *
 * On [0, T] 𝒫g uses the resolvent form g^K(t) + ∫_t^T r(φ+u, φ+t) g^K(u) du;
 * beyond T it is the shift g(t - T). The resolvent table r(φ + t_i, φ + t_j) is
 * built once on a grid of `nodes_per_period` intervals, optionally refined by
 * Richardson extrapolation. Output grids share that step.
 */
class ForwardTransition {
 public:
  ForwardTransition(const KernelHandle& k, double phase, Eigen::Index nodes_per_period = 200,
                    int richardson = 1);

  double step() const { return h_; }
  double phase() const { return phase_; }
  /// r(φ + t_i, φ + t_j) for i >= j; zero above the diagonal.
  const Eigen::MatrixXd& resolvent() const { return resolvent_; }

  /// g^K(t_i) on the one-period grid.
  Eigen::VectorXd g_kernel(const TestFunction& g) const;
  /// 𝒫g at u_i = i h, u_i <= u_max.
  Eigen::VectorXd apply(const TestFunction& g, double u_max) const;
  /// Density of 𝒫_* ν at u_i = i h, u_i <= u_max, for a density ν on R+.
  Eigen::VectorXd adjoint(const TestFunction& nu, double u_max) const;

 private:
  const KernelHandle* k_;
  double phase_;
  double h_;
  Eigen::Index n_;
  Eigen::MatrixXd resolvent_;
};

Eigen::VectorXd forward_transition(const KernelHandle& k, double phase, const TestFunction& g,
                                   double u_max, Eigen::Index nodes_per_period = 200);

/// sup_u |𝒫_* μ - μ| over the nodes u_i <= u_max - T of the law's grid.
double invariance_residual_forward(const LimitLaw& mu, const KernelHandle& k);

struct IdentityResiduals {
  double shift = 0.0;       // μ(u + T) = μ(u) - (K^{[u],φ} * ρ^φ)(T)
  double difference = 0.0;  // μ = ρ^φ - K^φ * ρ^φ
  double resolvent = 0.0;   // K^φ * ρ^φ = r^φ * μ
  double max() const;
};

/// Residuals of the three identities satisfied by μ^φ_∞, on u in [0, u_span].
IdentityResiduals identity_checks(const PhaseField& rho, const KernelHandle& k, double phase,
                                  double u_span = 5.0, Eigen::Index nodes_per_period = 200);

struct LyapunovCheck {
  double worst_margin = 0.0;  // min over nodes of γ f + κ - 𝒫f
  bool holds = false;
};

/// 𝒫f <= γ f + κ at every node of [0, u_max], f(u) = e^{λ_min u / 2}.
LyapunovCheck lyapunov_check(const KernelHandle& k, double phase, double u_max,
                             Eigen::Index nodes_per_period = 200);

struct HarrisConstants {
  double beta = 0.0;   // T λ_min e^{-T λ_max}
  double c = 0.0;      // -log(β) / T
  double C = 0.0;      // 2 e^{cT}
  double gamma = 0.0;  // e^{-λ_min T / 2}
  double kappa = 0.0;  // 2 (λ_max / λ_min + λ_max² / λ_min²)
  double alpha = 0.0;  // (λ_min / λ_max) e^{-λ_max T}
  double doeblin_beta = 0.0;
  bool large_period = false;  // γ <= 1/2 and T > 2 log(8κ) / λ_min
  int period_multiple = 1;    // smallest p for which pT is large enough
};

HarrisConstants harris_constants(double lambda_min, double lambda_max, double period);

}  // namespace renewal

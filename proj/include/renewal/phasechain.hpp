#pragma once

#include <Eigen/Core>

#include "renewal/kernel.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

/// Uniform grid t_i = i T / m on the circle R / T Z.
struct CircleGrid {
  double period = 1.0;
  Eigen::Index m = 256;

  double step() const { return period / static_cast<double>(m); }
  double node(Eigen::Index i) const { return static_cast<double>(i) * step(); }
  Eigen::VectorXd nodes() const {
    return Eigen::VectorXd::LinSpaced(m, 0.0, period - step());
  }
};

/// A function on the circle sampled on a CircleGrid (π, ρ, ...).
struct PhaseField {
  CircleGrid grid;
  Eigen::VectorXd values;

  /// Rectangle rule, spectrally accurate for smooth periodic fields.
  double integral() const { return grid.step() * values.sum(); }
  PeriodicInterpolant interpolant() const { return {grid.period, values}; }
};

/**
 * Folded kernel K^T(t, s) = Σ_{p >= 0} K(t + pT, s) on a circle grid.
 *
 * K^T(., s) jumps by K(s, s) at t = s, so integrals against it use fourth-order
 * Gregory weights on the interval unrolled at the jump, with the one-sided
 * limits at its two ends. `operator_matrix()` bakes both into an m x m matrix
 * that applies y ↦ ∫ K^T(t_i, s) y(s) ds.
 */
struct FoldedKernel {
  CircleGrid grid;
  Eigen::MatrixXd values;         // K^T(t_i, s_j), right limit on the diagonal
  Eigen::VectorXd diagonal_jump;  // K(s_j, s_j)
  int periods = 0;
  double tail_tol = 0.0;

  Eigen::MatrixXd operator_matrix() const;
  /// ∫ K^T(t, s_j) dt for every column.
  Eigen::VectorXd column_mass() const;
  double min_entry() const { return values.minCoeff(); }
};

/// Number of summed periods P = ceil(-ln(tail_tol) / (λ_min T)).
int fold_periods(const KernelHandle& k, double tail_tol);

FoldedKernel fold_kernel(const KernelHandle& k, const CircleGrid& grid, double tail_tol);

/// Same folding applied to H, with jump H(s, s) = 1.
FoldedKernel fold_survival(const KernelHandle& k, const CircleGrid& grid, double tail_tol);

struct StationaryPhase {
  PhaseField pi;
  int iterations = 0;
  double residual = 0.0;     // ‖π - N(K^T π)‖_{L1}, N = renormalization
  double column_defect = 0.0; // |∫ K^T π - 1|, quadrature + truncation error
};

/// Invariant density of the phase chain by power iteration.
StationaryPhase stationary_phase(const FoldedKernel& fk, double tol = 1e-12,
                                 int max_iter = 100000);

struct RateFunction {
  PhaseField rho;
  Eigen::VectorXd normalization;  // c(t_i) = 1 / ∫_{-∞}^{t_i} H(t_i, u) π(u) du
  double c = 0.0;                 // mean of normalization
  double spread = 0.0;            // (max c - min c) / c
};

/// ρ = c π from the stationary phase density; throws InconsistencyError when the
/// normalization spread exceeds 100 x `consistency_tol`.
RateFunction rho_from_phase(const PhaseField& pi, const KernelHandle& k, double tail_tol = 1e-12,
                            double consistency_tol = 1e-8);

struct MeanDelta {
  double beta = 0.0;
  double tail_bound = 0.0;
};

/// β = E(Δ) under the stationary phase law, Δ the number of periods crossed.
MeanDelta mean_delta(const PhaseField& pi, const KernelHandle& k, int n_periods_cap = 0);

struct RhoResidual {
  double equation = 0.0;       // sup |ρ - ∫ K ρ|
  double normalization = 0.0;  // sup |1 - ∫ H ρ|
};

RhoResidual residual_rho(const PhaseField& rho, const KernelHandle& k, double tail_tol = 1e-12);

/// Everything the rest of the pipeline needs from the phase chain.
struct PhaseChainSolution {
  FoldedKernel folded;
  StationaryPhase stationary;
  RateFunction rate;
  MeanDelta delta;
};

PhaseChainSolution solve_phase_chain(const KernelHandle& k, Eigen::Index m = 256,
                                     double tail_tol = 1e-12, double tol = 1e-12,
                                     int max_iter = 100000);

}  // namespace renewal

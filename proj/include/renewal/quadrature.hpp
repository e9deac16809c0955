#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace renewal {

/**
 * Weights for `intervals + 1` equally spaced nodes with unit spacing.
 *
 * For 7 or more intervals this is the fourth-order Gregory rule
 * (17/48, 59/48, 43/48, 49/48, 1, ..., 1, 49/48, 43/48, 59/48, 17/48).
 * Shorter grids fall back to Simpson / Simpson 3/8 combinations, and a single
 * interval to the trapezoid.
 */
Eigen::VectorXd gregory_weights(Eigen::Index intervals);

/// ∫ f over a uniform grid with spacing h (f holds node values).
double integrate_uniform(const Eigen::Ref<const Eigen::VectorXd>& f, double h);

/// Gauss-Legendre rule on [-1, 1] by the Golub-Welsch eigenvalue method.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  explicit GaussLegendre(int n);
};

/**
 * Trigonometric interpolant of samples y_j = f(jT/m) of a T-periodic function.
 *
 * The Nyquist mode of even m is split symmetrically, so the interpolant is real
 * and reproduces the samples exactly.
 */
class PeriodicInterpolant {
 public:
  PeriodicInterpolant() = default;
  PeriodicInterpolant(double period, const Eigen::Ref<const Eigen::VectorXd>& samples);

  double operator()(double t) const;
  double period() const { return period_; }

 private:
  double period_ = 1.0;
  Eigen::Index m_ = 0;
  double mean_ = 0.0;
  std::vector<std::complex<double>> coeffs_;  // k = 1 .. m/2 (Nyquist pre-halved)
};

/// Reduces t to [0, period).
double wrap_phase(double t, double period);

}  // namespace renewal

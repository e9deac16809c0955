#pragma once

#include <vector>

#include "renewal/distribution.hpp"

namespace renewal {

/// Unhalved total variation ∫|p - q| + Σ |atom differences|, in [0, 2].
/// Densities are compared exactly on the merged cell boundaries; atoms at a
/// location are matched only against atoms at the same location.
double tv_distance(const HalfLineDistribution& p, const HalfLineDistribution& q);

/// ∫ e^{λ_min u / 2} |p - q|(du). Throws UnreliableResultError when the
/// extrapolated tail beyond the common support exceeds ten times the result.
double weighted_tv(const HalfLineDistribution& p, const HalfLineDistribution& q, double lambda_min);

/// Σ_b |p(B_b) - q(B_b)| over bins [b w, (b+1) w) covering [0, u_max), plus
/// one overflow bin [u_max, ∞). Atoms fall into the bin containing them.
double binned_tv(const HalfLineDistribution& p, const HalfLineDistribution& q, double bin_width,
                 double u_max);

/// Histogram density; samples at or beyond u_max form a flagged atom at u_max.
HalfLineDistribution empirical_distribution(const std::vector<double>& samples, double bin_width,
                                            double u_max);

struct DecayFit {
  std::vector<double> times;
  std::vector<double> distances;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Distances at or below this are treated as numerical noise and excluded from fits.
inline constexpr double kNoiseFloor = 1e-12;

/// Least squares of log d_j against t_j.
DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& distances);

/// True iff d_j <= C e^{-c (t_j - s)} for all j.
bool bound_check(const std::vector<double>& times, const std::vector<double>& distances, double C,
                 double c, double s);

}  // namespace renewal

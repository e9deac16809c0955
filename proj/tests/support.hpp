#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "renewal/distribution.hpp"
#include "renewal/kernel.hpp"

namespace test {

/// Exp(rate) density sampled on [0, u_max] with step h.
inline renewal::HalfLineDistribution exponential_law(double rate, double u_max, double h) {
  const auto n = static_cast<Eigen::Index>(std::llround(u_max / h));
  Eigen::VectorXd nodes(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) nodes[i] = rate * std::exp(-rate * h * static_cast<double>(i));
  return renewal::HalfLineDistribution::from_nodes(h, nodes);
}

/// The builtin families with the default parameters used across the tests.
inline std::vector<renewal::KernelHandle> builtins() {
  return {renewal::make_constant(1.0, 1.0), renewal::make_time_modulated(1.0, 0.5, 1.0),
          renewal::make_age_time(0.5, 1.0, 1.0, 1.0), renewal::make_age_only(0.5, 1.5, 1.0),
          renewal::make_burst(0.5, 0.5, 1.0, 1.0, 1.0)};
}

/// Same kernel with the closed-form Λ removed, forcing quadrature.
inline renewal::KernelHandle without_closed_form(renewal::KernelHandle k) {
  k.cumulative = nullptr;
  return k;
}

}  // namespace test

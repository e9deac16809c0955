#include "renewal/kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "renewal/errors.hpp"

namespace renewal {

namespace {

void require_ordered(double t, double u) {
  if (!(t >= u)) {
    throw DomainError("kernel evaluated with t < u (t=" + std::to_string(t) +
                      ", u=" + std::to_string(u) + ")");
  }
}

// Composite Simpson on [u, t] with an even number of panels of width <= step.
double integrate_hazard(const KernelHandle& k, double t, double u) {
  const double span = t - u;
  auto panels = static_cast<long>(std::ceil(span / k.quadrature_step));
  panels += panels % 2;
  panels = std::max(panels, 2L);
  const double h = span / static_cast<double>(panels);
  double acc = k.hazard(u, u) + k.hazard(t, u);
  for (long i = 1; i < panels; ++i) {
    acc += (i % 2 ? 4.0 : 2.0) * k.hazard(u + static_cast<double>(i) * h, u);
  }
  return acc * h / 3.0;
}

}  // namespace

KernelHandle make_kernel(double period, double lambda_min, double lambda_max, HazardFn hazard,
                         HazardFn cumulative, double quadrature_step, std::string name) {
  if (!(period > 0.0)) throw ConfigError("kernel period must be positive");
  if (!(lambda_min > 0.0)) throw ConfigError("lambda_min must be positive");
  if (!(lambda_max >= lambda_min)) throw ConfigError("lambda_max must be >= lambda_min");
  if (!std::isfinite(lambda_max)) throw ConfigError("lambda_max must be finite");
  if (!hazard) throw ConfigError("kernel requires a hazard function");
  if (!(quadrature_step > 0.0)) throw ConfigError("quadrature_step must be positive");
  KernelHandle k;
  k.period = period;
  k.lambda_min = lambda_min;
  k.lambda_max = lambda_max;
  k.hazard = std::move(hazard);
  k.cumulative = std::move(cumulative);
  k.quadrature_step = quadrature_step;
  k.name = std::move(name);
  return k;
}

double hazard(const KernelHandle& k, double t, double u) {
  require_ordered(t, u);
  return k.hazard(t, u);
}

double cumulative_hazard(const KernelHandle& k, double t, double u) {
  require_ordered(t, u);
  if (t == u) return 0.0;
  if (k.cumulative) return k.cumulative(t, u);
  return integrate_hazard(k, t, u);
}

double survival(const KernelHandle& k, double t, double u) {
  return std::exp(-cumulative_hazard(k, t, u));
}

double density(const KernelHandle& k, double t, double u) {
  require_ordered(t, u);
  if (t == u) return k.hazard(u, u);
  return k.hazard(t, u) * std::exp(-cumulative_hazard(k, t, u));
}

Eigen::VectorXd cumulative_hazard_profile(const KernelHandle& k, double u,
                                          const Eigen::Ref<const Eigen::VectorXd>& times) {
  Eigen::VectorXd out(times.size());
  if (times.size() == 0) return out;
  require_ordered(times[0], u);
  if (k.cumulative) {
    for (Eigen::Index j = 0; j < times.size(); ++j) out[j] = cumulative_hazard(k, times[j], u);
    return out;
  }
  double acc = cumulative_hazard(k, times[0], u);
  out[0] = acc;
  for (Eigen::Index j = 1; j < times.size(); ++j) {
    if (times[j] < times[j - 1]) throw DomainError("profile grid must be nondecreasing");
    const double a = times[j - 1];
    const double b = times[j];
    if (b > a) {
      auto panels = static_cast<long>(std::ceil((b - a) / k.quadrature_step));
      panels += panels % 2;
      panels = std::max(panels, 2L);
      const double h = (b - a) / static_cast<double>(panels);
      double s = k.hazard(a, u) + k.hazard(b, u);
      for (long i = 1; i < panels; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * k.hazard(a + static_cast<double>(i) * h, u);
      }
      acc += s * h / 3.0;
    }
    out[j] = acc;
  }
  return out;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::below_min: return "below_lambda_min";
    case ViolationKind::above_max: return "above_lambda_max";
    case ViolationKind::not_periodic: return "not_periodic";
    case ViolationKind::survival_bracket: return "survival_bracket";
  }
  return "unknown";
}

KernelReport verify_kernel(const KernelHandle& k, std::size_t n_samples, double tol,
                           std::uint64_t seed) {
  if (n_samples == 0) throw DomainError("verify_kernel needs at least one sample");
  KernelReport report;
  report.samples = n_samples;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 3.0 * k.period);
  for (std::size_t n = 0; n < n_samples; ++n) {
    double t = unif(gen);
    double u = unif(gen);
    if (t < u) std::swap(t, u);
    const double lam = k.hazard(t, u);
    if (lam < k.lambda_min - tol) {
      report.violations.push_back({ViolationKind::below_min, t, u, lam});
    }
    if (lam > k.lambda_max + tol) {
      report.violations.push_back({ViolationKind::above_max, t, u, lam});
    }
    const double shifted = k.hazard(t + k.period, u + k.period);
    if (std::abs(shifted - lam) > tol) {
      report.violations.push_back({ViolationKind::not_periodic, t, u, shifted - lam});
    }
    const double cum = cumulative_hazard(k, t, u);
    const double span = t - u;
    const double slack = tol * std::max(1.0, span);
    if (cum < k.lambda_min * span - slack || cum > k.lambda_max * span + slack) {
      report.violations.push_back({ViolationKind::survival_bracket, t, u, cum});
    }
  }
  return report;
}

KernelHandle make_constant(double lambda0, double period) {
  if (!(lambda0 > 0.0)) throw ConfigError("constant kernel requires lambda0 > 0");
  return make_kernel(
      period, lambda0, lambda0, [lambda0](double, double) { return lambda0; },
      [lambda0](double t, double u) { return lambda0 * (t - u); }, 1e-3, "constant");
}

KernelHandle make_time_modulated(double a, double b, double period) {
  if (!(b > 0.0 && b < a)) throw ConfigError("time_modulated kernel requires 0 < b < a");
  const double omega = 2.0 * std::numbers::pi / period;
  return make_kernel(
      period, a - b, a + b,
      [=](double t, double) { return a + b * std::sin(omega * t); },
      [=](double t, double u) {
        return a * (t - u) - b / omega * (std::cos(omega * t) - std::cos(omega * u));
      },
      1e-3, "time_modulated");
}

KernelHandle make_age_time(double a, double b, double period, double d) {
  if (!(a > 0.0)) throw ConfigError("age_time kernel requires a > 0");
  if (!(b > 0.0)) throw ConfigError("age_time kernel requires b > 0");
  if (!(d > 0.0)) throw ConfigError("age_time kernel requires d > 0");
  const double omega = 2.0 * std::numbers::pi / period;
  const double half = 0.5 * b;
  return make_kernel(
      period, a, a + b,
      [=](double t, double u) {
        return a + half * (1.0 + std::sin(omega * t)) * (-std::expm1(-d * (t - u)));
      },
      [=](double t, double u) {
        const double tau = t - u;
        const double decay = std::exp(-d * tau);
        // ∫_u^t sin(ωθ) e^{-d(θ-u)} dθ
        const double damped_sin =
            (d * std::sin(omega * u) + omega * std::cos(omega * u) -
             decay * (d * std::sin(omega * t) + omega * std::cos(omega * t))) /
            (d * d + omega * omega);
        const double plain = tau - (std::cos(omega * t) - std::cos(omega * u)) / omega;
        const double damped = -std::expm1(-d * tau) / d + damped_sin;
        return a * tau + half * (plain - damped);
      },
      1e-3, "age_time");
}

KernelHandle make_age_only(double a, double b, double d, double period) {
  if (!(a > 0.0)) throw ConfigError("age_only kernel requires a > 0");
  if (!(a + b > 0.0) || b == 0.0) throw ConfigError("age_only kernel requires a + b > 0, b != 0");
  if (!(d > 0.0)) throw ConfigError("age_only kernel requires d > 0");
  return make_kernel(
      period, std::min(a, a + b), std::max(a, a + b), [=](double t, double u) { return a + b * (-std::expm1(-d * (t - u))); },
      [=](double t, double u) {
        const double tau = t - u;
        return (a + b) * tau + b * std::expm1(-d * tau) / d;
      },
      1e-3, "age_only");
}

KernelHandle make_burst(double a, double b, double c, double d, double period) {
  if (!(a > 0.0) || !(b >= 0.0) || !(c > 0.0) || !(d > 0.0)) {
    throw ConfigError("burst kernel requires a > 0, b >= 0, c > 0, d > 0");
  }
  const double omega = 2.0 * std::numbers::pi / period;
  const double half = 0.5 * b;
  return make_kernel(
      period, a, a + b + c,
      [=](double t, double u) {
        return a + half * (1.0 + std::sin(omega * t)) + c * std::exp(-d * (t - u));
      },
      [=](double t, double u) {
        const double tau = t - u;
        const double wave = tau - (std::cos(omega * t) - std::cos(omega * u)) / omega;
        return a * tau + half * wave - c * std::expm1(-d * tau) / d;
      },
      1e-3, "burst");
}

}  // namespace renewal

#include "renewal/volterra.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "renewal/asymptotics.hpp"
#include "renewal/errors.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

namespace {

using Forcing = std::function<double(double)>;

// x_j = [f(t_j) + h Σ_{i<j} w_i K(t_j, t_i) x_i] / (1 - (h/2) λ(t_j, t_j)), w_0 = 1/2.
Eigen::VectorXd trapezoid_solve(const KernelHandle& k, double s, double h, Eigen::Index n,
                                const Forcing& f) {
  Eigen::VectorXd x(n + 1);
  x[0] = f(s);
  for (Eigen::Index j = 1; j <= n; ++j) {
    const double tj = s + h * static_cast<double>(j);
    double acc = 0.5 * density(k, tj, s) * x[0];
    for (Eigen::Index i = 1; i < j; ++i) {
      acc += density(k, tj, s + h * static_cast<double>(i)) * x[i];
    }
    x[j] = (f(tj) + h * acc) / (1.0 - 0.5 * h * k.hazard(tj, tj));
  }
  return x;
}

// Romberg combination of solves at h, h/2, ..., h/2^levels, sampled on the coarse grid.
Eigen::VectorXd extrapolated_solve(const KernelHandle& k, double s, double h, Eigen::Index n,
                                   int levels, const Forcing& f) {
  std::vector<Eigen::VectorXd> table;
  for (int l = 0; l <= levels; ++l) {
    const Eigen::Index refine = Eigen::Index{1} << l;
    const Eigen::VectorXd fine = trapezoid_solve(k, s, h / static_cast<double>(refine), n * refine, f);
    Eigen::VectorXd coarse(n + 1);
    for (Eigen::Index j = 0; j <= n; ++j) coarse[j] = fine[j * refine];
    table.push_back(std::move(coarse));
  }
  for (int m = 1; m <= levels; ++m) {
    const double factor = std::pow(4.0, m);
    for (int l = levels; l >= m; --l) {
      table[l] = (factor * table[l] - table[l - 1]) / (factor - 1.0);
    }
  }
  return table[levels];
}

Eigen::Index grid_intervals(const KernelHandle& k, double s, double t_end, double h) {
  if (!(h > 0.0) || h > k.period / 50.0) {
    throw ConfigError("volterra step h must lie in (0, T/50], got " + std::to_string(h));
  }
  if (!(t_end > s)) throw DomainError("solve_renewal needs t_end > s");
  return static_cast<Eigen::Index>(std::ceil((t_end - s) / h - 1e-9));
}

void check_range(const RenewalSolution& sol) {
  const double cap = sol.kernel.lambda_max * (1.0 + 1e-3);
  for (Eigen::Index j = 0; j < sol.r.size(); ++j) {
    if (!(sol.r[j] > 0.0) || sol.r[j] > cap) {
      throw InconsistencyError("solve_renewal: r = " + std::to_string(sol.r[j]) + " at t = " +
                               std::to_string(sol.time(j)) + " leaves (0, lambda_max]");
    }
  }
}

// ∫|y| for the piecewise-linear interpolant of node values y with spacing h.
double abs_linear_integral(const Eigen::VectorXd& y, double h) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < y.size(); ++i) {
    const double a = y[i];
    const double b = y[i + 1];
    if ((a >= 0.0) == (b >= 0.0)) {
      acc += 0.5 * std::abs(a + b);
    } else {
      acc += 0.5 * (a * a + b * b) / (std::abs(a) + std::abs(b));
    }
  }
  return h * acc;
}

const PhaseField& require_deviation(const RenewalSolution& sol) {
  if (!sol.has_deviation() || !sol.rho) {
    throw ConfigError("distance to the stationary regime needs a solve against rho");
  }
  return *sol.rho;
}

}  // namespace

InitialLaw InitialLaw::dirac(double x) {
  if (!(x >= 0.0)) throw DomainError("initial age must be nonnegative");
  InitialLaw nu;
  nu.location_ = x;
  return nu;
}

InitialLaw InitialLaw::gridded(double step, Eigen::VectorXd density) {
  if (!(step > 0.0) || density.size() < 2) throw DomainError("gridded law needs step > 0 and 2 nodes");
  if ((density.array() < 0.0).any()) throw DomainError("initial density must be nonnegative");
  InitialLaw nu;
  nu.step_ = step;
  const Eigen::VectorXd w = step * gregory_weights(density.size() - 1);
  const double mass = w.dot(density);
  if (!(mass > 0.0)) throw DomainError("initial density has zero mass");
  nu.density_ = density / mass;
  nu.weights_ = w.cwiseProduct(nu.density_);
  return nu;
}

double InitialLaw::density_at(double x) const {
  if (is_dirac() || x < 0.0) return 0.0;
  const double pos = x / step_;
  const auto i = static_cast<Eigen::Index>(std::floor(pos));
  if (i >= density_.size() - 1) {
    return i == density_.size() - 1 && pos == static_cast<double>(i) ? density_[i] : 0.0;
  }
  const double frac = pos - static_cast<double>(i);
  return density_[i] + frac * (density_[i + 1] - density_[i]);
}

double aged_survival(const KernelHandle& k, double x, double t, double s) {
  if (t < s) throw DomainError("aged_survival needs t >= s");
  if (x == 0.0) return survival(k, t, s);
  return std::exp(-(cumulative_hazard(k, t, s - x) - cumulative_hazard(k, s, s - x)));
}

double mixed_survival(const KernelHandle& k, const InitialLaw& nu, double t, double s) {
  if (t < s) throw DomainError("mixed_survival needs t >= s");
  if (nu.is_dirac()) return aged_survival(k, nu.location(), t, s);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < nu.weights_.size(); ++i) {
    if (nu.weights_[i] == 0.0) continue;
    acc += nu.weights_[i] * aged_survival(k, nu.step() * static_cast<double>(i), t, s);
  }
  return acc;
}

double mixed_density(const KernelHandle& k, const InitialLaw& nu, double t, double s) {
  if (t < s) throw DomainError("mixed_density needs t >= s");
  if (nu.is_dirac()) {
    const double x = nu.location();
    return k.hazard(t, s - x) * aged_survival(k, x, t, s);
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < nu.weights_.size(); ++i) {
    if (nu.weights_[i] == 0.0) continue;
    const double x = nu.step() * static_cast<double>(i);
    acc += nu.weights_[i] * k.hazard(t, s - x) * aged_survival(k, x, t, s);
  }
  return acc;
}

Eigen::Index RenewalSolution::index_of(double t) const {
  const double pos = (t - start) / step;
  const double j = std::round(pos);
  if (std::abs(pos - j) > 1e-6 || j < 0.0 || j > static_cast<double>(r.size() - 1)) {
    throw DomainError("time " + std::to_string(t) + " is not a node of the solved grid");
  }
  return static_cast<Eigen::Index>(j);
}

double RenewalSolution::at(double t) const {
  const double pos = (t - start) / step;
  if (pos < -1e-9 || pos > static_cast<double>(r.size() - 1) + 1e-9) {
    throw DomainError("time " + std::to_string(t) + " outside the solved range");
  }
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::max(pos, 0.0)), r.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return r[i] + frac * (r[i + 1] - r[i]);
}

RenewalSolution solve_renewal(const KernelHandle& k, const InitialLaw& nu, double s, double t_end,
                              double h, int richardson) {
  const Eigen::Index n = grid_intervals(k, s, t_end, h);
  RenewalSolution sol{k, nu, s, h, {}, {}, std::nullopt};
  sol.r = extrapolated_solve(k, s, h, n, richardson,
                             [&](double t) { return mixed_density(k, nu, t, s); });
  check_range(sol);
  return sol;
}

RenewalSolution solve_renewal(const KernelHandle& k, const InitialLaw& nu, double s, double t_end,
                              double h, const PhaseField& rho, int richardson) {
  const Eigen::Index n = grid_intervals(k, s, t_end, h);
  const PeriodicInterpolant rho_at = rho.interpolant();
  const PastIntegral past(k, rho_at, s);
  RenewalSolution sol{k, nu, s, h, {}, {}, rho};
  sol.deviation = extrapolated_solve(k, s, h, n, richardson, [&](double t) {
    return mixed_density(k, nu, t, s) - past.kernel(t);
  });
  sol.r.resize(n + 1);
  for (Eigen::Index j = 0; j <= n; ++j) sol.r[j] = rho_at(sol.time(j)) + sol.deviation[j];
  check_range(sol);
  return sol;
}

double volterra_residual(const RenewalSolution& sol) {
  const KernelHandle& k = sol.kernel;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < sol.nodes(); ++j) {
    const double tj = sol.time(j);
    double integral = 0.0;
    if (j > 0) {
      Eigen::VectorXd f(j + 1);
      for (Eigen::Index i = 0; i <= j; ++i) f[i] = density(k, tj, sol.time(i)) * sol.r[i];
      integral = integrate_uniform(f, sol.step);
    }
    worst = std::max(worst, std::abs(sol.r[j] - mixed_density(k, sol.initial, tj, sol.start) - integral));
  }
  return worst;
}

HalfLineDistribution law_backward(const RenewalSolution& sol, double t) {
  const KernelHandle& k = sol.kernel;
  const Eigen::Index n = sol.index_of(t);
  if (n == 0) throw DomainError("law_backward needs t > s");
  const double h = sol.step;
  const double elapsed = h * static_cast<double>(n);

  // Last event at t - θ inside (s, t]: density r(t - θ, s) H(t, t - θ).
  Eigen::VectorXd nodes(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    nodes[i] = sol.r[n - i] * survival(k, t, sol.time(n - i));
  }
  const InitialLaw& nu = sol.initial;
  if (nu.is_dirac()) {
    const double x = nu.location();
    std::vector<Atom> atom{{elapsed + x, aged_survival(k, x, t, sol.start)}};
    return HalfLineDistribution::from_smooth_nodes(h, nodes, std::move(atom));
  }

  // No event since s: the initial age x carried forward, density ν(x) H^{δ_x}(t, s).
  const double x_max = nu.step() * static_cast<double>(nu.density().size() - 1);
  const auto extra = static_cast<Eigen::Index>(std::ceil(x_max / h - 1e-9));
  Eigen::VectorXd left(n + extra);
  Eigen::VectorXd right(n + extra);
  const HalfLineDistribution recent = HalfLineDistribution::from_smooth_nodes(h, nodes);
  left.head(n) = recent.left();
  right.head(n) = recent.right();
  auto initial_part = [&](double x) {
    return x > x_max ? 0.0 : nu.density_at(x) * aged_survival(k, x, t, sol.start);
  };
  for (Eigen::Index c = 0; c < extra; ++c) {
    left[n + c] = initial_part(h * static_cast<double>(c));
    right[n + c] = initial_part(h * static_cast<double>(c + 1));
  }
  return HalfLineDistribution::from_cells(h, std::move(left), std::move(right));
}

HalfLineDistribution law_forward(const RenewalSolution& sol, double t, double u_max, double h_u) {
  if (!(h_u > 0.0) || !(u_max > h_u)) throw DomainError("law_forward needs 0 < h_u < u_max");
  const KernelHandle& k = sol.kernel;
  const Eigen::Index n = sol.index_of(t);
  if (n == 0) throw DomainError("law_forward needs t > s");
  const Eigen::VectorXd w = sol.step * gregory_weights(n);
  const Eigen::VectorXd wr = w.cwiseProduct(sol.r.head(n + 1));
  const auto cells = static_cast<Eigen::Index>(std::ceil(u_max / h_u - 1e-9));
  Eigen::VectorXd nodes(cells + 1);
  for (Eigen::Index i = 0; i <= cells; ++i) {
    const double tx = t + h_u * static_cast<double>(i);
    double acc = mixed_density(k, sol.initial, tx, sol.start);
    for (Eigen::Index j = 0; j <= n; ++j) acc += wr[j] * density(k, tx, sol.time(j));
    nodes[i] = acc;
  }
  return HalfLineDistribution::from_smooth_nodes(h_u, nodes);
}

double expected_count(const RenewalSolution& sol, double t1, double t2) {
  const Eigen::Index i1 = sol.index_of(t1);
  const Eigen::Index i2 = sol.index_of(t2);
  if (i2 < i1) throw DomainError("expected_count needs t1 <= t2");
  return integrate_uniform(sol.r.segment(i1, i2 - i1 + 1), sol.step);
}

double expected_count_gap(const RenewalSolution& sol, double t1, double t2) {
  require_deviation(sol);
  const Eigen::Index i1 = sol.index_of(t1);
  const Eigen::Index i2 = sol.index_of(t2);
  if (i2 < i1) throw DomainError("expected_count_gap needs t1 <= t2");
  return integrate_uniform(sol.deviation.segment(i1, i2 - i1 + 1), sol.step);
}

double backward_distance(const RenewalSolution& sol, double t) {
  const PhaseField& rho = require_deviation(sol);
  const KernelHandle& k = sol.kernel;
  const Eigen::Index n = sol.index_of(t);
  const PeriodicInterpolant rho_at = rho.interpolant();

  double inside = 0.0;
  if (n > 0) {
    Eigen::VectorXd f(n + 1);
    for (Eigen::Index j = 0; j <= n; ++j) {
      f[j] = std::abs(sol.deviation[j]) * survival(k, t, sol.time(j));
    }
    inside = integrate_uniform(f, sol.step);
  }

  const InitialLaw& nu = sol.initial;
  if (nu.is_dirac()) {
    const double atom = aged_survival(k, nu.location(), t, sol.start);
    return inside + atom + PastIntegral(k, rho_at, sol.start).survival(t);
  }
  const Eigen::Index m = nu.density().size();
  Eigen::VectorXd f(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = nu.step() * static_cast<double>(i);
    const double u = sol.start - x;
    f[i] = std::abs(nu.density()[i] * aged_survival(k, x, t, sol.start) - rho_at(u) * survival(k, t, u));
  }
  const double x_max = nu.step() * static_cast<double>(m - 1);
  return inside + integrate_uniform(f, nu.step()) +
         PastIntegral(k, rho_at, sol.start - x_max).survival(t);
}

ForwardDistance forward_distance(const RenewalSolution& sol, double t, double u_max, double h_u) {
  const PhaseField& rho = require_deviation(sol);
  if (!(h_u > 0.0) || !(u_max > h_u)) throw DomainError("forward_distance needs 0 < h_u < u_max");
  const KernelHandle& k = sol.kernel;
  const Eigen::Index n = sol.index_of(t);
  const PeriodicInterpolant rho_at = rho.interpolant();
  const PastIntegral past(k, rho_at, sol.start);
  const Eigen::VectorXd we =
      n > 0 ? Eigen::VectorXd(sol.step * gregory_weights(n).cwiseProduct(sol.deviation.head(n + 1)))
            : Eigen::VectorXd::Zero(1);

  const auto cells = static_cast<Eigen::Index>(std::ceil(u_max / h_u - 1e-9));
  const double a = 0.5 * k.lambda_min;
  Eigen::VectorXd diff(cells + 1);
  Eigen::VectorXd weighted(cells + 1);
  for (Eigen::Index i = 0; i <= cells; ++i) {
    const double x = h_u * static_cast<double>(i);
    const double tx = t + x;
    double acc = mixed_density(k, sol.initial, tx, sol.start) - past.kernel(tx);
    if (n > 0) {
      for (Eigen::Index j = 0; j <= n; ++j) acc += we[j] * density(k, tx, sol.time(j));
    }
    diff[i] = acc;
    weighted[i] = std::exp(a * x) * acc;
  }
  ForwardDistance out;
  out.tv = abs_linear_integral(diff, h_u);
  out.weighted = abs_linear_integral(weighted, h_u);
  out.tail_estimate = std::abs(weighted[cells]) / (k.lambda_min - a);
  return out;
}

}  // namespace renewal

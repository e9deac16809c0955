#include "renewal/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "renewal/errors.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

namespace {

constexpr int kGaussNodes = 16;

const GaussLegendre& gauss16() {
  static const GaussLegendre rule(kGaussNodes);
  return rule;
}

// ∫_a^b f by 16-point Gauss-Legendre on panels no longer than `panel`.
template <class F>
double gauss_integrate(F&& f, double a, double b, double panel) {
  if (!(b > a)) return 0.0;
  const GaussLegendre& gl = gauss16();
  const auto panels = static_cast<int>(std::max(1.0, std::ceil((b - a) / panel)));
  const double len = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * len;
    for (int q = 0; q < kGaussNodes; ++q) {
      acc += gl.weights[q] * f(mid + 0.5 * len * gl.nodes[q]);
    }
  }
  return 0.5 * len * acc;
}

Eigen::Index intervals_for(double u_max, double h) {
  if (!(h > 0.0) || !(u_max > h)) throw DomainError("grid needs 0 < step < u_max");
  return static_cast<Eigen::Index>(std::ceil(u_max / h - 1e-9));
}

LimitLaw make_limit(LimitKind kind, double phase, double h, Eigen::VectorXd nodes, double tail) {
  LimitLaw out;
  out.kind = kind;
  out.phase = phase;
  out.step = h;
  out.law = HalfLineDistribution::from_smooth_nodes(h, nodes);
  out.density = std::move(nodes);
  out.tail_bound = tail;
  return out;
}

// Product trapezoid for every column of r(φ + t_i, φ + t_j), i >= j, on n intervals of [0, T].
Eigen::MatrixXd resolvent_table(const KernelHandle& k, double phase, Eigen::Index n) {
  const double h = k.period / static_cast<double>(n);
  Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Eigen::Index j = 0; j <= n; ++j) {
    for (Eigen::Index i = j; i <= n; ++i) {
      kmat(i, j) = density(k, phase + h * static_cast<double>(i), phase + h * static_cast<double>(j));
    }
  }
  const Eigen::MatrixXd krow = kmat.transpose();  // contiguous rows for the inner sums
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Eigen::Index j = 0; j <= n; ++j) {
    r(j, j) = kmat(j, j);
    for (Eigen::Index i = j + 1; i <= n; ++i) {
      double acc = 0.5 * kmat(i, j) * r(j, j);
      for (Eigen::Index l = j + 1; l < i; ++l) acc += krow(l, i) * r(l, j);
      r(i, j) = (kmat(i, j) + h * acc) / (1.0 - 0.5 * h * kmat(i, i));
    }
  }
  return r;
}

// Node count n dividing T / step so the transition grid lands on the law's nodes.
Eigen::Index aligned_nodes(double period, double step) {
  const double ratio = period / step;
  const double whole = std::round(ratio);
  if (std::abs(ratio - whole) > 1e-9 * whole || whole < 8) return 200;
  const auto total = static_cast<Eigen::Index>(whole);
  for (Eigen::Index f = 1; f <= total; ++f) {
    if (total % f == 0 && total / f <= 400 && total / f >= 8) return total / f;
  }
  return 200;
}

}  // namespace

PastIntegral::PastIntegral(const KernelHandle& k, const PeriodicInterpolant& rho, double s,
                           double tol)
    : k_(&k), s_(s) {
  const double T = k.period;
  length_ = std::max(0.0, std::log(k.lambda_max * k.lambda_max / (k.lambda_min * tol)) / k.lambda_min);
  const auto sub = static_cast<Eigen::Index>(std::max(1.0, std::ceil(0.5 * k.lambda_max * T)));
  const GaussLegendre& gl = gauss16();
  const double len = T / static_cast<double>(sub);
  offsets_.resize(sub * kGaussNodes);
  weighted_rho_.resize(sub * kGaussNodes);
  for (Eigen::Index b = 0; b < sub; ++b) {
    for (int q = 0; q < kGaussNodes; ++q) {
      const Eigen::Index idx = b * kGaussNodes + q;
      offsets_[idx] = (static_cast<double>(b) + 0.5) * len + 0.5 * len * gl.nodes[q];
      weighted_rho_[idx] = 0.5 * len * gl.weights[q] * rho(s - offsets_[idx]);
    }
  }
}

template <class F>
double PastIntegral::sum(double t, F&& f) const {
  if (t < s_) throw DomainError("past integrals need t >= s");
  const double remaining = length_ - (t - s_);
  if (remaining <= 0.0) return 0.0;
  const double T = k_->period;
  const auto periods = static_cast<int>(std::ceil(remaining / T));
  double acc = 0.0;
  for (int p = periods - 1; p >= 0; --p) {
    const double base = s_ - p * T;
    for (Eigen::Index q = 0; q < offsets_.size(); ++q) {
      acc += weighted_rho_[q] * f(t, base - offsets_[q]);
    }
  }
  return acc;
}

double PastIntegral::kernel(double t) const {
  return sum(t, [this](double a, double v) { return density(*k_, a, v); });
}

double PastIntegral::survival(double t) const {
  return sum(t, [this](double a, double v) { return renewal::survival(*k_, a, v); });
}

double default_u_max(const KernelHandle& k) {
  return std::max(10.0 / k.lambda_min, 5.0 * k.period);
}

double LimitLaw::mass() const { return integrate_uniform(density, step); }

LimitLaw nu_infty(const PhaseField& rho, const KernelHandle& k, double phase, double u_max,
                  double h_u) {
  const Eigen::Index n = intervals_for(u_max, h_u);
  const PeriodicInterpolant rho_at = rho.interpolant();
  Eigen::VectorXd nodes(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double u = h_u * static_cast<double>(i);
    nodes[i] = rho_at(phase - u) * survival(k, phase, phase - u);
  }
  const double top = h_u * static_cast<double>(n);
  const double tail = k.lambda_max * std::exp(-k.lambda_min * top) / k.lambda_min;
  return make_limit(LimitKind::backward, phase, h_u, std::move(nodes), tail);
}

LimitLaw mu_infty(const PhaseField& rho, const KernelHandle& k, double phase, double u_max,
                  double h_u, double tail_tol) {
  const Eigen::Index n = intervals_for(u_max, h_u);
  const PeriodicInterpolant rho_at = rho.interpolant();
  const PastIntegral past(k, rho_at, phase, tail_tol);
  Eigen::VectorXd nodes(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) nodes[i] = past.kernel(phase + h_u * static_cast<double>(i));
  const double top = h_u * static_cast<double>(n);
  const double ratio = k.lambda_max / k.lambda_min;
  const double tail = ratio * ratio * std::exp(-k.lambda_min * top);
  return make_limit(LimitKind::forward, phase, h_u, std::move(nodes), tail);
}

double nu_joint_density(const PeriodicInterpolant& rho, const KernelHandle& k, double u,
                        double phase) {
  return rho(phase) * survival(k, u + phase, phase) / k.period;
}

double mu_joint_density(const PeriodicInterpolant& rho, const KernelHandle& k, double u,
                        double phase) {
  return PastIntegral(k, rho, phase - u).kernel(phase) / k.period;
}

double JointLimitLaw::mass() const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < values.cols(); ++j) acc += integrate_uniform(values.col(j), u_step);
  return acc * phases.step();
}

JointLimits joint_limits(const PhaseField& rho, const KernelHandle& k, double u_max, double h_u,
                         Eigen::Index n_phase) {
  const Eigen::Index n = intervals_for(u_max, h_u);
  const PeriodicInterpolant rho_at = rho.interpolant();
  const CircleGrid grid{k.period, n_phase};
  JointLimits out;
  out.nu = {LimitKind::backward, h_u, grid, Eigen::MatrixXd(n + 1, n_phase)};
  out.mu = {LimitKind::forward, h_u, grid, Eigen::MatrixXd(n + 1, n_phase)};
  for (Eigen::Index j = 0; j < n_phase; ++j) {
    const double phase = grid.node(j);
    for (Eigen::Index i = 0; i <= n; ++i) {
      const double u = h_u * static_cast<double>(i);
      out.nu.values(i, j) = nu_joint_density(rho_at, k, u, phase);
      out.mu.values(i, j) = mu_joint_density(rho_at, k, u, phase);
    }
  }
  return out;
}

Eigen::MatrixXd joint_cell_masses(LimitKind kind, const PhaseField& rho, const KernelHandle& k,
                                  double u_max, Eigen::Index n_u, Eigen::Index n_phase) {
  if (n_u < 1 || n_phase < 1 || !(u_max > 0.0)) throw DomainError("joint_cell_masses: invalid grid");
  const PeriodicInterpolant rho_at = rho.interpolant();
  const GaussLegendre gl(6);
  const double du = u_max / static_cast<double>(n_u);
  const double dphi = k.period / static_cast<double>(n_phase);
  Eigen::MatrixXd mass(n_u, n_phase);
  for (Eigen::Index a = 0; a < n_u; ++a) {
    for (Eigen::Index b = 0; b < n_phase; ++b) {
      double acc = 0.0;
      for (Eigen::Index p = 0; p < gl.nodes.size(); ++p) {
        const double u = (static_cast<double>(a) + 0.5 * (1.0 + gl.nodes[p])) * du;
        for (Eigen::Index q = 0; q < gl.nodes.size(); ++q) {
          const double phase = (static_cast<double>(b) + 0.5 * (1.0 + gl.nodes[q])) * dphi;
          const double value = kind == LimitKind::backward ? nu_joint_density(rho_at, k, u, phase)
                                                           : mu_joint_density(rho_at, k, u, phase);
          acc += gl.weights[p] * gl.weights[q] * value;
        }
      }
      mass(a, b) = 0.25 * du * dphi * acc;
    }
  }
  return mass;
}

ForwardTransition::ForwardTransition(const KernelHandle& k, double phase,
                                     Eigen::Index nodes_per_period, int richardson)
    : k_(&k), phase_(phase), n_(nodes_per_period) {
  if (n_ < 8) throw DomainError("forward transition needs at least 8 nodes per period");
  if (richardson < 0) throw DomainError("richardson levels must be nonnegative");
  h_ = k.period / static_cast<double>(n_);
  std::vector<Eigen::MatrixXd> table;
  for (int l = 0; l <= richardson; ++l) {
    const Eigen::Index refine = Eigen::Index{1} << l;
    const Eigen::MatrixXd fine = resolvent_table(k, phase, n_ * refine);
    Eigen::MatrixXd coarse(n_ + 1, n_ + 1);
    for (Eigen::Index j = 0; j <= n_; ++j) {
      for (Eigen::Index i = 0; i <= n_; ++i) coarse(i, j) = fine(i * refine, j * refine);
    }
    table.push_back(std::move(coarse));
  }
  for (int m = 1; m <= richardson; ++m) {
    const double factor = std::pow(4.0, m);
    for (int l = richardson; l >= m; --l) {
      table[l] = (factor * table[l] - table[l - 1]) / (factor - 1.0);
    }
  }
  resolvent_ = std::move(table[richardson]);
}

Eigen::VectorXd ForwardTransition::g_kernel(const TestFunction& g) const {
  const KernelHandle& k = *k_;
  const double T = k.period;
  // Covers test functions growing like e^{λ_min u / 2}.
  const double upper = 2.0 * std::log(2.0 * k.lambda_max / (k.lambda_min * 1e-14)) / k.lambda_min;
  Eigen::VectorXd out(n_ + 1);
  for (Eigen::Index i = 0; i <= n_; ++i) {
    const double from = phase_ + h_ * static_cast<double>(i);
    out[i] = gauss_integrate(
        [&](double u) { return g(u) * density(k, u + T + phase_, from); }, 0.0, upper, 0.5 * T);
  }
  return out;
}

Eigen::VectorXd ForwardTransition::apply(const TestFunction& g, double u_max) const {
  const Eigen::Index total = intervals_for(u_max, h_);
  const Eigen::VectorXd gk = g_kernel(g);
  Eigen::VectorXd out(total + 1);
  for (Eigen::Index i = 0; i <= total; ++i) {
    if (i > n_) {
      out[i] = g(h_ * static_cast<double>(i) - k_->period);
      continue;
    }
    double acc = gk[i];
    if (i < n_) {
      const Eigen::VectorXd f = resolvent_.col(i).segment(i, n_ - i + 1).cwiseProduct(gk.segment(i, n_ - i + 1));
      acc += integrate_uniform(f, h_);
    }
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd ForwardTransition::adjoint(const TestFunction& nu, double u_max) const {
  const KernelHandle& k = *k_;
  const double T = k.period;
  const Eigen::Index total = intervals_for(u_max, h_);
  Eigen::VectorXd nu_nodes(n_ + 1);
  for (Eigen::Index l = 0; l <= n_; ++l) nu_nodes[l] = nu(h_ * static_cast<double>(l));
  // ν(w) + (r^φ * ν)(w) on the one-period grid.
  Eigen::VectorXd first_jump = nu_nodes;
  for (Eigen::Index l = 1; l <= n_; ++l) {
    const Eigen::VectorXd f = resolvent_.row(l).head(l + 1).transpose().cwiseProduct(nu_nodes.head(l + 1));
    first_jump[l] += integrate_uniform(f, h_);
  }
  const Eigen::VectorXd w = h_ * gregory_weights(n_);
  const Eigen::VectorXd wq = w.cwiseProduct(first_jump);
  Eigen::VectorXd out(total + 1);
  for (Eigen::Index i = 0; i <= total; ++i) {
    const double u = h_ * static_cast<double>(i);
    double acc = nu(u + T);
    for (Eigen::Index l = 0; l <= n_; ++l) {
      acc += wq[l] * density(k, u + phase_ + T, phase_ + h_ * static_cast<double>(l));
    }
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd forward_transition(const KernelHandle& k, double phase, const TestFunction& g,
                                   double u_max, Eigen::Index nodes_per_period) {
  return ForwardTransition(k, phase, nodes_per_period).apply(g, u_max);
}

double invariance_residual_forward(const LimitLaw& mu, const KernelHandle& k) {
  const double span = mu.law.u_max() - k.period;
  if (!(span > 0.0)) throw DomainError("invariance residual needs u_max > T");
  const ForwardTransition op(k, mu.phase, aligned_nodes(k.period, mu.step));
  // Node values, not the cell-averaged payload: the operator grid is aligned to them.
  const auto nu = [&mu](double u) {
    const double x = u / mu.step;
    const auto last = static_cast<Eigen::Index>(mu.density.size()) - 1;
    if (x < 0.0 || x > static_cast<double>(last) + 1e-9) return 0.0;
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), last);
    const double w = x - static_cast<double>(i);
    return i == last || w < 1e-9 ? mu.density[i] : (1.0 - w) * mu.density[i] + w * mu.density[i + 1];
  };
  const Eigen::VectorXd image = op.adjoint(nu, span);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const double u = op.step() * static_cast<double>(i);
    if (u > span + 1e-12) break;
    worst = std::max(worst, std::abs(image[i] - nu(u)));
  }
  return worst;
}

double IdentityResiduals::max() const { return std::max({shift, difference, resolvent}); }

IdentityResiduals identity_checks(const PhaseField& rho, const KernelHandle& k, double phase,
                                  double u_span, Eigen::Index nodes_per_period) {
  const double T = k.period;
  const PeriodicInterpolant rho_at = rho.interpolant();
  const PastIntegral past(k, rho_at, phase);
  const auto mu = [&](double u) { return past.kernel(phase + u); };
  const ForwardTransition op(k, phase, nodes_per_period);
  const double h = op.step();
  const double panel = 0.25 * T;

  IdentityResiduals out;
  const auto n_u = static_cast<Eigen::Index>(std::floor(u_span / h + 1e-9));
  for (Eigen::Index i = 0; i <= n_u; ++i) {
    const double u = h * static_cast<double>(i);
    const double shifted = gauss_integrate(
        [&](double s) { return density(k, u + phase + T, phase + s) * rho_at(phase + s); }, 0.0, T,
        panel);
    out.shift = std::max(out.shift, std::abs(mu(u + T) - mu(u) + shifted));
    const double conv = gauss_integrate(
        [&](double s) { return density(k, phase + u, phase + s) * rho_at(phase + s); }, 0.0, u, panel);
    out.difference = std::max(out.difference, std::abs(mu(u) - rho_at(phase + u) + conv));
  }

  const Eigen::Index n = nodes_per_period;
  Eigen::VectorXd mu_nodes(n + 1);
  for (Eigen::Index l = 0; l <= n; ++l) mu_nodes[l] = mu(h * static_cast<double>(l));
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double t = h * static_cast<double>(i);
    const double lhs = gauss_integrate(
        [&](double s) { return density(k, phase + t, phase + s) * rho_at(phase + s); }, 0.0, t, panel);
    const Eigen::VectorXd f = op.resolvent().row(i).head(i + 1).transpose().cwiseProduct(mu_nodes.head(i + 1));
    out.resolvent = std::max(out.resolvent, std::abs(lhs - integrate_uniform(f, h)));
  }
  return out;
}

LyapunovCheck lyapunov_check(const KernelHandle& k, double phase, double u_max,
                             Eigen::Index nodes_per_period) {
  const HarrisConstants hc = harris_constants(k.lambda_min, k.lambda_max, k.period);
  const double a = 0.5 * k.lambda_min;
  const auto f = [a](double u) { return std::exp(a * u); };
  const ForwardTransition op(k, phase, nodes_per_period);
  const Eigen::VectorXd pf = op.apply(f, u_max);
  LyapunovCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pf.size(); ++i) {
    const double u = op.step() * static_cast<double>(i);
    out.worst_margin = std::min(out.worst_margin, hc.gamma * f(u) + hc.kappa - pf[i]);
  }
  out.holds = out.worst_margin >= 0.0;
  return out;
}

HarrisConstants harris_constants(double lambda_min, double lambda_max, double period) {
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min) || !(period > 0.0)) {
    throw DomainError("harris_constants needs 0 < lambda_min <= lambda_max and T > 0");
  }
  HarrisConstants hc;
  hc.beta = period * lambda_min * std::exp(-period * lambda_max);
  hc.c = -std::log(hc.beta) / period;
  hc.C = 2.0 * std::exp(hc.c * period);
  hc.gamma = std::exp(-0.5 * lambda_min * period);
  const double ratio = lambda_max / lambda_min;
  hc.kappa = 2.0 * (ratio + ratio * ratio);
  hc.alpha = ratio > 0.0 ? std::exp(-lambda_max * period) / ratio : 0.0;
  hc.doeblin_beta = hc.beta;
  const double threshold = 2.0 * std::log(8.0 * hc.kappa) / lambda_min;
  auto large = [&](double len) { return std::exp(-0.5 * lambda_min * len) <= 0.5 && len > threshold; };
  hc.large_period = large(period);
  while (!large(hc.period_multiple * period)) ++hc.period_multiple;
  return hc;
}

}  // namespace renewal

#include "renewal/phasechain.hpp"

#include <cmath>
#include <string>

#include "renewal/errors.hpp"

namespace renewal {

namespace {

// Σ_{p < P} f(t_i + pT, s_j), dropping the p = 0 term when t_i < s_j. The sum
// stops early once the geometric bound H_{p+1} <= e^{-λ_min T} H_p guarantees
// the remaining tail is below 1e-3 tail_tol.
Eigen::MatrixXd fold(const KernelHandle& k, const CircleGrid& grid, int periods, double tail_tol,
                     bool with_hazard) {
  const Eigen::Index m = grid.m;
  const double q = std::exp(-k.lambda_min * grid.period);
  const double cutoff = 1e-3 * tail_tol * (1.0 - q) / std::max(1.0, k.lambda_max);
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = grid.node(j);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = grid.node(i);
      double acc = 0.0;
      for (int p = (i < j ? 1 : 0); p < periods; ++p) {
        const double tp = t + p * grid.period;
        const double h = survival(k, tp, s);
        acc += with_hazard ? k.hazard(tp, s) * h : h;
        if (h < cutoff) break;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Eigen::MatrixXd quadrature_operator(const CircleGrid& grid, const Eigen::MatrixXd& values,
                                    const Eigen::VectorXd& jump) {
  const Eigen::Index m = grid.m;
  if (m < 8) throw DomainError("circle grid needs at least 8 nodes");
  const Eigen::VectorXd w = gregory_weights(m);
  const double h = grid.step();
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index d = ((i - j) % m + m) % m;
      a(i, j) = h * w[d] * values(i, j);
    }
    // Both ends of the unrolled interval sit on the diagonal node.
    a(j, j) = h * ((w[0] + w[m]) * values(j, j) - w[m] * jump[j]);
  }
  return a;
}

}  // namespace

Eigen::MatrixXd FoldedKernel::operator_matrix() const {
  return quadrature_operator(grid, values, diagonal_jump);
}

Eigen::VectorXd FoldedKernel::column_mass() const {
  return operator_matrix().colwise().sum().transpose();
}

int fold_periods(const KernelHandle& k, double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("tail_tol must lie in (0, 1)");
  return static_cast<int>(std::ceil(-std::log(tail_tol) / (k.lambda_min * k.period)));
}

FoldedKernel fold_kernel(const KernelHandle& k, const CircleGrid& grid, double tail_tol) {
  FoldedKernel fk;
  fk.grid = grid;
  fk.tail_tol = tail_tol;
  fk.periods = fold_periods(k, tail_tol);
  fk.values = fold(k, grid, fk.periods, tail_tol, true);
  fk.diagonal_jump.resize(grid.m);
  for (Eigen::Index j = 0; j < grid.m; ++j) {
    fk.diagonal_jump[j] = k.hazard(grid.node(j), grid.node(j));
  }
  return fk;
}

FoldedKernel fold_survival(const KernelHandle& k, const CircleGrid& grid, double tail_tol) {
  FoldedKernel fk;
  fk.grid = grid;
  fk.tail_tol = tail_tol;
  fk.periods = fold_periods(k, tail_tol);
  fk.values = fold(k, grid, fk.periods, tail_tol, false);
  fk.diagonal_jump = Eigen::VectorXd::Ones(grid.m);
  return fk;
}

StationaryPhase stationary_phase(const FoldedKernel& fk, double tol, int max_iter) {
  const Eigen::MatrixXd a = fk.operator_matrix();
  const double h = fk.grid.step();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(fk.grid.m, 1.0 / fk.grid.period);
  StationaryPhase out;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd next = a * pi;
    const double mass = h * next.sum();
    next /= mass;
    out.residual = h * (next - pi).cwiseAbs().sum();
    out.column_defect = std::abs(mass - 1.0);
    pi.swap(next);
    out.iterations = it;
    if (out.residual <= tol) {
      out.pi = {fk.grid, pi};
      return out;
    }
  }
  throw ConvergenceError("stationary_phase: no convergence after " + std::to_string(max_iter) +
                             " iterations (residual " + std::to_string(out.residual) + ")",
                         out.residual);
}

RateFunction rho_from_phase(const PhaseField& pi, const KernelHandle& k, double tail_tol,
                            double consistency_tol) {
  const FoldedKernel fh = fold_survival(k, pi.grid, tail_tol);
  const Eigen::VectorXd integral = fh.operator_matrix() * pi.values;
  RateFunction out;
  out.normalization = integral.cwiseInverse();
  out.c = out.normalization.mean();
  out.spread = (out.normalization.maxCoeff() - out.normalization.minCoeff()) / out.c;
  out.rho = {pi.grid, out.c * pi.values};
  if (out.spread > 100.0 * consistency_tol) {
    throw InconsistencyError("rho_from_phase: normalization spread " +
                             std::to_string(out.spread) + " across nodes");
  }
  return out;
}

MeanDelta mean_delta(const PhaseField& pi, const KernelHandle& k, int cap) {
  const double T = k.period;
  const double q = std::exp(-k.lambda_min * T);
  if (cap <= 0) {
    cap = 1;
    while (std::exp(k.lambda_min * T) * std::pow(q, cap + 1) * (cap + 1) / ((1 - q) * (1 - q)) >
           1e-15) {
      ++cap;
    }
  }
  const Eigen::Index m = pi.grid.m;
  Eigen::VectorXd g(m + 1);
  for (Eigen::Index j = 0; j <= m; ++j) {
    const double phi = pi.grid.node(j);  // node m is φ = T, the far end of [0, T]
    double acc = 0.0;
    for (int i = 1; i <= cap; ++i) {
      acc += i * (survival(k, i * T, phi) - survival(k, (i + 1) * T, phi));
    }
    g[j] = acc * pi.values[j % m];
  }
  MeanDelta out;
  out.beta = integrate_uniform(g, pi.grid.step());
  const double n = cap;
  out.tail_bound = std::exp(k.lambda_min * T) * std::pow(q, n + 1) * ((n + 1) - n * q) /
                   ((1 - q) * (1 - q));
  return out;
}

RhoResidual residual_rho(const PhaseField& rho, const KernelHandle& k, double tail_tol) {
  const Eigen::VectorXd image = fold_kernel(k, rho.grid, tail_tol).operator_matrix() * rho.values;
  const Eigen::VectorXd norm = fold_survival(k, rho.grid, tail_tol).operator_matrix() * rho.values;
  return {(rho.values - image).cwiseAbs().maxCoeff(), (norm.array() - 1.0).abs().maxCoeff()};
}

PhaseChainSolution solve_phase_chain(const KernelHandle& k, Eigen::Index m, double tail_tol,
                                     double tol, int max_iter) {
  PhaseChainSolution out;
  out.folded = fold_kernel(k, CircleGrid{k.period, m}, tail_tol);
  out.stationary = stationary_phase(out.folded, tol, max_iter);
  out.rate = rho_from_phase(out.stationary.pi, k, tail_tol);
  out.delta = mean_delta(out.stationary.pi, k);
  return out;
}

}  // namespace renewal

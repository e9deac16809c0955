#include <cmath>
#include <numbers>

#include "doctest.h"
#include "renewal/phasechain.hpp"
#include "renewal/quadrature.hpp"
#include "renewal/simulate.hpp"
#include "support.hpp"

using namespace renewal;

TEST_CASE("folded constant kernel is a geometric series") {
  const KernelHandle k = make_constant(1.0, 1.0);
  const CircleGrid grid{1.0, 64};
  const FoldedKernel fk = fold_kernel(k, grid, 1e-12);
  const double norm = 1.0 / (1.0 - std::exp(-1.0));
  CHECK(fk.values(5, 5) == doctest::Approx(1.58198).epsilon(1e-5));
  for (Eigen::Index i = 0; i < grid.m; ++i) {
    for (Eigen::Index j = 0; j < grid.m; ++j) {
      const double d = wrap_phase(grid.node(i) - grid.node(j), 1.0);
      REQUIRE(std::abs(fk.values(i, j) - std::exp(-d) * norm) <= 1e-11);
    }
  }
}

TEST_CASE("folded kernel columns are probability densities") {
  // Gregory quadrature error is O(h^4): about 2e-10 at m = 256, below the
  // truncation budget 2 tail_tol only from m = 1024.
  for (const KernelHandle& k : test::builtins()) {
    const FoldedKernel fk = fold_kernel(k, CircleGrid{k.period, 1024}, 1e-12);
    const Eigen::VectorXd mass = fk.column_mass();
    CHECK_MESSAGE((mass.array() - 1.0).abs().maxCoeff() <= 2e-12, k.name);
    // First summand alone gives K(t, s) >= λ_min e^{-λ_max T}.
    CHECK(fk.min_entry() >= k.lambda_min * std::exp(-k.lambda_max * k.period));
  }
}

TEST_CASE("power iteration contracts in L1") {
  const KernelHandle k = make_age_time(0.5, 1.0, 1.0, 1.0);
  const FoldedKernel fk = fold_kernel(k, CircleGrid{1.0, 128}, 1e-12);
  const Eigen::MatrixXd op = fk.operator_matrix();
  const double h = fk.grid.step();
  Eigen::VectorXd a = Eigen::VectorXd::Ones(128);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(128);
  b.head(32).setConstant(4.0);
  const double delta = fk.min_entry();
  double dist = h * (a - b).cwiseAbs().sum();
  for (int n = 0; n < 5; ++n) {
    a = op * a;
    b = op * b;
    const double next = h * (a - b).cwiseAbs().sum();
    CHECK(next <= (1.0 - delta * k.period) * dist + 1e-12);
    dist = next;
  }
}

TEST_CASE("stationary phase of the constant kernel is uniform") {
  const PhaseChainSolution sol = solve_phase_chain(make_constant(1.0, 1.0), 256);
  CHECK((sol.stationary.pi.values.array() - 1.0).abs().maxCoeff() <= 1e-10);
  CHECK(sol.stationary.residual <= 1e-12);
  CHECK((sol.rate.rho.values.array() - 1.0).abs().maxCoeff() <= 1e-8);
  CHECK(sol.delta.beta == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("stationary phase is a probability density for every builtin") {
  for (const KernelHandle& k : test::builtins()) {
    const PhaseChainSolution sol = solve_phase_chain(k, 128);
    CHECK(sol.stationary.pi.values.minCoeff() >= 0.0);
    CHECK(sol.stationary.pi.integral() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.rate.rho.values.minCoeff() >= k.lambda_min - 1e-9);
    CHECK(sol.rate.rho.values.maxCoeff() <= k.lambda_max + 1e-9);
    CHECK(sol.delta.beta * sol.rate.rho.integral() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("time-modulated rate equals the hazard") {
  const KernelHandle k = make_time_modulated(1.0, 0.5, 1.0);
  const PhaseChainSolution sol = solve_phase_chain(k, 512);
  double err = 0.0;
  for (Eigen::Index i = 0; i < 512; ++i) {
    const double t = sol.rate.rho.grid.node(i);
    err = std::max(err, std::abs(sol.rate.rho.values[i] - (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * t))));
    // π ∝ λ with factor β.
    CHECK(sol.stationary.pi.values[i] == doctest::Approx(sol.delta.beta * sol.rate.rho.values[i]).epsilon(1e-6));
  }
  CHECK(err <= 1e-4);
}

TEST_CASE("mean number of periods crossed") {
  CHECK(solve_phase_chain(make_constant(0.5, 1.0), 256).delta.beta == doctest::Approx(2.0).epsilon(1e-3 / 2.0));
}

TEST_CASE("rho residuals") {
  const KernelHandle c = make_constant(1.0, 1.0);
  PhaseField rho{CircleGrid{1.0, 256}, Eigen::VectorXd::Ones(256)};
  const RhoResidual exact = residual_rho(rho, c, 1e-12);
  CHECK(exact.equation <= 1e-8);
  CHECK(exact.normalization <= 1e-8);
  rho.values[17] += 0.1;
  CHECK(residual_rho(rho, c, 1e-12).equation >= 0.05);

  const KernelHandle tm = make_time_modulated(1.0, 0.5, 1.0);
  PhaseField lam{CircleGrid{1.0, 512}, Eigen::VectorXd(512)};
  for (Eigen::Index i = 0; i < 512; ++i) lam.values[i] = hazard(tm, lam.grid.node(i), 0.0);
  const RhoResidual r = residual_rho(lam, tm, 1e-12);
  CHECK(r.equation <= 1e-4);
  CHECK(r.normalization <= 1e-4);
}

TEST_CASE("simulated arrival phases follow the stationary phase law") {
  const KernelHandle k = make_age_time(0.5, 1.0, 1.0, 1.0);
  const PhaseChainSolution sol = solve_phase_chain(k, 256);
  RngStream rng(3, 0);
  const EventPath path = simulate_path(k, 0.0, 2.5e5, rng);
  const int bins = 16;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  std::size_t used = 0;
  for (std::size_t j = 100; j < path.arrivals.size() && used < 100000; ++j, ++used) {
    counts[std::min(bins - 1, static_cast<int>(wrap_phase(path.arrivals[j], 1.0) * bins))] += 1.0;
  }
  REQUIRE(used == 100000);
  double tv = 0.0;
  const Eigen::Index per_bin = 256 / bins;
  for (int b = 0; b < bins; ++b) {
    const double exact = sol.stationary.pi.values.segment(b * per_bin, per_bin).sum() / 256.0;
    tv += std::abs(counts[b] / 100000.0 - exact);
  }
  CHECK(tv <= 0.03);
}

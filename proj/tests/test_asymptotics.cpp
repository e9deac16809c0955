#include <cmath>
#include <random>

#include "doctest.h"
#include "renewal/asymptotics.hpp"
#include "renewal/config.hpp"
#include "renewal/pipeline.hpp"
#include "renewal/quadrature.hpp"
#include "renewal/simulate.hpp"
#include "support.hpp"

using namespace renewal;

namespace {

struct Fixture {
  KernelHandle k;
  PhaseChainSolution chain;
  explicit Fixture(KernelHandle kernel) : k(std::move(kernel)), chain(solve_phase_chain(k, 256)) {}
  const PhaseField& rho() const { return chain.rate.rho; }
};

LimitLaw law_from(LimitKind kind, double phase, double step, Eigen::VectorXd nodes) {
  LimitLaw law;
  law.kind = kind;
  law.phase = phase;
  law.step = step;
  law.law = HalfLineDistribution::from_nodes(step, nodes);
  law.density = std::move(nodes);
  return law;
}

}  // namespace

TEST_CASE("constant kernel: both limit laws are Exp(1)") {
  const Fixture f(make_constant(1.0, 1.0));
  for (double phi : {0.0, 0.4, 3.9}) {
    const LimitLaw nu = nu_infty(f.rho(), f.k, phi, 20.0, 0.01);
    const LimitLaw mu = mu_infty(f.rho(), f.k, phi, 20.0, 0.01);
    for (Eigen::Index i = 0; i < nu.density.size(); ++i) {
      REQUIRE(std::abs(nu.density[i] - std::exp(-0.01 * i)) <= 1e-8);
      REQUIRE(std::abs(mu.density[i] - std::exp(-0.01 * i)) <= 1e-8);
    }
  }
}

TEST_CASE("limit laws are periodic probability measures") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const KernelHandle& k : test::builtins()) {
    const Fixture f(k);
    const double u_max = limit_u_max(k);
    for (int n = 0; n < 4; ++n) {
      const double phi = unif(gen);
      const LimitLaw nu = nu_infty(f.rho(), k, phi, u_max, 0.01);
      const LimitLaw mu = mu_infty(f.rho(), k, phi, u_max, 0.01);
      CHECK_MESSAGE(std::abs(nu.mass() - 1.0) <= 1e-6 + nu.tail_bound, k.name);
      CHECK_MESSAGE(std::abs(mu.mass() - 1.0) <= 1e-6 + mu.tail_bound, k.name);
      const LimitLaw nu2 = nu_infty(f.rho(), k, phi + k.period, u_max, 0.01);
      CHECK((nu.density - nu2.density).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("time-modulated forward limit law in closed form") {
  const Fixture f(make_time_modulated(1.0, 0.5, 1.0));
  for (double phi : {0.0, 0.3, 0.8}) {
    const LimitLaw mu = mu_infty(f.rho(), f.k, phi, 15.0, 0.01);
    double err = 0.0;
    for (Eigen::Index i = 0; i < mu.density.size(); ++i) {
      err = std::max(err, std::abs(mu.density[i] - density(f.k, phi + 0.01 * i, phi)));
    }
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("classical renewal kernel: stationary forward recurrence density") {
  const Fixture f(make_age_only(0.5, 1.5, 1.0));
  // m̃ = ∫ H̃ by Simpson on a long interval.
  const int n = 100000;
  const double U = 60.0;
  const double h = U / n;
  double acc = 1.0 + survival(f.k, U, 0.0);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * survival(f.k, i * h, 0.0);
  const double mean_gap = acc * h / 3.0;
  const LimitLaw mu = mu_infty(f.rho(), f.k, 0.2, 20.0, 0.01);
  double err = 0.0;
  for (Eigen::Index i = 0; i < mu.density.size(); ++i) {
    err = std::max(err, std::abs(mu.density[i] - survival(f.k, 0.01 * i, 0.0) / mean_gap));
  }
  CHECK(err <= 1e-3);
}

TEST_CASE("joint limits") {
  const Fixture c(make_constant(1.0, 1.0));
  const JointLimits jc = joint_limits(c.rho(), c.k, 10.0, 0.05, 8);
  for (Eigen::Index i = 0; i < jc.nu.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) REQUIRE(std::abs(jc.nu.values(i, j) - std::exp(-0.05 * i)) <= 1e-8);
  }
  const Fixture f(make_age_time(0.5, 1.0, 1.0, 1.0));
  const JointLimits jl = joint_limits(f.rho(), f.k, 10.0, 0.05, 8);
  for (Eigen::Index j = 0; j < 8; ++j) {
    const double phi = jl.nu.phases.node(j);
    // Slice identities: T ν̃(u, φ) = ν^{φ+u}(u) and T μ̃(u, φ) = μ^{φ-u}(u).
    for (Eigen::Index i = 10; i < jl.nu.values.rows(); i += 20) {
      const double u = 0.05 * static_cast<double>(i);
      const double nu = nu_infty(f.rho(), f.k, phi + u, 2.0 * u, u).density[1];
      const double mu = mu_infty(f.rho(), f.k, phi - u, 2.0 * u, u).density[1];
      CHECK(std::abs(jl.nu.values(i, j) * f.k.period - nu) <= 1e-6);
      CHECK(std::abs(jl.mu.values(i, j) * f.k.period - mu) <= 1e-6);
    }
  }
}

TEST_CASE("forward PDMP occupation matches the joint forward limit") {
  const Fixture f(make_age_time(0.5, 1.0, 1.0, 1.0));
  RngStream rng(8, 0);
  const double first = sample_next_arrival(f.k, 0.0, rng);
  const PdmpTrajectory traj = simulate_forward_pdmp(f.k, {first, first}, 1e5, rng);
  const OccupationHistogram occ = occupation_histogram(traj, 8.0, 16, 8, 20.0);
  const Eigen::MatrixXd exact = joint_cell_masses(LimitKind::forward, f.rho(), f.k, 8.0, 16, 8);
  CHECK(occupation_tv(occ, exact) <= 0.05);
}

TEST_CASE("post-jump pairs of the forward PDMP follow K(φ, φ - u) π(φ - u)") {
  const Fixture f(make_age_time(0.5, 1.0, 1.0, 1.0));
  RngStream rng(9, 0);
  const PdmpTrajectory traj = simulate_forward_pdmp(f.k, {0.5, 0.5}, 2e5, rng);
  const int nu_bins = 8;
  const int np_bins = 8;
  const double u_max = 8.0;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(nu_bins, np_bins);
  double total = 0.0;
  // After a jump the state is (u, φ): the next event comes u later, at phase φ.
  for (std::size_t j = 100; j + 1 < traj.samples.size() && total < 1e5; ++j) {
    const PdmpSample& s = traj.samples[j];
    total += 1.0;
    if (s.value >= u_max) continue;
    counts(static_cast<int>(s.value / u_max * nu_bins), std::min(np_bins - 1, static_cast<int>(s.phase * np_bins))) += 1.0;
  }
  const PeriodicInterpolant pi = f.chain.stationary.pi.interpolant();
  const GaussLegendre gl(6);
  double tv = 0.0;
  double inside = 0.0;
  for (int a = 0; a < nu_bins; ++a) {
    for (int b = 0; b < np_bins; ++b) {
      double cell = 0.0;
      const double du = u_max / nu_bins;
      const double dp = 1.0 / np_bins;
      for (Eigen::Index p = 0; p < gl.nodes.size(); ++p) {
        for (Eigen::Index q = 0; q < gl.nodes.size(); ++q) {
          const double u = du * (a + 0.5 * (gl.nodes[p] + 1.0));
          const double phi = dp * (b + 0.5 * (gl.nodes[q] + 1.0));
          cell += 0.25 * gl.weights[p] * gl.weights[q] * density(f.k, phi, phi - u) * pi(phi - u);
        }
      }
      cell *= du * dp;
      inside += cell;
      tv += std::abs(counts(a, b) / total - cell);
    }
  }
  tv += std::abs((total - counts.sum()) / total - (1.0 - inside));
  CHECK(tv <= 0.05);
}

TEST_CASE("forward transition operator") {
  for (const KernelHandle& k : test::builtins()) {
    const Eigen::VectorXd one = forward_transition(k, 0.3, [](double) { return 1.0; }, 5.0);
    CHECK_MESSAGE((one.array() - 1.0).abs().maxCoeff() <= 1e-6, k.name);
  }
  const KernelHandle c = make_constant(1.0, 1.0);
  const ForwardTransition op(c, 0.0);
  auto g = [](double u) { return u / (1.0 + u); };
  const Eigen::VectorXd pg = op.apply(g, 5.0);
  for (Eigen::Index i = 0; i < pg.size(); ++i) {
    const double u = op.step() * static_cast<double>(i);
    if (u > 1.0 + 1e-12) REQUIRE(pg[i] == g(u - 1.0));
  }
  for (const KernelHandle& k : test::builtins()) CHECK_MESSAGE(lyapunov_check(k, 0.3, 10.0).holds, k.name);
}

TEST_CASE("invariance of the forward limit law") {
  for (const KernelHandle& k : test::builtins()) {
    const Fixture f(k);
    const LimitLaw mu = mu_infty(f.rho(), k, 0.4, limit_u_max(k), 0.01);
    CHECK_MESSAGE(invariance_residual_forward(mu, k) <= 1e-4, k.name);
  }
  const KernelHandle tm = make_time_modulated(1.0, 0.5, 1.0);
  Eigen::VectorXd fast(4001);
  for (Eigen::Index i = 0; i <= 4000; ++i) fast[i] = 1.5 * std::exp(-1.5 * 0.01 * i);
  CHECK(invariance_residual_forward(law_from(LimitKind::forward, 0.4, 0.01, fast), tm) >= 0.01);
  const KernelHandle c = make_constant(1.0, 1.0);
  Eigen::VectorXd expo(4001);
  for (Eigen::Index i = 0; i <= 4000; ++i) expo[i] = std::exp(-0.01 * i);
  CHECK(invariance_residual_forward(law_from(LimitKind::forward, 0.0, 0.01, expo), c) <= 1e-8);
}

TEST_CASE("three identities of the forward limit law") {
  for (const KernelHandle& k : test::builtins()) {
    const Fixture f(k);
    CHECK_MESSAGE(identity_checks(f.rho(), k, 0.2).max() <= 1e-4, k.name);
  }
  const Fixture c(make_constant(1.0, 1.0));
  CHECK(identity_checks(c.rho(), c.k, 0.0).difference <= 1e-8);
  const Fixture f(make_age_time(0.5, 1.0, 1.0, 1.0));
  PhaseField bad = f.rho();
  perturb_rho(bad);
  CHECK(identity_checks(bad, f.k, 0.2).max() >= 1e-3);
}

TEST_CASE("rate recovered from the backward limit law") {
  for (const KernelHandle& k : test::builtins()) {
    const Fixture f(k);
    const PeriodicInterpolant rho_at = f.rho().interpolant();
    for (double phi : {0.1, 0.65}) {
      const LimitLaw nu = nu_infty(f.rho(), k, phi, limit_u_max(k), 0.005);
      Eigen::VectorXd integrand(nu.density.size());
      for (Eigen::Index i = 0; i < integrand.size(); ++i) {
        integrand[i] = hazard(k, phi, phi - nu.step * i) * nu.density[i];
      }
      CHECK_MESSAGE(integrate_uniform(integrand, nu.step) == doctest::Approx(rho_at(phi)).epsilon(1e-4), k.name);
    }
  }
}

TEST_CASE("Harris constants") {
  const HarrisConstants h = harris_constants(0.5, 1.5, 1.0);
  CHECK(h.beta == doctest::Approx(0.111565).epsilon(1e-5));
  CHECK(h.c == doctest::Approx(2.19315).epsilon(1e-5));
  CHECK(h.C == doctest::Approx(17.9268).epsilon(1e-5));
  CHECK(h.C == doctest::Approx(2.0 / h.beta).epsilon(1e-12));
  CHECK(h.gamma == doctest::Approx(0.778801).epsilon(1e-5));
  CHECK(h.kappa == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(h.alpha == doctest::Approx(0.0743767).epsilon(1e-5));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif(0.01, 10.0);
  for (int n = 0; n < 1000; ++n) {
    const double lo = unif(gen);
    const double hi = lo + unif(gen);
    const double T = unif(gen);
    const HarrisConstants r = harris_constants(lo, hi, T);
    REQUIRE(r.beta > 0.0);
    REQUIRE(r.beta < 1.0);
    REQUIRE(r.c > 0.0);
    REQUIRE(r.gamma < 1.0);
    REQUIRE(std::isfinite(r.C));
  }
}

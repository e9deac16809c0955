#include <cmath>
#include <numbers>

#include "doctest.h"
#include "renewal/asymptotics.hpp"
#include "renewal/config.hpp"
#include "renewal/errors.hpp"
#include "renewal/metrics.hpp"
#include "renewal/simulate.hpp"
#include "renewal/volterra.hpp"
#include "support.hpp"

using namespace renewal;

namespace {

double sup_error(const RenewalSolution& sol, double (*exact)(double)) {
  double err = 0.0;
  for (Eigen::Index j = 1; j < sol.nodes(); ++j) err = std::max(err, std::abs(sol.r[j] - exact(sol.time(j))));
  return err;
}

InitialLaw stationary_age(const PhaseField& rho, const KernelHandle& k, double phase, double h_u) {
  const LimitLaw nu = nu_infty(rho, k, phase, limit_u_max(k), h_u);
  return InitialLaw::gridded(nu.step, nu.density);
}

}  // namespace

TEST_CASE("mixed survival") {
  const KernelHandle tm = make_time_modulated(1.0, 0.5, 1.0);
  const KernelHandle c = make_constant(1.0, 1.0);
  Eigen::VectorXd dens(101);
  for (Eigen::Index i = 0; i <= 100; ++i) dens[i] = 1.0 + 0.01 * static_cast<double>(i);
  const InitialLaw spread = InitialLaw::gridded(0.05, dens);
  for (double t : {0.3, 1.0, 2.7}) {
    CHECK(mixed_survival(tm, InitialLaw::dirac(0.0), t, 0.0) == doctest::Approx(survival(tm, t, 0.0)).epsilon(1e-14));
    CHECK(mixed_survival(c, spread, t + 0.2, 0.2) == doctest::Approx(std::exp(-t)).epsilon(1e-10));
    const double x = 0.8;
    const double direct = survival(tm, t + 0.2, 0.2 - x) / survival(tm, 0.2, 0.2 - x);
    CHECK(std::abs(mixed_survival(tm, InitialLaw::dirac(x), t + 0.2, 0.2) - direct) <= 1e-10);
  }
}

TEST_CASE("constant kernel: renewal density is one") {
  const RenewalSolution sol = solve_renewal(make_constant(1.0, 1.0), InitialLaw::dirac(0.0), 0.0, 5.0, 1e-3);
  CHECK(sup_error(sol, [](double) { return 1.0; }) <= 1e-6);
  CHECK(expected_count(solve_renewal(make_constant(1.0, 1.0), InitialLaw::dirac(0.0), 0.0, 10.0, 1e-3), 0.0, 10.0) ==
        doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("time-modulated kernel: renewal density is the hazard") {
  const RenewalSolution sol =
      solve_renewal(make_time_modulated(1.0, 0.5, 1.0), InitialLaw::dirac(0.0), 0.0, 3.0, 1e-3);
  CHECK(sup_error(sol, [](double t) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * t); }) <= 1e-4);
}

TEST_CASE("self-consistency and bounds of r") {
  for (const KernelHandle& k : test::builtins()) {
    const double h = 0.01;
    const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), 0.0, 4.0, h);
    CHECK_MESSAGE(volterra_residual(sol) <= 5.0 * h * h, k.name);
    CHECK(sol.r.minCoeff() > 0.0);
    CHECK(sol.r.maxCoeff() <= k.lambda_max * (1.0 + 1e-3));
    for (Eigen::Index j = 0; sol.time(j) <= k.period; ++j) {
      CHECK(sol.r[j] >= k.lambda_min * std::exp(-k.lambda_max * k.period));
    }
  }
}

TEST_CASE("invalid solver settings") {
  const KernelHandle k = make_constant(1.0, 1.0);
  CHECK_THROWS_AS(solve_renewal(k, InitialLaw::dirac(0.0), 0.0, 1.0, 0.1), ConfigError);
  const RenewalSolution plain = solve_renewal(k, InitialLaw::dirac(0.0), 0.0, 1.0, 0.01);
  CHECK_THROWS_AS(backward_distance(plain, 1.0), ConfigError);
  CHECK_THROWS_AS(plain.index_of(0.505), DomainError);
}

TEST_CASE("backward law of the constant kernel") {
  const RenewalSolution sol = solve_renewal(make_constant(1.0, 1.0), InitialLaw::dirac(0.0), 0.0, 3.0, 1e-3, 1);
  const HalfLineDistribution law = law_backward(sol, 3.0);
  REQUIRE(law.atoms().size() == 1);
  CHECK(law.atoms()[0].location == doctest::Approx(3.0));
  CHECK(law.atoms()[0].mass == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
  for (double th : {0.1, 1.0, 2.5}) CHECK(law.density(th) == doctest::Approx(std::exp(-th)).epsilon(1e-6));
  CHECK(std::abs(law.mass() - 1.0) <= 1e-8);
}

TEST_CASE("backward and forward laws carry unit mass") {
  for (const KernelHandle& k : test::builtins()) {
    const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), 0.0, 4.0, 0.005, 1);
    CHECK_MESSAGE(std::abs(law_backward(sol, 4.0).mass() - 1.0) <= 1e-6, k.name);
    const HalfLineDistribution fwd = law_forward(sol, 4.0, limit_u_max(k), 0.01);
    CHECK_MESSAGE(std::abs(fwd.mass() - 1.0) <= 1e-6, k.name);
  }
}

TEST_CASE("forward law of the constant kernel is Exp(1)") {
  const RenewalSolution sol = solve_renewal(make_constant(1.0, 1.0), InitialLaw::dirac(0.0), 0.0, 2.0, 0.005, 1);
  const HalfLineDistribution law = law_forward(sol, 2.0, 20.0, 0.002);
  for (double x : {0.0, 0.5, 3.0, 10.0}) CHECK(law.density(x) == doctest::Approx(std::exp(-x)).epsilon(1e-6));
}

TEST_CASE("forward law at ten periods is close to the limit law") {
  const KernelHandle k = make_time_modulated(1.0, 0.5, 1.0);
  const PhaseChainSolution chain = solve_phase_chain(k, 256);
  const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), 0.0, 10.0, 0.005, chain.rate.rho, 1);
  const HalfLineDistribution law = law_forward(sol, 10.0, 30.0, 0.01);
  const LimitLaw mu = mu_infty(chain.rate.rho, k, 10.0, 30.0, 0.01);
  double err = 0.0;
  for (Eigen::Index i = 0; i < mu.density.size(); ++i) err = std::max(err, std::abs(law.density(0.01 * i) - mu.density[i]));
  CHECK(err <= 1e-3);
}

TEST_CASE("Monte-Carlo cross-checks of the Volterra solution") {
  const KernelHandle k = make_age_time(0.5, 1.0, 1.0, 1.0);
  const double t = 5.0;
  const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), 0.0, t, 0.005, 1);
  std::vector<double> xs;
  double count = 0.0;
  double count_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    RngStream rng(31, static_cast<std::uint64_t>(i));
    const Recurrence r = recurrence_at(simulate_path(k, 0.0, t, rng), t);
    xs.push_back(r.forward);
    count += static_cast<double>(r.count);
    count_sq += static_cast<double>(r.count * r.count);
  }
  const double mean = count / n;
  const double sigma = std::sqrt((count_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - expected_count(sol, 0.0, t)) <= 3.0 * sigma);
  const HalfLineDistribution emp = empirical_distribution(xs, 0.2, 10.0);
  CHECK(binned_tv(emp, law_forward(sol, t, 30.0, 0.01), 0.2, 10.0) <= 0.02);
}

TEST_CASE("stationary initial age keeps the rate stationary") {
  const KernelHandle k = make_age_time(0.5, 1.0, 1.0, 1.0);
  const PhaseChainSolution chain = solve_phase_chain(k, 256);
  const PhaseField& rho = chain.rate.rho;
  const double s = 0.25;
  const InitialLaw nu = stationary_age(rho, k, s, 0.01);
  const RenewalSolution sol = solve_renewal(k, nu, s, s + 5.0, 0.005, 1);
  const PeriodicInterpolant rho_at = rho.interpolant();
  double err = 0.0;
  for (Eigen::Index j = 0; j < sol.nodes(); ++j) err = std::max(err, std::abs(sol.r[j] - rho_at(sol.time(j))));
  CHECK(err <= 1e-4);
  for (int n = 1; n <= 5; ++n) {
    const double t = s + n * k.period;
    const HalfLineDistribution law = law_backward(sol, t);
    const LimitLaw limit = nu_infty(rho, k, t, 20.0, 0.01);
    double sup = 0.0;
    for (Eigen::Index i = 0; i < limit.density.size(); ++i) {
      sup = std::max(sup, std::abs(law.density(0.01 * i) - limit.density[i]));
    }
    CHECK_MESSAGE(sup <= 1e-4, "n=" << n);
  }
}

TEST_CASE("explicit bound: expected-count gap") {
  for (const KernelHandle& k : test::builtins()) {
    const PhaseChainSolution chain = solve_phase_chain(k, 256);
    const RenewalSolution sol = solve_renewal(k, InitialLaw::dirac(0.0), 0.0, 6.0, 0.005, chain.rate.rho, 1);
    const HarrisConstants hc = harris_constants(k.lambda_min, k.lambda_max, k.period);
    for (int j = 0; j <= 5; ++j) {
      const double t = j * k.period;
      CHECK_MESSAGE(std::abs(expected_count_gap(sol, t, t + k.period)) <=
                        hc.C * k.lambda_max / hc.c * std::exp(-hc.c * t),
                    k.name << " t=" << t);
    }
  }
}

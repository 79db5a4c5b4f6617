#include <cmath>
#include <random>

#include <doctest.h>

#include "agesir/errors.hpp"
#include "agesir/finalsize.hpp"
#include "agesir/sampling.hpp"
#include "agesir/scenario.hpp"
#include "agesir/spectral.hpp"
#include "oracles.hpp"

using namespace agesir;

namespace {
EpidemicModel flat(std::size_t n, double beta, double i0, ModelChecks checks = ModelChecks::kStrict) {
  auto g = make_grid(1.0, n);
  return EpidemicModel(Kernel::from_function(g, [&](double, double) { return beta; }), AgeDensity::constant(g, 1.0),
                       AgeDensity::constant(g, 1.0), AgeDensity::constant(g, i0), checks);
}

EpidemicModel random_separable(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  auto g = make_grid(1.0, n);
  Eigen::VectorXd beta(n), mu(n), s0(n), i0(n);
  for (std::size_t k = 0; k < n; ++k) {
    beta[k] = u(rng);
    mu[k] = u(rng);
    s0[k] = u(rng);
    i0[k] = 1e-3 * u(rng);
  }
  Eigen::MatrixXd b = Eigen::VectorXd::Ones(n) * beta.transpose();
  return EpidemicModel(Kernel(g, b), AgeDensity(g, mu), AgeDensity(g, s0), AgeDensity(g, i0));
}

EpidemicModel random_general(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  auto g = make_grid(1.0, n);
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = u(rng);
  Eigen::VectorXd mu(n), s0(n), i0(n);
  for (std::size_t k = 0; k < n; ++k) {
    mu[k] = u(rng);
    s0[k] = u(rng);
    i0[k] = 1e-3 * u(rng);
  }
  return EpidemicModel(Kernel(g, b), AgeDensity(g, mu), AgeDensity(g, s0), AgeDensity(g, i0));
}
}  // namespace

TEST_CASE("no contagion leaves S0 - v") {
  auto g = make_grid(1.0, 9);
  const EpidemicModel m(Kernel::from_function(g, [](double, double) { return 0.0; }), AgeDensity::constant(g, 1.0),
                        AgeDensity::from_function(g, [](double x) { return 1 + x; }), AgeDensity::constant(g, 0.01),
                        ModelChecks::kRelaxed);
  const auto v = StaticAllocation::fraction_of_s0(m, 0.25);
  const auto sol = solve_final_size(m, v);
  CHECK((sol.s_inf - (m.s0() - v.v())).max_abs() < 1e-15);
  CHECK(objective_ivp(m, StaticAllocation::none(m)) == doctest::Approx(integrate(m.s0())));
}

TEST_CASE("homogeneous final size against the bisection oracle") {
  const auto m = flat(31, 2.0, 1e-4);
  const double s_star = oracle::homogeneous_final_size(2.0, 1e-4);
  const auto sol = solve_final_size(m, StaticAllocation::none(m));
  CHECK((sol.s_inf - AgeDensity::constant(m.grid(), s_star)).max_abs() < 1e-6);
  CHECK(sol.residual < 1e-12);
  CHECK(objective_ivp(m, StaticAllocation::none(m)) == doctest::Approx(s_star).epsilon(1e-6));

  const auto sep = solve_final_size_separable(m, StaticAllocation::none(m));
  CHECK(sep.summary.sigma0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sep.summary.eta == doctest::Approx(std::exp(-2e-4)).epsilon(1e-14));
  CHECK(sep.summary.sigma_inf == doctest::Approx(2 * s_star).epsilon(1e-10));
  CHECK((sep.solution.s_inf - sol.s_inf).max_abs() < 1e-8);
}

TEST_CASE("everyone vaccinated") {
  const auto m = flat(11, 2.0, 1e-4);
  const auto all = StaticAllocation::fraction_of_s0(m, 1.0);
  const auto sep = solve_final_size_separable(m, all);
  CHECK(sep.summary.sigma0 == 0.0);
  CHECK(sep.summary.sigma_inf == 0.0);
  CHECK(sep.solution.s_inf.max_abs() == 0.0);
  CHECK(objective_ivp(m, all) == doctest::Approx(integrate(m.s0())));
}

TEST_CASE("sigma0 is the quadrature of r (S0 - v)") {
  const auto cfg = separable_scenario();
  const auto m = build_model(cfg);
  const auto r = AgeDensity(m.grid(), m.separable_ratio().cwiseProduct(m.s0().values()));
  CHECK(std::abs(scalar_summary(m, StaticAllocation::none(m)).sigma0 - integrate(r)) < 1e-12);
  CHECK_THROWS_AS(solve_final_size_separable(build_model(reference_scenario(21)), StaticAllocation::none(build_model(reference_scenario(21)))),
                  PreconditionError);
}

TEST_CASE("sandwich brackets the solution and the map is monotone") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_general(12, rng);
    const auto v = random_allocation(m, 0.3 * integrate(m.s0()), rng);
    const auto sol = solve_final_size(m, v);
    CHECK((sol.lower.values().array() <= sol.s_inf.values().array() + 1e-15).all());
    CHECK((sol.s_inf.values().array() <= sol.upper.values().array() + 1e-15).all());
    CHECK((sol.upper - sol.lower).max_abs() <= 1e-12 * m.s0().max_abs() * 1.0001);
    CHECK((final_size_map(m, v, sol.s_inf) - sol.s_inf).max_abs() < 1e-11);

    const Eigen::VectorXd gap = m.s0().values() - v.values();
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::VectorXd a(12), b(12);
    for (int k = 0; k < 12; ++k) {
      a[k] = u(rng) * gap[k];
      b[k] = a[k] + u(rng) * (gap[k] - a[k]);
    }
    const auto fa = final_size_map(m, v, AgeDensity(m.grid(), a));
    const auto fb = final_size_map(m, v, AgeDensity(m.grid(), b));
    CHECK((fa.values().array() <= fb.values().array() + 1e-15).all());
  }
}

TEST_CASE("general and scalar solvers agree on separable kernels") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_separable(10, rng);
    const auto v = random_allocation(m, 0.4 * integrate(m.s0()) * trial / 20.0, rng);
    const auto general = solve_final_size(m, v);
    const auto sep = solve_final_size_separable(m, v);
    CHECK((general.s_inf - sep.solution.s_inf).max_abs() < 1e-8);
    const Eigen::VectorXd r = m.separable_ratio();
    CHECK(objective_ivp(m, v) == doctest::Approx(oracle::separable_survivors(r, m.s0().values(), m.i0().values(),
                                                                              v.values(), m.grid()->weights()))
                                     .epsilon(1e-10));
  }
}

TEST_CASE("sigma_inf is nonincreasing in sigma0 above 1") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(1.0, 6.0), e(0.5, 1.0);
  for (int k = 0; k < 200; ++k) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const double eta = e(rng);
    CHECK(scalar_final_sigma(a, eta) >= scalar_final_sigma(b, eta) - 1e-10);
  }
  const double s = scalar_final_sigma(2.0, std::exp(-2e-4));
  CHECK(s * std::exp(-s) == doctest::Approx(2.0 * std::exp(-2.0) * std::exp(-2e-4)).epsilon(1e-13));
  CHECK(s <= 1.0);
}

// U = -ln(S_inf / (S0 - v)) solves U = T(U) with
// T(W) = int beta/mu ((S0 - v)(1 - e^{-W}) + I0). T is concave, so stability
// of the final state makes U + c phi a supersolution (phi the post-epidemic
// Perron vector) and theta U a subsolution.
TEST_CASE("discrete comparison around the final state") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = random_general(20, rng);
    const auto v = random_allocation(m, 0.2 * integrate(m.s0()), rng);
    const auto sol = solve_final_size(m, v);
    const Eigen::VectorXd free = m.s0().values() - v.values();
    const Eigen::VectorXd u = -(sol.s_inf.values().array() / free.array()).log();
    auto T = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
      const Eigen::VectorXd src = free.array() * (1.0 - (-w.array()).exp()) + m.i0().values().array();
      return m.ratio_weighted() * src;
    };
    CHECK((T(u) - u).cwiseAbs().maxCoeff() < 1e-9);
    const auto post = post_epidemic_eigenvalue(m, sol.s_inf);
    REQUIRE(post.lambda1 > 0.0);
    for (double c : {1e-3, 1e-1, 1.0}) {
      const Eigen::VectorXd sup = u + c * post.phi1.values();
      CHECK((T(sup).array() <= sup.array() + 1e-12).all());
      CHECK((sup.array() >= u.array()).all());
    }
    for (double theta : {0.1, 0.5, 0.99}) {
      const Eigen::VectorXd sub = theta * u;
      CHECK((T(sub).array() >= sub.array() - 1e-12).all());
    }
  }
}

TEST_CASE("cap and stall are reported") {
  const auto m = flat(11, 2.0, 1e-4);
  FinalSizeOptions opts;
  opts.max_iter = 2;
  CHECK_THROWS_AS(solve_final_size(m, StaticAllocation::none(m), opts), NumericalError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gplab/errors.hpp"
#include "gplab/scattering.hpp"
#include "oracles.hpp"

using namespace gplab;
using std::numbers::pi;

TEST_CASE("barrier scattering length, closed form") {
  for (auto [v0, r] : {std::pair{1.0, 1.0}, std::pair{10.0, 0.5}, std::pair{0.1, 2.0}}) {
    const double exact = oracle::barrier_a0(v0, r);
    CHECK(barrier_scattering_length(v0, r) == doctest::Approx(exact).epsilon(1e-15));
    const auto sol = solve_zero_energy(PotentialModel::barrier(v0, r));
    CHECK(std::abs(sol.a0() - exact) < 1e-10 * exact);
  }
}

TEST_CASE("gaussian scattering length against an independent shooting oracle") {
  const auto v = PotentialModel::gaussian(2.0, 0.7);
  const auto ref = oracle::shoot_extrapolated([&](double r) { return v(r); }, v.cutoff_radius(), 20000);
  const auto sol = solve_zero_energy(v);
  CHECK(sol.a0() == doctest::Approx(ref.a0).epsilon(1e-9));
  const auto c = coupling_sigma(sol);
  CHECK(c.sigma == doctest::Approx(ref.sigma).epsilon(1e-8));
  CHECK(ref.sigma == doctest::Approx(8.0 * pi * ref.a0).epsilon(1e-8));
}

TEST_CASE("zero-energy solution far field and residual") {
  const auto v = PotentialModel::barrier(1.0, 1.0);
  const auto sol = solve_zero_energy(v);
  for (double r : {1.5, 2.0, 3.5}) CHECK(sol(r) == doctest::Approx(1.0 - sol.a0() / r).epsilon(1e-12));
  CHECK(sol.residual() < 1e-6);
  CHECK(sol.a0_error_estimate() < 1e-10);
  // f is increasing and below 1 for a repulsive potential
  const auto& f = sol.f_values();
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] >= f[i - 1] - 1e-14);
  CHECK(f.back() < 1.0);
}

TEST_CASE("jastrow factor is f(N r)") {
  const auto sol = solve_zero_energy(PotentialModel::gaussian(2.0, 0.7));
  const auto f10 = jastrow(sol, 10);
  for (double r : {0.0, 0.05, 0.2, 1.0}) CHECK(f10(r) == doctest::Approx(sol(10.0 * r)).epsilon(1e-14));
  CHECK_THROWS_AS(jastrow(sol, 0), DomainError);
}

TEST_CASE("sigma equals 8 pi a0 and the scaled integral agrees") {
  for (const auto& v : {PotentialModel::barrier(1.0, 1.0), PotentialModel::gaussian(5.0, 0.4)}) {
    const auto sol = solve_zero_energy(v);
    const auto c = coupling_sigma(sol, 25);
    CHECK(c.sigma / (8.0 * pi * sol.a0()) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(c.sigma_scaled == doctest::Approx(c.sigma).epsilon(1e-8));
    CHECK(c.n == 25);
  }
}

TEST_CASE("scattering length scales as 1/N") {
  const auto v = PotentialModel::gaussian(2.0, 0.7);
  const double a0 = solve_zero_energy(v).a0();
  for (long n : {3L, 10L, 100L}) {
    const auto sn = solve_zero_energy(scale_potential(v, n));
    CHECK(sn.a0() * n == doctest::Approx(a0).epsilon(1e-9));
  }
}

TEST_CASE("log-Laplacian bound constant is finite") {
  const auto sol = solve_zero_energy(PotentialModel::barrier(1.0, 1.0));
  const double c = nabla2_log_f_bound(sol);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
  CHECK(c < 10.0);
}

TEST_CASE("solver argument checks") {
  const auto v = PotentialModel::barrier(1.0, 1.0);
  CHECK_THROWS_AS(solve_zero_energy(v, 0.5), ConfigError);
  CHECK_THROWS_AS(solve_zero_energy(v, 4.0, -1.0), ConfigError);
  CHECK_THROWS_AS(solve_zero_energy(v, 4.0, 1e-10, 10), ConfigError);
  CHECK_THROWS_AS(solve_zero_energy(v)(-1.0), DomainError);
}

#include <doctest.h>

#include <cmath>

#include "gplab/errors.hpp"
#include "gplab/hierarchy.hpp"
#include "gplab/manybody.hpp"

using namespace gplab;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("dense and product collision operators agree") {
  const GridSpec g{1, 32, 12.0};
  const auto phi = gaussian_state(g, 1.0, {0.5, 0, 0}, {0.7, 0, 0});
  const auto pk = factorized_kernel(phi, 2);
  const auto dense = to_dense(pk);
  CHECK(max_abs(dense.matrix - projector(phi, 2).matrix) < 1e-15);

  const auto cd = collision_apply(dense, 0.3);
  const auto cp = collision_apply(pk, 0.3);
  CHECK(max_abs(cd.matrix - to_dense(cp).matrix) < 1e-15);
  CHECK(frobenius_norm(cp) == doctest::Approx(cd.matrix.norm()).epsilon(1e-12));
  CHECK(max_abs(to_dense(collision_apply_factorized(phi, 0.3, 1)).matrix - cd.matrix) < 1e-15);
}

TEST_CASE("contact collision on a product state is a density commutator") {
  // B |phi><phi|^{(x)2} has kernel -i sigma (|phi(x)|^2 - |phi(y)|^2) phi(x) conj(phi(y))
  const GridSpec g{1, 32, 10.0};
  const auto phi = gaussian_state(g, 0.8, {}, {1.0, 0, 0});
  const double sigma = 0.7, dx = g.spacing();
  const auto c = collision_apply(projector(phi, 2), sigma, 0);
  Eigen::MatrixXcd expect(32, 32);
  for (int x = 0; x < 32; ++x)
    for (int y = 0; y < 32; ++y)
      expect(x, y) = Complex(0.0, -sigma) * (std::norm(phi.values(x)) - std::norm(phi.values(y))) *
                     phi.values(x) * std::conj(phi.values(y)) * dx;
  CHECK(max_abs(c.matrix - expect) < 1e-14);
  CHECK_THROWS_AS(collision_apply(projector(gaussian_state(GridSpec{2, 8, 4.0}, 1.0), 2), sigma), ConfigError);
}

TEST_CASE("free propagation and the kinetic generator") {
  const GridSpec g{1, 32, 10.0};
  const auto phi = gaussian_state(g, 1.0, {}, {0.5, 0, 0});
  const auto moved = evolve_gp(phi, 0.0, 0.4, 0.4);
  CHECK(max_abs(free_propagate(projector(phi, 2), 0.4).matrix - projector(moved, 2).matrix) < 1e-14);
  CHECK(max_abs(to_dense(free_propagate(factorized_kernel(phi, 2), 0.4)).matrix - projector(moved, 2).matrix) < 1e-14);

  // eigenstates commute with the Laplacian
  const auto pw = plane_wave(g, {2, 0, 0});
  CHECK(max_abs(kinetic_generator(projector(pw, 2)).matrix) < 1e-13);
  CHECK(frobenius_norm(kinetic_generator(factorized_kernel(pw, 2))) < 1e-13);

  // generator matches a centred difference of the propagator
  const double h = 1e-4;
  const Eigen::MatrixXcd fd = (free_propagate(projector(phi), h).matrix - free_propagate(projector(phi), -h).matrix) / (2 * h);
  CHECK(max_abs(fd - kinetic_generator(projector(phi)).matrix) < 1e-6);
}

TEST_CASE("Sobolev trace norm of a factorized kernel") {
  const GridSpec g{1, 64, 16.0};
  const auto phi = gaussian_state(g, 1.0, {0.5, 0, 0}, {0.7, 0, 0});
  const double one = 1.0 + kinetic_energy(phi);
  for (int k : {1, 2}) {
    const auto pk = factorized_kernel(phi, k);
    CHECK(sobolev_trace_norm(pk) == doctest::Approx(std::pow(one, k)).epsilon(1e-12));
    CHECK(sobolev_trace_norm(to_dense(pk)) == doctest::Approx(std::pow(one, k)).epsilon(1e-12));
    CHECK(sobolev_trace_norm(free_propagate(pk, 0.3)) == doctest::Approx(std::pow(one, k)).epsilon(1e-12));
    CHECK(trace(pk).real() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("combine cancels at amplitude level") {
  const GridSpec g{1, 32, 10.0};
  const auto phi = gaussian_state(g, 1.0);
  const auto pk = factorized_kernel(phi, 2);
  CHECK(frobenius_norm(combine(pk, pk, -1.0)) < 1e-15);
  CHECK(frobenius_norm(combine(pk, pk)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("free hierarchies have vanishing residuals") {
  const GridSpec g{1, 64, 16.0};
  const auto phi = gaussian_state(g, 1.0, {}, {1.0, 0, 0});
  const double h = 1e-3;
  const auto traj = evolve_gp_trajectory(phi, 0.0, 0.1, h);
  // only the centred-difference error remains, O(dt^2)
  const double r1 = infinite_hierarchy_residual(traj, h, 1, 0.0, 0.05, 2e-3);
  const double r2 = infinite_hierarchy_residual(traj, h, 1, 0.0, 0.05, 1e-3);
  CHECK(r1 < 1e-4);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK_THROWS_AS(infinite_hierarchy_residual(traj, h, 1, 0.0, 0.2, 1e-3), DomainError);
}

TEST_CASE("BBGKY residual of a non-interacting pair") {
  const GridSpec g{1, 32, 12.0};
  const auto psi = build_product(gaussian_state(g, 1.0, {}, {0.5, 0, 0}), 2);
  const ManyBodyHamiltonian h;
  std::vector<ManyBodyState> traj;
  evolve_manybody(psi, h, 0.02, 1e-3, 1, [&](double, const ManyBodyState& s) { traj.push_back(s); });
  CHECK(traj.size() == 21);
  CHECK(bbgky_residual(traj, 1e-3, h, 1, 0.01, 1e-3) < 1e-5);
  CHECK_THROWS_AS(bbgky_residual(traj, 1e-3, h, 1, 0.0, 1e-3), DomainError);
}

TEST_CASE("Dyson series without collisions is free propagation") {
  const GridSpec g{1, 64, 16.0};
  const auto phi = gaussian_state(g, 1.0, {}, {0.5, 0, 0});
  const auto fam = factorized_family(phi, 3, 0.0);
  CHECK(fam.k_max() == 3);
  const auto exact = factorized_kernel(evolve_gp(phi, 0.0, 0.1, 0.1), 1);
  for (int n = 1; n <= 3; ++n)
    CHECK(frobenius_norm(combine(dyson_partial_sum(fam, 1, n, 0.1), exact, -1.0)) < 1e-12);
  const auto t0 = dyson_term(fam, 1, 0, 0.1);
  CHECK(t0.m == 0);
  CHECK_THROWS_AS(dyson_term(fam, 1, 3, 0.1), ConfigError);
}

TEST_CASE("Dyson partial sums approach the factorized solution") {
  const GridSpec g{1, 64, 16.0};
  const auto phi = gaussian_state(g, 1.0);
  const double sigma = 0.2, t = 0.05;
  const auto exact = factorized_kernel(evolve_gp(phi, sigma, t, t / 2000), 1);
  const auto fam = factorized_family(phi, 3, sigma);
  double prev = 1.0;
  for (int n = 1; n <= 3; ++n) {
    const double d = frobenius_norm(combine(dyson_partial_sum(fam, 1, n, t, 8), exact, -1.0));
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("power counting exponents") {
  const auto p = power_counting_margin(1, 1);
  CHECK(p.volume_exp == 19);
  CHECK(p.decay_exp == 25);
  CHECK(p.margin == 6);
  for (long k = 1; k <= 20; ++k)
    for (long m = 0; m <= 20; ++m) CHECK(power_counting_margin(k, m).margin == 5 * k + m);
}

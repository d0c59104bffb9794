#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gplab/errors.hpp"
#include "gplab/manybody.hpp"
#include "gplab/scattering.hpp"
#include "oracles.hpp"

using namespace gplab;
using std::numbers::pi;

namespace {

// Symmetric two-mode state (a(x) b(y) + b(x) a(y)) / sqrt 2 for orthonormal a, b.
ManyBodyState two_mode(const WaveFunction& a, const WaveFunction& b) {
  const auto n = static_cast<Eigen::Index>(a.grid.size());
  ManyBodyState psi{2, a.grid, Field(n * n)};
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      psi.values(x * n + y) = (a.values(x) * b.values(y) + b.values(x) * a.values(y)) / std::sqrt(2.0);
  return psi;
}

// int int rho(x) rho(y) V(|x - y|) dx dy for rho = |Gaussian of width w|^2 in one dimension,
// as int V(|r|) (rho * rho)(r) dr with the autoconvolution in closed form.
double pair_integral_1d(const PotentialModel& v, double w) {
  const double rc = v.cutoff_radius();
  auto integrand = [&](double r) {
    return v(std::abs(r)) * std::exp(-r * r / (2.0 * w * w)) / (std::sqrt(2.0 * pi) * w);
  };
  return oracle::simpson(integrand, -rc, rc, 20000);
}

}  // namespace

TEST_CASE("product state marginals") {
  const GridSpec g{1, 32, 10.0};
  const auto phi = gaussian_state(g, 1.0, {0.3, 0, 0}, {0.5, 0, 0});
  const auto psi = build_product(phi, 3);
  CHECK(psi.size() == 32 * 32 * 32);
  CHECK(l2_norm(psi) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(symmetry_defect(psi) < 1e-14);

  const auto g1 = marginal(psi, 1);
  const auto d = density_defects(g1);
  CHECK(d.hermiticity < 1e-14);
  CHECK(d.trace_error < 1e-14);
  CHECK(d.min_eigenvalue > -1e-14);
  const auto s = spectrum(g1);
  CHECK(s.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.values(1)) < 1e-12);
  CHECK(condensate_overlap(g1, phi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(condensate_overlap(psi, phi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(factorization_distance(psi, phi, 2) < 1e-6);
  CHECK((g1.matrix - projector(phi).matrix).cwiseAbs().maxCoeff() < 1e-14);

  const auto g2 = marginal(psi, 2);
  CHECK((partial_trace_last(g2).matrix - g1.matrix).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g2.matrix - projector(phi, 2).matrix).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("symmetric two-mode state has occupations 1/2, 1/2") {
  const GridSpec g{1, 32, 8.0};
  const auto a = plane_wave(g, {1, 0, 0});
  const auto b = gaussian_state(g, 0.8);
  // orthonormalize b against a
  Field bv = b.values - inner(a, b) * a.values;
  const auto b2 = make_wavefunction(g, bv);
  const auto psi = two_mode(a, b2);
  CHECK(l2_norm(psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(symmetry_defect(psi) < 1e-14);
  const auto s = spectrum(marginal(psi, 1));
  CHECK(s.values(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.values(1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(s.values(2)) < 1e-10);
  CHECK(condensate_overlap(psi, a) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(factorization_distance(psi, a, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("kinetic energy of plane-wave products") {
  const GridSpec g{1, 16, 4.0};
  const auto phi = plane_wave(g, {2, 0, 0});
  const auto psi = build_product(phi, 3);
  const ManyBodyHamiltonian h;
  const double e = 3.0 * std::pow(2.0 * pi * 2.0 / 4.0, 2);
  CHECK(energy_moment(psi, h, 1) == doctest::Approx(e).epsilon(1e-12));
  CHECK(energy_moment(psi, h, 2) == doctest::Approx(e * e).epsilon(1e-12));
  CHECK_THROWS(energy_moment(psi, h, 3));
}

TEST_CASE("pair energy of a product state against double quadrature") {
  const GridSpec g{1, 256, 10.0};
  const double w = 1.0;
  const auto phi = gaussian_state(g, w);
  const auto psi = build_product(phi, 2);
  const auto v = PotentialModel::gaussian(2.0, 0.7);
  const double kinetic = 2.0 / (2.0 * w * w);
  double prev = 0.0;
  for (long n : {1L, 2L, 4L}) {
    const ManyBodyHamiltonian h{scale_potential_analog1d(v, n), TrapModel::none(), 1.0 / n};
    const double pair = energy_moment(psi, h, 1) - kinetic;
    const double ref = pair_integral_1d(h.pair, w) / n;
    CHECK(pair == doctest::Approx(ref).epsilon(1e-9));
    CHECK(pair * n > prev);
    prev = pair * n;
  }
  // mean-field limit: int int rho rho V_N -> b0 int rho^2, monotonically
  const double limit = born_coupling_1d(v) / (std::sqrt(2.0 * pi) * w);
  double gap = limit;
  for (long n : {2L, 4L, 8L, 64L}) {
    const double next = limit - pair_integral_1d(scale_potential_analog1d(v, n), w);
    CHECK(next > 0.0);
    CHECK(next < gap);
    gap = next;
  }
  CHECK(gap < 1e-3 * limit);
}

TEST_CASE("exact evolution preserves norm, symmetry and energy") {
  const GridSpec g{1, 64, 20.0};
  const auto phi = gaussian_state(g, 1.0, {}, {0.5, 0, 0});
  const auto psi = build_product(phi, 2);
  const ManyBodyHamiltonian h{PotentialModel::gaussian(5.0, 0.5), TrapModel::none(), 1.0};
  const double e0 = energy_moment(psi, h, 1);
  int calls = 0;
  const auto out = evolve_manybody(psi, h, 0.5, 2.5e-4, 400, [&](double, const ManyBodyState&) { ++calls; });
  CHECK(calls == 6);
  CHECK(std::abs(l2_norm(out) - 1.0) < 1e-12);
  CHECK(symmetry_defect(out) < 1e-12);
  CHECK(energy_moment(out, h, 1) == doctest::Approx(e0).epsilon(1e-6));
  const auto back = evolve_manybody(out, h, -0.5, 2.5e-4);
  CHECK((back.values - psi.values).cwiseAbs().maxCoeff() < 1e-10);
  const auto d = density_defects(marginal(out, 1));
  CHECK(d.min_eigenvalue > -1e-12);
}

TEST_CASE("non-interacting evolution stays a product of GP orbitals") {
  const GridSpec g{1, 32, 12.0};
  const auto phi = gaussian_state(g, 1.0, {}, {1.0, 0, 0});
  const auto out = evolve_manybody(build_product(phi, 3), PotentialModel::zero(), TrapModel::none(), 0.3, 1e-2);
  const auto phit = evolve_gp(phi, 0.0, 0.3, 1e-2);
  CHECK(condensate_overlap(out, phit) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mixed-gradient integral of a product state") {
  const GridSpec g{1, 128, 16.0};
  const double w = 0.9;
  const auto phi = gaussian_state(g, w);
  const auto psi = build_product(phi, 2);
  const double one_body = 1.0 / (2.0 * w * w);
  CHECK(correlation_quotient(psi, [](double) { return 1.0; }, 0, 1) ==
        doctest::Approx(one_body * one_body).epsilon(1e-10));
  CHECK_THROWS_AS(correlation_quotient(psi, [](double) { return 0.0; }, 0, 1), DomainError);
}

TEST_CASE("Jastrow states are symmetric and depleted") {
  const GridSpec g{3, 8, 4.0};
  const auto phi = gaussian_state(g, 0.8);
  const auto sol = solve_zero_energy(PotentialModel::barrier(10.0, 1.0));
  const auto psi = build_jastrow_product(phi, 2, jastrow(sol, 2));
  CHECK(symmetry_defect(psi) < 1e-14);
  CHECK(l2_norm(psi) == doctest::Approx(1.0).epsilon(1e-13));
  const double overlap = condensate_overlap(psi, phi);
  CHECK(overlap < 1.0);
  CHECK(overlap > 0.5);
}

TEST_CASE("Hardy inequality on a family of trial states") {
  const GridSpec g{3, 32, 12.0};
  for (double w : {0.8, 1.0, 1.3, 1.6}) {
    const auto phi = gaussian_state(g, w);
    const auto hc = hardy_check(phi);
    CHECK(hc.lhs <= hc.rhs);
    // Gaussian: 4 int |grad|^2 = 6 / w^2
    CHECK(hc.rhs == doctest::Approx(6.0 / (w * w)).epsilon(1e-6));
    // direct grid sum, origin cell weighted by the mean of its face neighbours, 1 / dx^2
    const double dx = g.spacing();
    double lhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.position(i);
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      lhs += std::norm(phi.values(static_cast<Eigen::Index>(i))) * (r2 > 0.0 ? 1.0 / r2 : 1.0 / (dx * dx));
    }
    CHECK(hc.lhs == doctest::Approx(lhs * g.cell_volume()).epsilon(1e-12));
  }
  // refinement moves the grid value towards <|r|^-2> = 2 / w^2
  const double coarse = hardy_check(gaussian_state(GridSpec{3, 16, 12.0}, 1.0)).lhs;
  const double fine = hardy_check(gaussian_state(g, 1.0)).lhs;
  CHECK(std::abs(fine - 2.0) < std::abs(coarse - 2.0));
  CHECK(fine < 2.0);

  // lambda-scaling: psi(x / lambda) on a box scaled by lambda divides both sides by lambda^2
  const auto base = hardy_check(gaussian_state(g, 1.0));
  for (double lambda : {0.5, 2.0}) {
    const auto hs = hardy_check(gaussian_state(GridSpec{3, 32, 12.0 * lambda}, lambda));
    CHECK(hs.lhs * lambda * lambda == doctest::Approx(base.lhs).epsilon(1e-12));
    CHECK(hs.rhs * lambda * lambda == doctest::Approx(base.rhs).epsilon(1e-12));
  }
  const auto boosted = gaussian_state(g, 1.0, {0.5, 0.0, 0.0}, {1.0, 0.0, 0.0});
  const auto hb = hardy_check(boosted);
  CHECK(hb.lhs <= hb.rhs);
  CHECK_THROWS(hardy_check(gaussian_state(GridSpec{1, 32, 8.0}, 1.0)));
}

TEST_CASE("amplitude budget") {
  CHECK(manybody_size(GridSpec{3, 16, 6.0}, 2) == (std::size_t{1} << 24));
  CHECK_THROWS_AS(manybody_size(GridSpec{3, 32, 6.0}, 2), ConfigError);
  CHECK_THROWS_AS(kernel_dimension(GridSpec{3, 16, 6.0}, 2), ConfigError);
}

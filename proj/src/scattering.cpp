#include "gplab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "gplab/errors.hpp"
#include "gplab/quadrature.hpp"

namespace gplab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGrading = 4.0;

std::vector<double> build_mesh(double cutoff, double r_max, int points) {
  const int inner = points / 2;
  const int outer = points - inner - 1;
  std::vector<double> r(static_cast<std::size_t>(points));
  const double denom = std::expm1(kGrading);
  for (int i = 0; i <= inner; ++i) {
    r[static_cast<std::size_t>(i)] =
        cutoff * std::expm1(kGrading * static_cast<double>(i) / inner) / denom;
  }
  r[static_cast<std::size_t>(inner)] = cutoff;
  for (int i = 1; i <= outer; ++i) {
    r[static_cast<std::size_t>(inner + i)] =
        cutoff + (r_max - cutoff) * static_cast<double>(i) / outer;
  }
  r.back() = r_max;
  return r;
}

struct Trajectory {
  std::vector<double> u, du;
};

// RK4 for (u, u')' = (u', V u / 2). Intervals at or beyond the cutoff see V = 0,
// so the barrier edge is never sampled from the outside.
Trajectory integrate_rk4(const PotentialModel& v, const std::vector<double>& r, std::size_t stride) {
  const double rc = v.cutoff_radius();
  Trajectory t;
  const std::size_t n = (r.size() - 1) / stride + 1;
  t.u.resize(n);
  t.du.resize(n);
  t.u[0] = 0.0;
  t.du[0] = 1.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double r0 = r[k * stride];
    const double r1 = r[(k + 1) * stride];
    const double h = r1 - r0;
    const bool outside = r0 >= rc;
    const auto pot = [&](double x) { return outside ? 0.0 : 0.5 * v(std::min(x, rc)); };
    const double q0 = pot(r0), qm = pot(r0 + 0.5 * h), q1 = pot(r1);
    const double u = t.u[k], p = t.du[k];
    const double k1u = p, k1p = q0 * u;
    const double k2u = p + 0.5 * h * k1p, k2p = qm * (u + 0.5 * h * k1u);
    const double k3u = p + 0.5 * h * k2p, k3p = qm * (u + 0.5 * h * k2u);
    const double k4u = p + h * k3p, k4p = q1 * (u + h * k3u);
    t.u[k + 1] = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    t.du[k + 1] = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  return t;
}

// Weights of the derivative at stencil[centre] of the Lagrange interpolant.
std::vector<double> derivative_weights(std::span<const double> x, std::size_t centre) {
  std::vector<double> w(x.size(), 0.0);
  const double xi = x[centre];
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j == centre) {
      for (std::size_t m = 0; m < x.size(); ++m) {
        if (m != centre) w[j] += 1.0 / (xi - x[m]);
      }
    } else {
      double num = 1.0, den = 1.0;
      for (std::size_t m = 0; m < x.size(); ++m) {
        if (m != j) den *= x[j] - x[m];
        if (m != j && m != centre) num *= xi - x[m];
      }
      w[j] = num / den;
    }
  }
  return w;
}

}  // namespace

double barrier_scattering_length(double height, double radius) {
  const double kappa = std::sqrt(0.5 * height);
  if (kappa * radius < 1e-8) return radius * (kappa * radius) * (kappa * radius) / 3.0;
  return radius - std::tanh(kappa * radius) / kappa;
}

ScatteringSolution solve_zero_energy(const PotentialModel& v, double r_max, double tol,
                                     int mesh_points) {
  const double rc = v.cutoff_radius();
  if (!(r_max > rc)) throw ConfigError("solve_zero_energy: r_max must exceed the cutoff radius");
  if (!(tol > 0.0)) throw ConfigError("solve_zero_energy: tol must be > 0");
  if (mesh_points < 16 || mesh_points % 4 != 0) {
    throw ConfigError("solve_zero_energy: mesh_points must be a multiple of 4 and >= 16");
  }

  ScatteringSolution sol;
  sol.potential_ = v;
  sol.radii_ = build_mesh(rc, r_max, mesh_points + 1);
  const std::size_t inner = static_cast<std::size_t>((mesh_points + 1) / 2);
  sol.support_nodes_ = inner + 1;

  Trajectory fine = integrate_rk4(v, sol.radii_, 1);
  Trajectory coarse = integrate_rk4(v, sol.radii_, 2);

  const auto read_a0 = [&](const Trajectory& t, std::size_t node) {
    return rc - t.u[node] / t.du[node];
  };
  const double a0 = read_a0(fine, inner);
  const double a0_coarse = read_a0(coarse, inner / 2);
  for (std::size_t i = 0; i < fine.u.size(); ++i) {
    if (!std::isfinite(fine.u[i]) || !std::isfinite(fine.du[i])) {
      throw SolverError("solve_zero_energy: non-finite solution (potential too strong for mesh)");
    }
  }
  const double err = std::abs(a0 - a0_coarse) / 15.0;
  if (!std::isfinite(a0) || !(err <= tol * std::max(std::abs(a0), rc))) {
    std::ostringstream msg;
    msg << "solve_zero_energy: integration not converged, a0 error estimate " << err
        << " exceeds tolerance " << tol * std::max(std::abs(a0), rc);
    throw SolverError(msg.str(), err);
  }

  const double slope = fine.du[inner];
  sol.slope_ = slope;
  sol.a0_ = a0;
  sol.a0_error_ = err;
  const std::size_t n = sol.radii_.size();
  sol.u_.resize(n);
  sol.du_.resize(n);
  sol.f_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.u_[i] = fine.u[i] / slope;
    sol.du_[i] = fine.du[i] / slope;
    const double r = sol.radii_[i];
    sol.f_[i] = i == 0 ? sol.du_[0] : (i >= inner ? 1.0 - a0 / r : sol.u_[i] / r);
  }
  return sol;
}

ScatteringSolution solve_zero_energy(const PotentialModel& v) {
  return solve_zero_energy(v, 4.0 * v.cutoff_radius());
}

double ScatteringSolution::operator()(double r) const {
  if (r < 0.0 || std::isnan(r)) throw DomainError("ScatteringSolution: radius must be >= 0");
  const double rc = potential_.cutoff_radius();
  if (r >= rc) return 1.0 - a0_ / r;
  if (r == 0.0) return f_.front();
  const std::size_t last = support_nodes_ - 1;
  const auto end = radii_.begin() + static_cast<std::ptrdiff_t>(last + 1);
  std::size_t i = static_cast<std::size_t>(std::upper_bound(radii_.begin(), end, r) - radii_.begin());
  i = std::clamp<std::size_t>(i, 1, last) - 1;
  const double h = radii_[i + 1] - radii_[i];
  const double s = (r - radii_[i]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  const double u = h00 * u_[i] + h10 * h * du_[i] + h01 * u_[i + 1] + h11 * h * du_[i + 1];
  return u / r;
}

double ScatteringSolution::residual() const {
  const std::size_t n = radii_.size();
  const std::size_t edge = support_nodes_ - 1;
  double scale = 0.0;
  for (std::size_t i = 0; i <= edge; ++i) {
    scale = std::max(scale, std::abs(0.5 * potential_(radii_[i]) * u_[i]));
  }
  if (scale == 0.0) scale = 1.0;
  double worst = 0.0;
  const auto check_segment = [&](std::size_t lo, std::size_t hi, bool inside) {
    for (std::size_t i = lo + 2; i + 2 <= hi; ++i) {
      const std::span<const double> x(radii_.data() + i - 2, 5);
      const auto w = derivative_weights(x, 2);
      double d2u = 0.0;
      for (std::size_t j = 0; j < 5; ++j) d2u += w[j] * du_[i - 2 + j];
      const double rhs = inside ? 0.5 * potential_(radii_[i]) * u_[i] : 0.0;
      worst = std::max(worst, std::abs(d2u - rhs) / scale);
    }
  };
  check_segment(0, edge, true);
  check_segment(edge, n - 1, false);
  return worst;
}

std::function<double(double)> jastrow(const ScatteringSolution& sol, long n) {
  if (n < 1) throw DomainError("jastrow: N must be >= 1");
  auto shared = std::make_shared<const ScatteringSolution>(sol);
  const double scale = static_cast<double>(n);
  return [shared, scale](double r) { return (*shared)(scale * r); };
}

CouplingReport coupling_sigma(const ScatteringSolution& sol, long n) {
  if (n < 1) throw DomainError("coupling_sigma: N must be >= 1");
  CouplingReport rep;
  rep.n = n;
  const PotentialModel& v = sol.potential();
  if (v.is_zero()) return rep;
  const auto& r = sol.radii();
  const std::size_t edge = sol.support_nodes() - 1;
  const double sn = static_cast<double>(n);
  const PotentialModel vn = scale_potential(v, n);
  const auto fn = jastrow(sol, n);
  const auto plain = [&](double x) { return v(x) * sol(x) * x * x; };
  const auto scaled = [&](double x) { return sn * vn(x) * fn(x) * x * x; };
  for (std::size_t i = 0; i < edge; ++i) {
    rep.sigma += gauss_kronrod15(plain, r[i], r[i + 1]);
    rep.sigma_scaled += gauss_kronrod15(scaled, r[i] / sn, r[i + 1] / sn);
  }
  rep.sigma *= 4.0 * kPi;
  rep.sigma_scaled *= 4.0 * kPi;
  if (std::abs(rep.sigma - rep.sigma_scaled) > 1e-8 * std::abs(rep.sigma)) {
    throw SolverError("coupling_sigma: scaled and unscaled couplings disagree",
                      std::abs(rep.sigma - rep.sigma_scaled));
  }
  return rep;
}

double nabla2_log_f_bound(const ScatteringSolution& sol) {
  if (sol.support_nodes() < 100) {
    throw ConfigError("nabla2_log_f_bound: fewer than 100 mesh points inside the support");
  }
  const double alpha = alpha_strength(sol.potential());
  if (alpha == 0.0) return 0.0;
  const auto& r = sol.radii();
  const auto& f = sol.f_values();
  double sup = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    const double h1 = r[i] - r[i - 1];
    const double h2 = r[i + 1] - r[i];
    const double gm = std::log(f[i - 1]), g0 = std::log(f[i]), gp = std::log(f[i + 1]);
    const double d1 = -h2 / (h1 * (h1 + h2)) * gm + (h2 - h1) / (h1 * h2) * g0 +
                      h1 / (h2 * (h1 + h2)) * gp;
    const double d2 = 2.0 * (gm / (h1 * (h1 + h2)) - g0 / (h1 * h2) + gp / (h2 * (h1 + h2)));
    sup = std::max(sup, std::abs(r[i] * r[i] * d2 + 2.0 * r[i] * d1));
  }
  return sup / alpha;
}

}  // namespace gplab

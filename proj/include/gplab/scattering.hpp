#pragma once

#include <functional>
#include <vector>

#include "gplab/potential.hpp"

namespace gplab {

/// Zero-energy s-wave solution of (-Laplacian + V/2) f = 0 with f -> 1 at infinity.
///
/// Stored through the reduced function u(r) = r f(r) (and u') on a mesh that is
/// geometrically graded towards r = 0 inside the support and uniform outside.
/// Outside the support f(r) = 1 - a0/r exactly.
class ScatteringSolution {
 public:
  const PotentialModel& potential() const noexcept { return potential_; }
  const std::vector<double>& radii() const noexcept { return radii_; }
  const std::vector<double>& f_values() const noexcept { return f_; }
  const std::vector<double>& u_values() const noexcept { return u_; }
  const std::vector<double>& du_values() const noexcept { return du_; }
  double a0() const noexcept { return a0_; }
  /// Richardson estimate of the a0 discretization error.
  double a0_error_estimate() const noexcept { return a0_error_; }
  /// Number of mesh nodes with r <= cutoff_radius.
  std::size_t support_nodes() const noexcept { return support_nodes_; }

  /// f(r); cubic Hermite interpolation of u inside the support.
  double operator()(double r) const;

  /// max_i |u'' - V u / 2| / scale over interior nodes of the smooth segments,
  /// with u'' from a 4th-order difference of u' and scale = max |V u / 2|.
  double residual() const;

 private:
  friend ScatteringSolution solve_zero_energy(const PotentialModel&, double, double, int);
  PotentialModel potential_ = PotentialModel::zero();
  std::vector<double> radii_, u_, du_, f_;
  double a0_ = 0.0, a0_error_ = 0.0, slope_ = 1.0;
  std::size_t support_nodes_ = 0;
};

inline constexpr int kDefaultScatteringMesh = 4096;
inline constexpr double kDefaultScatteringTol = 1e-10;

/// Integrates u'' = V u / 2 from u(0) = 0, u'(0) = 1 with fixed-step RK4 and
/// normalizes a posteriori so that u(r) = r - a0 beyond the support.
/// a0 is read off as r - u/u' at the cutoff node.
ScatteringSolution solve_zero_energy(const PotentialModel& v, double r_max,
                                     double tol = kDefaultScatteringTol,
                                     int mesh_points = kDefaultScatteringMesh);

/// Solves on the default mesh extending to 4 x cutoff_radius.
ScatteringSolution solve_zero_energy(const PotentialModel& v);

/// Closed-form scattering length of barrier(V0, R): R - tanh(kR)/k, k = sqrt(V0/2).
double barrier_scattering_length(double height, double radius);

/// f_N(r) = f(N r).
std::function<double(double)> jastrow(const ScatteringSolution& sol, long n);

struct CouplingReport {
  double sigma = 0.0;         ///< 4 pi int V f r^2 dr
  double sigma_scaled = 0.0;  ///< 4 pi int N V_N f_N r^2 dr for the requested N
  long n = 1;
};

/// sigma = int V f d^3r (equal to 8 pi a0), cross-checked against the scaled
/// integral int N V_N f_N d^3r. Throws SolverError if the two disagree beyond 1e-8.
CouplingReport coupling_sigma(const ScatteringSolution& sol, long n = 10);

/// sup over mesh of |r^2 Laplacian(log f)| / alpha, the empirical constant of the
/// bound |Laplacian log f| <= C alpha / r^2. Requires >= 100 nodes inside the support.
double nabla2_log_f_bound(const ScatteringSolution& sol);

}  // namespace gplab

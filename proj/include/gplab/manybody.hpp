#pragma once

#include <functional>

#include "gplab/density_matrix.hpp"
#include "gplab/gp.hpp"
#include "gplab/potential.hpp"

namespace gplab {

/// Hard cap on the number of amplitudes of an N-particle state.
inline constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 28;

/// N bosons on the product of N copies of a periodic grid.
///
/// `values` is row-major over (particle 1, ..., particle N), each particle block
/// being grid.size() wide; sum |psi|^2 (dx)^{N d} = 1.
struct ManyBodyState {
  int particles = 1;
  GridSpec grid;
  Field values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  double cell_volume() const noexcept;
};

/// grid.size()^particles, or ConfigError if above kMaxAmplitudes.
std::size_t manybody_size(const GridSpec& grid, int particles);

/// Unnormalized phi(x_1) ... phi(x_N).
Field product_amplitudes(const WaveFunction& phi, int particles);

/// Unnormalized prod_{i<j} f(|x_i - x_j|) prod_i phi(x_i), distances by minimum image.
Field jastrow_amplitudes(const WaveFunction& phi, int particles,
                         const std::function<double(double)>& f);

ManyBodyState build_product(const WaveFunction& phi, int particles);
ManyBodyState build_jastrow_product(const WaveFunction& phi, int particles,
                                    const std::function<double(double)>& f);

double l2_norm(const ManyBodyState& psi);
void normalize(ManyBodyState& psi);

/// H = sum_j (-Laplacian_j + V_ext(x_j)) + pair_weight * sum_{i<j} V(|x_i - x_j|).
///
/// The pair potential is the already scaled V_N; pair_weight = 1/N gives the
/// mean-field normalization used in one-dimensional analog runs.
struct ManyBodyHamiltonian {
  PotentialModel pair = PotentialModel::zero();
  TrapModel trap;
  double pair_weight = 1.0;
};

/// Diagonal (potential) part of H on the product grid.
Eigen::ArrayXd potential_diagonal(const ManyBodyHamiltonian& h, const GridSpec& grid, int particles);

/// Second-order split-step evolution (half kinetic, potential, half kinetic); t may be
/// negative. Throws SolverError on non-finite amplitudes.
ManyBodyState evolve_manybody(const ManyBodyState& psi0, const ManyBodyHamiltonian& h, double t,
                              double dt);
ManyBodyState evolve_manybody(const ManyBodyState& psi0, const PotentialModel& pair,
                              const TrapModel& trap, double t, double dt);

/// As above, calling observer(time, state) at t = 0 and after every `every` steps
/// (and always after the last one).
ManyBodyState evolve_manybody(const ManyBodyState& psi0, const ManyBodyHamiltonian& h, double t,
                              double dt, int every,
                              const std::function<void(double, const ManyBodyState&)>& observer);

/// H applied once: spectral kinetic part plus pointwise potentials.
Field apply_hamiltonian(const ManyBodyState& psi, const ManyBodyHamiltonian& h);

/// <psi, H^m psi> for m in {1, 2}.
double energy_moment(const ManyBodyState& psi, const ManyBodyHamiltonian& h, int m);

/// max over transpositions (i j) of max |psi - P_ij psi|, relative to max |psi|.
double symmetry_defect(const ManyBodyState& psi);

/// k-particle marginal, trace-normalized.
DensityMatrix marginal(const ManyBodyState& psi, int k);

/// <phi, gamma^(1) phi> computed directly from psi, without forming the marginal.
double condensate_overlap(const ManyBodyState& psi, const WaveFunction& phi);

/// int |grad_i grad_j (psi / f(|x_i - x_j|))|^2, evaluated in Fourier space.
double correlation_quotient(const ManyBodyState& psi, const std::function<double(double)>& f,
                            int i, int j);

/// sqrt(1 - ||<phi^{tensor k}, psi>_{first k}||^2).
double factorization_distance(const ManyBodyState& psi, const WaveFunction& phi, int k);

struct HardyCheck {
  double lhs = 0.0;  ///< <psi, |r|^-2 psi>
  double rhs = 0.0;  ///< 4 <grad psi, grad psi>
};

/// Three-dimensional only. The origin cell gets the mean of its six face neighbours
/// of |r|^-2, i.e. 1 / dx^2.
HardyCheck hardy_check(const WaveFunction& psi_rel);

}  // namespace gplab

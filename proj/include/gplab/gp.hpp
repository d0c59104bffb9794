#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/potential.hpp"

namespace gplab {

/// Single-particle field on a periodic grid, normalized so that
/// sum |phi|^2 (dx)^d = 1.
struct WaveFunction {
  GridSpec grid;
  Field values;
};

/// Wraps values and renormalizes them; throws DomainError on a zero field.
WaveFunction make_wavefunction(const GridSpec& grid, Field values);

double l2_norm(const WaveFunction& phi);
void normalize(WaveFunction& phi);
/// <a, b> = sum conj(a) b (dx)^d.
Complex inner(const WaveFunction& a, const WaveFunction& b);

/// Normalized Gaussian exp(-|x - c|^2 / (2 w^2) + i k.x).
WaveFunction gaussian_state(const GridSpec& grid, double width,
                            const std::array<double, 3>& center = {},
                            const std::array<double, 3>& momentum = {});

/// L^{-d/2} exp(i 2 pi n.x / L) for integer mode numbers n.
WaveFunction plane_wave(const GridSpec& grid, const std::array<int, 3>& modes);

/// int |grad phi|^2, evaluated spectrally.
double kinetic_energy(const WaveFunction& phi);

/// int (1 - Laplacian) applied to phi, against phi: 1 + int |grad phi|^2 for unit phi.
double sobolev_h1_product(const WaveFunction& u, const WaveFunction& v);

/// In-place e^{i t Laplacian}: multiplies Fourier coefficients by exp(-i |k|^2 t).
void free_propagate_field(Field& values, const GridSpec& grid, double t);

/// E[phi] = int |grad phi|^2 + V_ext |phi|^2 + 4 pi a0 |phi|^4.
double gp_energy(const WaveFunction& phi, double a0, const TrapModel& trap);

/// The scattering length whose GP energy corresponds to evolution with coupling sigma.
inline double a0_from_sigma(double sigma) { return sigma / (8.0 * 3.14159265358979323846); }

/// Strang split-step solution of i d_t phi = -Laplacian phi + sigma |phi|^2 phi.
///
/// Steps are half kinetic, full nonlinear, half kinetic (adjacent half steps merged);
/// t may be negative for backward evolution, |t| is cut into equal steps <= dt.
/// The kinetic factor is exact, the nonlinear factor is a pure phase, so the norm
/// is preserved up to roundoff. Warns when the nonlinear phase per step exceeds 1 rad.
WaveFunction evolve_gp(const WaveFunction& phi0, double sigma, double t, double dt);

/// Same as evolve_gp but records the state after every step (including t = 0).
std::vector<WaveFunction> evolve_gp_trajectory(const WaveFunction& phi0, double sigma, double t,
                                               double dt);

struct GroundStateOptions {
  int max_iterations = 200000;
  std::optional<WaveFunction> initial;  ///< defaults to a Gaussian of width L/8
  double min_step = 1e-12;
};

struct GroundState {
  WaveFunction phi;
  double energy = 0.0;
  std::vector<double> energy_history;  ///< energy after each accepted step, index 0 = initial
  int iterations = 0;
  double flow_time = 0.0;
  double last_step = 0.0;
};

/// One semi-implicit normalized gradient-flow step of length tau:
/// (1/tau + s - Laplacian) phi' = (1/tau + s + mu - W) phi with W = V_ext + 8 pi a0 |phi|^2,
/// mu = <phi, (-Laplacian + W) phi> and stabilizer s = (max W + min W) / 2, followed by
/// renormalization. Its fixed points are exactly the normalized eigenfunctions of -Laplacian + W.
WaveFunction gradient_flow_step(const WaveFunction& phi, const TrapModel& trap, double a0,
                                double tau);

/// Minimizes gp_energy over normalized fields by the gradient flow above. Steps that
/// raise the energy are rejected and tau is halved; iteration stops once the energy
/// decrease per unit flow time falls below tol.
GroundState minimize_gp(const TrapModel& trap, double a0, const GridSpec& grid, double tol,
                        const GroundStateOptions& options = {});

}  // namespace gplab

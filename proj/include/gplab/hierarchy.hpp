#pragma once

#include <array>
#include <vector>

#include "gplab/density_matrix.hpp"
#include "gplab/manybody.hpp"

namespace gplab {

// ---------------------------------------------------------------------------
// Dense kernels

/// U gamma U^dagger with U = exp(i t sum_j Laplacian_j), spectrally on both slots.
Kernel free_propagate(const Kernel& gamma, double t);

/// -i sum_j [-Laplacian_j, gamma].
Kernel kinetic_generator(const Kernel& gamma);

/// Tr (1 - Laplacian_1) ... (1 - Laplacian_k) gamma (real part).
double sobolev_trace_norm(const Kernel& gamma);

/// j-th summand (0-based) of the collision operator,
/// -i sigma Tr_{k+1} [delta(r_j - r_{k+1}), gamma_next],
/// with delta realized as (dx)^{-d} times the Kronecker symbol. One-dimensional grids only.
Kernel collision_apply(const Kernel& gamma_next, double sigma, int j);

/// Sum over j of collision_apply.
Kernel collision_apply(const Kernel& gamma_next, double sigma);

/// Relative residual of the exact marginal hierarchy at the middle of three frames:
/// || (g[2] - g[0]) / (2 dt) - rhs || / (sum of the norms of the individual terms), where
/// rhs = -i ( sum_j [-Laplacian_j + V_ext, g[1]] + w sum_{i<j<=k} [V, g[1]]
///            + w (N - k) sum_j Tr_{k+1} [V(r_j - r_{k+1}), next] ),
/// w being h.pair_weight. Norms are Frobenius norms of the kernels.
double bbgky_residual(const std::array<Kernel, 3>& frames, const Kernel& next,
                      const ManyBodyHamiltonian& h, int particles, double dt);

/// Same, with marginals taken from a state trajectory sampled every frame_dt;
/// evaluates at time t using neighbours at t -/+ dt (both multiples of frame_dt).
double bbgky_residual(const std::vector<ManyBodyState>& trajectory, double frame_dt,
                      const ManyBodyHamiltonian& h, int k, double t, double dt);

// ---------------------------------------------------------------------------
// Kernels of finite tensor rank

/// c * |u_1><v_1| (x) ... (x) |u_k><v_k|, vectors sampled on the grid (not dx-scaled).
struct ProductTerm {
  Complex coefficient = 1.0;
  std::vector<Field> kets;
  std::vector<Field> bras;
};

/// Sum of product terms; the kernel function is sum c prod u_i(x_i) conj(v_i(y_i)).
struct ProductKernel {
  int k = 1;
  GridSpec grid;
  std::vector<ProductTerm> terms;
};

/// |phi><phi|^{tensor k}.
ProductKernel factorized_kernel(const WaveFunction& phi, int k);

/// Dense kernel in the convention of Kernel (throws ConfigError above the memory cap).
Kernel to_dense(const ProductKernel& gamma);

/// a + scale * b.
ProductKernel combine(const ProductKernel& a, const ProductKernel& b, Complex scale = 1.0);

ProductKernel free_propagate(const ProductKernel& gamma, double t);
ProductKernel kinetic_generator(const ProductKernel& gamma);

/// Collision summand j (0-based) on a (k+1)-kernel; each term yields two terms.
ProductKernel collision_apply(const ProductKernel& gamma_next, double sigma, int j);
ProductKernel collision_apply(const ProductKernel& gamma_next, double sigma);

/// Closed form for factorized input: sum_j B_j |phi><phi|^{tensor (k+1)}.
ProductKernel collision_apply_factorized(const WaveFunction& phi, double sigma, int k);

/// Frobenius norm of the dense kernel, evaluated through orthonormal slot bases so that
/// cancellations between terms happen at amplitude level.
double frobenius_norm(const ProductKernel& gamma);

double sobolev_trace_norm(const ProductKernel& gamma);
Complex trace(const ProductKernel& gamma);

/// Relative residual of the contact hierarchy for the factorized family built from
/// frames of a single-particle trajectory sampled every frame_dt, at time t with
/// neighbours t -/+ dt. Normalized like bbgky_residual.
double infinite_hierarchy_residual(const std::vector<WaveFunction>& trajectory, double frame_dt,
                                   int k, double sigma, double t, double dt);

// ---------------------------------------------------------------------------
// Dyson expansion

/// Entries k = 1 ... k_max of a hierarchy at one time, plus its coupling.
struct HierarchyFamily {
  std::vector<ProductKernel> entries;  ///< entries[k - 1]
  double sigma = 0.0;

  int k_max() const noexcept { return static_cast<int>(entries.size()); }
  const ProductKernel& entry(int k) const;
};

HierarchyFamily factorized_family(const WaveFunction& phi, int k_max, double sigma);

struct DysonTerm {
  int k = 1;
  int m = 0;
  ProductKernel value;
  int quad_points = 16;  ///< midpoint nodes per simplex axis
};

/// omega_{m,t}^{(k)} = int_{0<s_m<...<s_1<t} U_{t-s_1} B U_{s_1-s_2} B ... U_{s_m} entry(k+m),
/// by the midpoint product rule with quad_points nodes per axis. m <= 2.
DysonTerm dyson_term(const HierarchyFamily& family, int k, int m, double t, int quad_points = 16);

/// Sum of dyson_term for m = 0 ... n-1, n <= 3.
ProductKernel dyson_partial_sum(const HierarchyFamily& family, int k, int n, double t,
                                int quad_points = 16);

// ---------------------------------------------------------------------------

struct PowerCounting {
  long volume_exp = 0;
  long decay_exp = 0;
  long margin = 0;
};

/// Exponents of the graph bound for k external and m collision legs:
/// volume 4k + 15m, decay 5m + 2(2k + 3m) + 5(k + m).
PowerCounting power_counting_margin(long k, long m);

}  // namespace gplab

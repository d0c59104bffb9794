#pragma once

#include <Eigen/Core>

#include "gplab/gp.hpp"

namespace gplab {

/// Operator kernel on the k-particle grid.
///
/// `matrix(a, b) = gamma(x_a, x_b) * (dx)^{k d}`: the operator in the orthonormal
/// discrete basis, so the matrix trace is the operator trace and its eigenvalues
/// are occupation numbers. Indices are row-major over (particle 1, ..., particle k),
/// each particle contributing grid.size() values.
struct Kernel {
  int k = 1;
  GridSpec grid;
  Eigen::MatrixXcd matrix;

  Eigen::Index dimension() const noexcept { return matrix.rows(); }
};

/// A k-particle marginal: Hermitian, unit trace, nonnegative spectrum.
using DensityMatrix = Kernel;

/// Largest number of matrix entries a dense kernel may hold (same cap as states).
inline constexpr std::size_t kMaxKernelEntries = std::size_t{1} << 28;

/// Number of grid points of the k-particle grid; throws ConfigError if the
/// dense kernel would exceed kMaxKernelEntries.
Eigen::Index kernel_dimension(const GridSpec& grid, int k);

/// |phi><phi|^{tensor k} as a dense kernel.
Kernel projector(const WaveFunction& phi, int k = 1);

/// Tr over the last particle: (k+1)-kernel -> k-kernel.
Kernel partial_trace_last(const Kernel& gamma);

Complex trace(const Kernel& gamma);

struct DensityDefects {
  double hermiticity = 0.0;     ///< max |K - K^dagger|
  double trace_error = 0.0;     ///< |Tr K - 1|
  double min_eigenvalue = 0.0;  ///< smallest eigenvalue of the Hermitian part
};

DensityDefects density_defects(const DensityMatrix& gamma);

struct Spectrum {
  Eigen::VectorXd values;   ///< descending
  Eigen::MatrixXcd vectors; ///< columns; first component of magnitude > 1e-12 made real positive
};

/// Eigen-decomposition of the Hermitian part; ties keep the solver's order after a
/// stable sort by value.
Spectrum spectrum(const DensityMatrix& gamma);

/// <phi, gamma phi>, the condensate fraction of a one-particle marginal.
double condensate_overlap(const DensityMatrix& gamma1, const WaveFunction& phi);

}  // namespace gplab

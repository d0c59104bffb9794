#include "gplab/density_matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gplab/errors.hpp"

namespace gplab {

Eigen::Index kernel_dimension(const GridSpec& grid, int k) {
  if (k < 1) throw DomainError("kernel: k must be >= 1");
  std::size_t n = 1;
  for (int p = 0; p < k; ++p) {
    n *= grid.size();
    if (n > (std::size_t{1} << 14) * (std::size_t{1} << 14)) break;
  }
  if (n * n > kMaxKernelEntries || n > (std::size_t{1} << 14)) {
    throw ConfigError("kernel: dense " + std::to_string(k) +
                      "-particle kernel exceeds the 2^28-entry memory budget");
  }
  return static_cast<Eigen::Index>(n);
}

Kernel projector(const WaveFunction& phi, int k) {
  const Eigen::Index n = kernel_dimension(phi.grid, k);
  Eigen::VectorXcd v = phi.values * std::sqrt(phi.grid.cell_volume());
  Eigen::VectorXcd full = v;
  for (int p = 1; p < k; ++p) {
    Eigen::VectorXcd next(full.size() * v.size());
    for (Eigen::Index a = 0; a < full.size(); ++a) next.segment(a * v.size(), v.size()) = full(a) * v;
    full = std::move(next);
  }
  Kernel out{k, phi.grid, Eigen::MatrixXcd(n, n)};
  out.matrix.noalias() = full * full.adjoint();
  return out;
}

Kernel partial_trace_last(const Kernel& gamma) {
  if (gamma.k < 2) throw DomainError("partial_trace_last: need k >= 2");
  const auto s = static_cast<Eigen::Index>(gamma.grid.size());
  const Eigen::Index n = gamma.dimension() / s;
  Kernel out{gamma.k - 1, gamma.grid, Eigen::MatrixXcd::Zero(n, n)};
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      Complex acc = 0.0;
      for (Eigen::Index c = 0; c < s; ++c) acc += gamma.matrix(a * s + c, b * s + c);
      out.matrix(a, b) = acc;
    }
  }
  return out;
}

Complex trace(const Kernel& gamma) { return gamma.matrix.trace(); }

DensityDefects density_defects(const DensityMatrix& gamma) {
  DensityDefects d;
  d.hermiticity = (gamma.matrix - gamma.matrix.adjoint()).cwiseAbs().maxCoeff();
  d.trace_error = std::abs(trace(gamma) - 1.0);
  const Eigen::MatrixXcd herm = 0.5 * (gamma.matrix + gamma.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = solver.eigenvalues().minCoeff();
  return d;
}

Spectrum spectrum(const DensityMatrix& gamma) {
  const Eigen::MatrixXcd herm = 0.5 * (gamma.matrix + gamma.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
  if (solver.info() != Eigen::Success) throw SolverError("spectrum: eigen-decomposition failed");
  const Eigen::Index n = herm.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });
  Spectrum s{Eigen::VectorXd(n), Eigen::MatrixXcd(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    s.values(j) = ev(src);
    Eigen::VectorXcd v = solver.eigenvectors().col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        v *= std::conj(v(i)) / std::abs(v(i));
        break;
      }
    }
    s.vectors.col(j) = v;
  }
  return s;
}

double condensate_overlap(const DensityMatrix& gamma1, const WaveFunction& phi) {
  if (gamma1.k != 1 || !(gamma1.grid == phi.grid) ||
      gamma1.dimension() != static_cast<Eigen::Index>(phi.grid.size())) {
    throw DomainError("condensate_overlap: grid mismatch");
  }
  const Eigen::VectorXcd v = phi.values * std::sqrt(phi.grid.cell_volume());
  return v.dot(gamma1.matrix * v).real();
}

}  // namespace gplab

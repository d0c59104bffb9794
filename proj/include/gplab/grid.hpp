#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <functional>

namespace gplab {

using Complex = std::complex<double>;
using Field = Eigen::VectorXcd;

/// Periodic cubic grid: `points` nodes per axis on [-L/2, L/2).
/// Node j sits at -L/2 + j * L / points, so index points/2 is the origin.
struct GridSpec {
  int dim = 1;
  int points = 1024;
  double box_length = 20.0;

  double spacing() const noexcept { return box_length / points; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept;
  double coordinate(int j) const noexcept { return -0.5 * box_length + j * spacing(); }
  /// Coordinates of the flat row-major index (unused axes are 0).
  std::array<double, 3> position(std::size_t index) const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws ConfigError unless 1 <= dim <= 3, points >= 8 is a power of two, L > 0.
void validate(const GridSpec& grid);

/// Default grid for a dimension: 1024 points (d = 1), 128 (d = 2), 64^3 (d = 3).
GridSpec default_grid(int dim, double box_length);

/// |k|^2 at every node of the (dim * copies)-axis product grid, row-major FFT order.
Eigen::ArrayXd squared_wavenumbers(const GridSpec& grid, int copies = 1);

/// sum |f_i|^2, accumulated in blocks with compensated summation across blocks.
double squared_norm(const Field& f);

/// Fills values(i) = fn(position(i)).
Field sample(const GridSpec& grid, const std::function<Complex(const std::array<double, 3>&)>& fn);

}  // namespace gplab

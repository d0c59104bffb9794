#include "gplab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gplab/errors.hpp"
#include "gplab/fft.hpp"

namespace gplab {

double GridSpec::cell_volume() const noexcept { return std::pow(spacing(), dim); }

std::size_t GridSpec::size() const noexcept {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points);
  return n;
}

std::array<double, 3> GridSpec::position(std::size_t index) const noexcept {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  const auto m = static_cast<std::size_t>(points);
  for (int a = dim - 1; a >= 0; --a) {
    x[static_cast<std::size_t>(a)] = coordinate(static_cast<int>(index % m));
    index /= m;
  }
  return x;
}

void validate(const GridSpec& grid) {
  if (grid.dim < 1 || grid.dim > 3) throw ConfigError("grid: dim must be 1, 2 or 3");
  if (grid.points < 8 || !std::has_single_bit(static_cast<unsigned>(grid.points))) {
    throw ConfigError("grid: points per axis must be a power of two >= 8");
  }
  if (!(grid.box_length > 0.0) || !std::isfinite(grid.box_length)) {
    throw ConfigError("grid: box_length must be > 0");
  }
}

GridSpec default_grid(int dim, double box_length) {
  const int points = dim == 1 ? 1024 : (dim == 2 ? 128 : 64);
  return {dim, points, box_length};
}

Eigen::ArrayXd squared_wavenumbers(const GridSpec& grid, int copies) {
  const auto k = wavenumbers(grid.points, grid.box_length);
  const int axes = grid.dim * copies;
  const auto m = static_cast<std::size_t>(grid.points);
  std::size_t total = 1;
  for (int a = 0; a < axes; ++a) total *= m;
  Eigen::ArrayXd k2(static_cast<Eigen::Index>(total));
  // Built axis by axis: k2 over the first a+1 axes from the first a.
  k2(0) = 0.0;
  std::size_t block = 1;
  for (int a = 0; a < axes; ++a) {
    for (std::size_t j = m; j-- > 0;) {
      const double kj2 = k[j] * k[j];
      for (std::size_t i = 0; i < block; ++i) {
        k2(static_cast<Eigen::Index>(j * block + i)) = k2(static_cast<Eigen::Index>(i)) + kj2;
      }
    }
    block *= m;
  }
  // |k|^2 is symmetric in the axes, so the digit order of the construction is irrelevant.
  return k2;
}

Field sample(const GridSpec& grid, const std::function<Complex(const std::array<double, 3>&)>& fn) {
  Field out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out(static_cast<Eigen::Index>(i)) = fn(grid.position(i));
  return out;
}

double squared_norm(const Field& f) {
  constexpr Eigen::Index kBlock = 256;
  double sum = 0.0, carry = 0.0;
  for (Eigen::Index i = 0; i < f.size(); i += kBlock) {
    const double part = f.segment(i, std::min(kBlock, f.size() - i)).squaredNorm();
    const double t = sum + part;
    carry += std::abs(sum) >= std::abs(part) ? (sum - t) + part : (part - t) + sum;
    sum = t;
  }
  return sum + carry;
}

}  // namespace gplab

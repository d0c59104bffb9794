#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gplab {

/// V(r) = height for r <= radius. Discontinuous; admitted because its
/// scattering length is known in closed form.
struct Barrier {
  double height;
  double radius;
};

/// V(r) = height * exp(-r^2 / width^2), truncated to zero beyond the cutoff.
struct Gaussian {
  double height;
  double width;
};

/// Cubic spline through (radius, value) nodes. The last node sits at the
/// cutoff with value 0 and zero slope; the left end is natural.
struct Table {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> second_derivatives;  // spline moments, filled on construction
};

/// Repulsive, radial, compactly supported pair potential.
///
/// Models are immutable. Scaled members of the family are represented as
/// V(r) = amplitude * shape(length_scale * r) so that composing scalings
/// multiplies integer factors and stays exact.
class PotentialModel {
 public:
  using Shape = std::variant<Barrier, Gaussian, Table>;

  static PotentialModel zero();
  static PotentialModel barrier(double height, double radius);
  static PotentialModel gaussian(double height, double width, double cutoff = 0.0);
  static PotentialModel table(std::vector<double> radii, std::vector<double> values,
                              double cutoff = 0.0);
  /// Two-column CSV `radius,value` with a header row; radii strictly increasing.
  static PotentialModel table_from_csv(const std::filesystem::path& path, double cutoff = 0.0);

  double operator()(double r) const;

  double cutoff_radius() const noexcept { return base_cutoff_ / length_scale_; }
  double amplitude() const noexcept { return amplitude_; }
  double length_scale() const noexcept { return length_scale_; }
  const Shape& shape() const noexcept { return shape_; }
  bool is_zero() const noexcept;

  /// Radii at which the profile may lose smoothness (0, knots, cutoff), scaled.
  std::vector<double> breakpoints() const;

  /// Returns a copy with V'(r) = amp * V(len * r).
  PotentialModel rescaled(double amp, double len) const;

 private:
  PotentialModel(Shape shape, double cutoff) : shape_(std::move(shape)), base_cutoff_(cutoff) {}
  double shape_value(double x) const;

  Shape shape_;
  double base_cutoff_;
  double amplitude_ = 1.0;
  double length_scale_ = 1.0;
};

/// V_N(r) = N^2 V(N r); the support shrinks to cutoff/N.
PotentialModel scale_potential(const PotentialModel& v, long n);

/// One-dimensional mean-field analog V_N(x) = N V(N x), used by the 1D harness.
PotentialModel scale_potential_analog1d(const PotentialModel& v, long n);

/// b0 = integral of V over R^3 = 4 pi int_0^inf V(r) r^2 dr.
double born_coupling(const PotentialModel& v);

/// One-dimensional Born coupling int_R V(|x|) dx = 2 int_0^inf V(r) dr.
double born_coupling_1d(const PotentialModel& v);

/// alpha = 4 pi int_0^inf V(r) r dr + sup_r r^2 V(r).
double alpha_strength(const PotentialModel& v);

/// External trap V_ext(r) = omega^2 |r|^2 (kinetic operator is -Laplacian).
struct TrapModel {
  enum class Kind { none, harmonic };
  Kind kind = Kind::none;
  double omega = 0.0;

  static TrapModel none() { return {}; }
  static TrapModel harmonic(double omega);

  bool confining() const noexcept { return kind != Kind::none; }
  double operator()(std::span<const double> position) const noexcept;
};

}  // namespace gplab

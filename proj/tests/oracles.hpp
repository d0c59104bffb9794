#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Closed-form zero-energy scattering length of a square barrier of height v0, radius r.
inline double barrier_a0(double v0, double r) {
  const double k = std::sqrt(v0 / 2.0);
  return r - std::tanh(k * r) / k;
}

struct Shot {
  double a0;
  double sigma;  // 4 pi int V f r^2 dr
};

// u'' = V u / 2 on a uniform mesh by classical RK4, integrated in long double. The
// coupling integral is accumulated with Simpson's rule on the same nodes.
inline Shot shoot(const std::function<double(double)>& v, double support, int steps) {
  using R = long double;
  const R h = static_cast<R>(support) / steps;
  R u = 0, du = 1, integral = 0;
  auto f = [&](R r, R uu) { return static_cast<R>(0.5) * static_cast<R>(v(static_cast<double>(r))) * uu; };
  std::vector<R> g(static_cast<std::size_t>(steps) + 1);
  g[0] = 0;
  for (int i = 0; i < steps; ++i) {
    const R r = i * h;
    const R k1u = du, k1d = f(r, u);
    const R k2u = du + h / 2 * k1d, k2d = f(r + h / 2, u + h / 2 * k1u);
    const R k3u = du + h / 2 * k2d, k3d = f(r + h / 2, u + h / 2 * k2u);
    const R k4u = du + h * k3d, k4d = f(r + h, u + h * k3u);
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    du += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
    const R rr = (i + 1) * h;
    g[static_cast<std::size_t>(i) + 1] = static_cast<R>(v(static_cast<double>(rr))) * u * rr;
  }
  for (int i = 0; i <= steps; ++i) {
    const R w = (i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2);
    integral += w * g[static_cast<std::size_t>(i)];
  }
  integral *= h / 3;
  // normalize so that u -> r - a0 outside the support
  const R a0 = static_cast<R>(support) - u / du;
  return {static_cast<double>(a0), static_cast<double>(4 * static_cast<R>(pi) * integral / du)};
}

// Richardson-extrapolated shot (RK4: error ~ h^4; Simpson: h^4).
inline Shot shoot_extrapolated(const std::function<double(double)>& v, double support, int steps) {
  const Shot a = shoot(v, support, steps), b = shoot(v, support, 2 * steps);
  return {b.a0 + (b.a0 - a.a0) / 15.0, b.sigma + (b.sigma - a.sigma) / 15.0};
}

// Ground-state energy of -Laplacian + omega^2 |x|^2 in d dimensions.
inline double oscillator_ground_energy(int dim, double omega) { return dim * omega; }

// exp(i t d^2/dx^2) applied to exp(-x^2 / (2 w^2)) (unnormalized), in one dimension.
inline std::complex<double> free_gaussian_1d(double x, double w, double t) {
  const std::complex<double> s = w * w + std::complex<double>(0.0, 2.0 * t);
  return std::sqrt(w * w / s) * std::exp(-x * x / (2.0 * s));
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle

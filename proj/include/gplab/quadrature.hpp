#pragma once

#include <functional>
#include <span>

namespace gplab {

using RealFunction = std::function<double(double)>;

/// Single 15-point Gauss-Kronrod panel on [a, b]; `error` receives |K15 - G7|.
double gauss_kronrod15(const RealFunction& f, double a, double b, double* error = nullptr);

/// Adaptive Gauss-Kronrod integration by bisection until the summed error
/// estimate is below max(rel_tol * |I|, abs_tol).
double integrate(const RealFunction& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-300);

/// Adaptive integration over consecutive panels [p0, p1], [p1, p2], ...
/// Breakpoints must be nondecreasing; discontinuities belong on breakpoints.
double integrate_piecewise(const RealFunction& f, std::span<const double> breakpoints,
                           double rel_tol = 1e-10);

}  // namespace gplab

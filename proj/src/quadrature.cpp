#include "gplab/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "gplab/errors.hpp"

namespace gplab {
namespace {

// Kronrod nodes on [0, 1] (symmetric half) and weights.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

Panel make_panel(const RealFunction& f, double a, double b) {
  double err = 0.0;
  const double v = gauss_kronrod15(f, a, b, &err);
  return {a, b, v, err};
}

}  // namespace

double gauss_kronrod15(const RealFunction& f, double a, double b, double* error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[static_cast<std::size_t>(i)];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrod[static_cast<std::size_t>(i)] * sum;
    if (i % 2 == 1) gauss += kGauss[static_cast<std::size_t>(i / 2)] * sum;
  }
  if (error) *error = std::abs((kronrod - gauss) * half);
  return kronrod * half;
}

double integrate(const RealFunction& f, double a, double b, double rel_tol, double abs_tol) {
  if (a == b) return 0.0;
  std::vector<Panel> panels{make_panel(f, a, b)};
  constexpr int kMaxPanels = 20000;
  while (true) {
    double total = 0.0, total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      total_err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    if (total_err <= std::max(rel_tol * std::abs(total), abs_tol)) return total;
    if (static_cast<int>(panels.size()) >= kMaxPanels) {
      throw SolverError("integrate: adaptive quadrature did not reach tolerance", total_err);
    }
    const Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) return total;  // panel exhausted double precision
    panels[worst] = make_panel(f, p.a, mid);
    panels.push_back(make_panel(f, mid, p.b));
  }
}

double integrate_piecewise(const RealFunction& f, std::span<const double> breakpoints,
                           double rel_tol) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] < breakpoints[i]) {
      throw DomainError("integrate_piecewise: breakpoints must be nondecreasing");
    }
    total += integrate(f, breakpoints[i], breakpoints[i + 1], rel_tol);
  }
  return total;
}

}  // namespace gplab

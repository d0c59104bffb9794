#include "gplab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gplab/errors.hpp"
#include "gplab/quadrature.hpp"

namespace gplab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-10;

void check_finite_nonnegative(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0) throw ConfigError(std::string("potential: invalid ") + what);
}

// Natural at the left end, zero slope at the right end.
std::vector<double> spline_moments(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> diag(n), upper(n), lower(n), rhs(n);
  diag[0] = 1.0;
  upper[0] = 0.0;
  rhs[0] = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    lower[i] = h0;
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  const double hl = x[n - 1] - x[n - 2];
  lower[n - 1] = hl;
  diag[n - 1] = 2.0 * hl;
  rhs[n - 1] = 6.0 * (0.0 - (y[n - 1] - y[n - 2]) / hl);
  // Thomas algorithm.
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> m(n);
  m[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
  return m;
}

double spline_eval(const Table& t, double x) {
  const auto& r = t.radii;
  if (x <= r.front()) return t.values.front();
  if (x >= r.back()) return t.values.back();
  const auto it = std::upper_bound(r.begin(), r.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
  const double h = r[i + 1] - r[i];
  const double a = r[i + 1] - x;
  const double b = x - r[i];
  const double mi = t.second_derivatives[i];
  const double mj = t.second_derivatives[i + 1];
  return mi * a * a * a / (6.0 * h) + mj * b * b * b / (6.0 * h) +
         (t.values[i] / h - mi * h / 6.0) * a + (t.values[i + 1] / h - mj * h / 6.0) * b;
}

}  // namespace

PotentialModel PotentialModel::zero() { return PotentialModel(Barrier{0.0, 1.0}, 1.0); }

PotentialModel PotentialModel::barrier(double height, double radius) {
  check_finite_nonnegative(height, "barrier height");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("potential: barrier radius must be > 0");
  return PotentialModel(Barrier{height, radius}, radius);
}

PotentialModel PotentialModel::gaussian(double height, double width, double cutoff) {
  check_finite_nonnegative(height, "gaussian height");
  if (!(width > 0.0) || !std::isfinite(width)) throw ConfigError("potential: gaussian width must be > 0");
  if (cutoff == 0.0) cutoff = 6.0 * width;
  if (!(cutoff > 0.0)) throw ConfigError("potential: cutoff must be > 0");
  return PotentialModel(Gaussian{height, width}, cutoff);
}

PotentialModel PotentialModel::table(std::vector<double> radii, std::vector<double> values,
                                     double cutoff) {
  if (radii.size() != values.size() || radii.size() < 2) {
    throw ConfigError("potential: table needs at least two (radius, value) pairs");
  }
  if (radii.front() < 0.0) throw ConfigError("potential: table radii must be >= 0");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    check_finite_nonnegative(values[i], "table value");
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      throw ConfigError("potential: table radii must be strictly increasing");
    }
  }
  if (cutoff == 0.0) cutoff = radii.back();
  if (cutoff < radii.back()) throw ConfigError("potential: cutoff lies inside the table");
  if (cutoff > radii.back()) {
    radii.push_back(cutoff);
    values.push_back(0.0);
  } else if (values.back() != 0.0) {
    throw ConfigError("potential: table value at the cutoff must be 0");
  }
  Table t{std::move(radii), std::move(values), {}};
  t.second_derivatives = spline_moments(t.radii, t.values);
  return PotentialModel(std::move(t), cutoff);
}

PotentialModel PotentialModel::table_from_csv(const std::filesystem::path& path, double cutoff) {
  std::ifstream in(path);
  if (!in) throw ConfigError("potential: cannot open table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("potential: empty table file " + path.string());
  std::vector<double> radii, values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw ConfigError("potential: malformed table row '" + line + "'");
    }
    try {
      radii.push_back(std::stod(a));
      values.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw ConfigError("potential: malformed table row '" + line + "'");
    }
  }
  return table(std::move(radii), std::move(values), cutoff);
}

bool PotentialModel::is_zero() const noexcept {
  if (amplitude_ == 0.0) return true;
  return std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Table>) {
          return std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 0.0; });
        } else {
          return s.height == 0.0;
        }
      },
      shape_);
}

double PotentialModel::shape_value(double x) const {
  return std::visit(
      [x](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Barrier>) {
          return x <= s.radius ? s.height : 0.0;
        } else if constexpr (std::is_same_v<S, Gaussian>) {
          return s.height * std::exp(-(x * x) / (s.width * s.width));
        } else {
          return std::max(0.0, spline_eval(s, x));
        }
      },
      shape_);
}

double PotentialModel::operator()(double r) const {
  if (r < 0.0 || std::isnan(r)) throw DomainError("potential: radius must be >= 0");
  if (r > cutoff_radius()) return 0.0;
  // Clamp so that r == cutoff maps inside the support despite rounding in r * len.
  const double x = std::min(r * length_scale_, base_cutoff_);
  return amplitude_ * shape_value(x);
}

std::vector<double> PotentialModel::breakpoints() const {
  std::vector<double> pts{0.0};
  if (const auto* t = std::get_if<Table>(&shape_)) {
    for (double r : t->radii) {
      if (r > 0.0) pts.push_back(r / length_scale_);
    }
  }
  if (pts.back() < cutoff_radius()) pts.push_back(cutoff_radius());
  return pts;
}

PotentialModel PotentialModel::rescaled(double amp, double len) const {
  PotentialModel out = *this;
  out.amplitude_ = amplitude_ * amp;
  out.length_scale_ = length_scale_ * len;
  return out;
}

PotentialModel scale_potential(const PotentialModel& v, long n) {
  if (n < 1) throw DomainError("scale_potential: N must be >= 1");
  const double s = static_cast<double>(n);
  return v.rescaled(s * s, s);
}

PotentialModel scale_potential_analog1d(const PotentialModel& v, long n) {
  if (n < 1) throw DomainError("scale_potential_analog1d: N must be >= 1");
  const double s = static_cast<double>(n);
  return v.rescaled(s, s);
}

double born_coupling(const PotentialModel& v) {
  if (v.is_zero()) return 0.0;
  const auto pts = v.breakpoints();
  return 4.0 * kPi * integrate_piecewise([&v](double r) { return v(r) * r * r; }, pts, kQuadTol);
}

double born_coupling_1d(const PotentialModel& v) {
  if (v.is_zero()) return 0.0;
  const auto pts = v.breakpoints();
  return 2.0 * integrate_piecewise([&v](double r) { return v(r); }, pts, kQuadTol);
}

double alpha_strength(const PotentialModel& v) {
  if (v.is_zero()) return 0.0;
  const auto pts = v.breakpoints();
  const double integral =
      4.0 * kPi * integrate_piecewise([&v](double r) { return v(r) * r; }, pts, kQuadTol);

  // sup r^2 V(r): dense sampling (including breakpoints) then golden-section refinement.
  const double rc = v.cutoff_radius();
  const auto g = [&v](double r) { return r * r * v(r); };
  constexpr int kSamples = 4000;
  double best_r = rc, best = g(rc);
  for (int i = 0; i <= kSamples; ++i) {
    const double r = rc * static_cast<double>(i) / kSamples;
    const double val = g(r);
    if (val > best) best = val, best_r = r;
  }
  for (double r : pts) {
    if (g(r) > best) best = g(r), best_r = r;
  }
  double lo = std::max(0.0, best_r - rc / kSamples);
  double hi = std::min(rc, best_r + rc / kSamples);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * rc; ++it) {
    if (f1 < f2) {
      lo = x1, x1 = x2, f1 = f2, x2 = lo + phi * (hi - lo), f2 = g(x2);
    } else {
      hi = x2, x2 = x1, f2 = f1, x1 = hi - phi * (hi - lo), f1 = g(x1);
    }
  }
  best = std::max({best, f1, f2});
  return integral + best;
}

TrapModel TrapModel::harmonic(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("trap: omega must be > 0");
  return {Kind::harmonic, omega};
}

double TrapModel::operator()(std::span<const double> position) const noexcept {
  if (kind == Kind::none) return 0.0;
  double r2 = 0.0;
  for (double x : position) r2 += x * x;
  return omega * omega * r2;
}

}  // namespace gplab

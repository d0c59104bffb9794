#include "gplab/gp.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gplab/errors.hpp"
#include "gplab/fft.hpp"

namespace gplab {
namespace {

constexpr double kPi = std::numbers::pi;

FftPlan grid_plan(const GridSpec& grid) {
  return FftPlan(std::vector<int>(static_cast<std::size_t>(grid.dim), grid.points));
}

double sum_abs2(const Field& f) { return squared_norm(f); }

void check_finite(const Field& f, const char* where) {
  if (!std::isfinite(f.squaredNorm())) throw SolverError(std::string(where) + ": non-finite state");
}

// Energy from the real-space field and its (unnormalized) Fourier transform.
double energy_from(const Field& values, const Field& spectrum, const Eigen::ArrayXd& k2,
                   const Eigen::ArrayXd& trap, double a0, const GridSpec& grid) {
  const double dv = grid.cell_volume();
  const double n = static_cast<double>(grid.size());
  const Eigen::ArrayXd dens = values.cwiseAbs2().array();
  const double kinetic = (k2 * spectrum.cwiseAbs2().array()).sum() * dv / n;
  const double external = (trap * dens).sum() * dv;
  const double quartic = 4.0 * kPi * a0 * dens.square().sum() * dv;
  return kinetic + external + quartic;
}

Eigen::ArrayXd trap_on_grid(const GridSpec& grid, const TrapModel& trap) {
  Eigen::ArrayXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    v(static_cast<Eigen::Index>(i)) = trap(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim)));
  }
  return v;
}

}  // namespace

WaveFunction make_wavefunction(const GridSpec& grid, Field values) {
  validate(grid);
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw ConfigError("wavefunction: value count does not match grid");
  }
  WaveFunction phi{grid, std::move(values)};
  normalize(phi);
  return phi;
}

double l2_norm(const WaveFunction& phi) { return std::sqrt(sum_abs2(phi.values) * phi.grid.cell_volume()); }

void normalize(WaveFunction& phi) {
  const double n = l2_norm(phi);
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("wavefunction: cannot normalize a zero or non-finite field");
  phi.values /= n;
}

Complex inner(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid)) throw DomainError("inner: grid mismatch");
  return a.values.dot(b.values) * a.grid.cell_volume();
}

WaveFunction gaussian_state(const GridSpec& grid, double width, const std::array<double, 3>& center,
                            const std::array<double, 3>& momentum) {
  if (!(width > 0.0)) throw DomainError("gaussian_state: width must be > 0");
  auto values = sample(grid, [&](const std::array<double, 3>& x) {
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const double dx = x[ua] - center[ua];
      r2 += dx * dx;
      phase += momentum[ua] * x[ua];
    }
    return std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, phase);
  });
  return make_wavefunction(grid, std::move(values));
}

WaveFunction plane_wave(const GridSpec& grid, const std::array<int, 3>& modes) {
  const double amp = std::pow(grid.box_length, -0.5 * grid.dim);
  auto values = sample(grid, [&](const std::array<double, 3>& x) {
    double phase = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      phase += 2.0 * kPi * modes[ua] * x[ua] / grid.box_length;
    }
    return std::polar(amp, phase);
  });
  validate(grid);
  return WaveFunction{grid, std::move(values)};
}

double kinetic_energy(const WaveFunction& phi) {
  Field spec = phi.values;
  grid_plan(phi.grid).forward(spec.data());
  const auto k2 = squared_wavenumbers(phi.grid);
  return (k2 * spec.cwiseAbs2().array()).sum() * phi.grid.cell_volume() /
         static_cast<double>(phi.grid.size());
}

double sobolev_h1_product(const WaveFunction& u, const WaveFunction& v) {
  if (!(u.grid == v.grid)) throw DomainError("sobolev_h1_product: grid mismatch");
  Field su = u.values, sv = v.values;
  const auto plan = grid_plan(u.grid);
  plan.forward(su.data());
  plan.forward(sv.data());
  const auto k2 = squared_wavenumbers(u.grid);
  const Complex s = (sv.conjugate().array() * (1.0 + k2) * su.array()).sum();
  return s.real() * u.grid.cell_volume() / static_cast<double>(u.grid.size());
}

void free_propagate_field(Field& values, const GridSpec& grid, double t) {
  if (t == 0.0) return;
  const auto plan = grid_plan(grid);
  const auto k2 = squared_wavenumbers(grid);
  plan.forward(values.data());
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) *= std::polar(1.0, -k2(i) * t);
  plan.inverse(values.data());
}

double gp_energy(const WaveFunction& phi, double a0, const TrapModel& trap) {
  Field spec = phi.values;
  grid_plan(phi.grid).forward(spec.data());
  return energy_from(phi.values, spec, squared_wavenumbers(phi.grid), trap_on_grid(phi.grid, trap),
                     a0, phi.grid);
}

namespace {

template <class Visit>
WaveFunction split_step(const WaveFunction& phi0, double sigma, double t, double dt, Visit visit) {
  if (!(dt > 0.0)) throw DomainError("evolve_gp: dt must be > 0");
  WaveFunction phi = phi0;
  visit(phi);
  if (t == 0.0) return phi;
  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t) / dt * (1.0 - 1e-12))));
  const double h = t / static_cast<double>(steps);
  const double peak = phi.values.cwiseAbs2().maxCoeff();
  if (std::abs(sigma * h) * peak > 1.0) {
    std::ostringstream msg;
    msg << "evolve_gp: nonlinear phase per step " << std::abs(sigma * h) * peak
        << " rad exceeds 1; reduce dt";
    warn(msg.str());
  }
  const auto plan = grid_plan(phi.grid);
  const auto k2 = squared_wavenumbers(phi.grid);
  const Field half = (k2 * (-0.5 * h)).unaryExpr([](double a) { return std::polar(1.0, a); }).matrix();
  const Field full = half.cwiseProduct(half);
  Field& v = phi.values;
  plan.forward(v.data());
  v.array() *= half.array();
  plan.inverse(v.data());
  for (long s = 0; s < steps; ++s) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) *= std::polar(1.0, -sigma * std::norm(v(i)) * h);
    plan.forward(v.data());
    if (s + 1 == steps) {
      v.array() *= half.array();
      plan.inverse(v.data());
      check_finite(v, "evolve_gp");
      visit(phi);
    } else {
      if constexpr (Visit::wants_states) {
        Field mid = v;
        mid.array() *= half.array();
        plan.inverse(mid.data());
        WaveFunction snap{phi.grid, std::move(mid)};
        check_finite(snap.values, "evolve_gp");
        visit(snap);
      }
      v.array() *= full.array();
      plan.inverse(v.data());
    }
  }
  return phi;
}

struct NoVisit {
  static constexpr bool wants_states = false;
  void operator()(const WaveFunction&) const {}
};

struct Record {
  static constexpr bool wants_states = true;
  std::vector<WaveFunction>* out;
  void operator()(const WaveFunction& w) const { out->push_back(w); }
};

}  // namespace

WaveFunction evolve_gp(const WaveFunction& phi0, double sigma, double t, double dt) {
  return split_step(phi0, sigma, t, dt, NoVisit{});
}

std::vector<WaveFunction> evolve_gp_trajectory(const WaveFunction& phi0, double sigma, double t,
                                               double dt) {
  std::vector<WaveFunction> out;
  split_step(phi0, sigma, t, dt, Record{&out});
  return out;
}

namespace {

struct FlowWorkspace {
  FftPlan plan;
  Eigen::ArrayXd k2;
  Eigen::ArrayXd trap;
};

// Returns the new normalized state and its energy.
std::pair<WaveFunction, double> flow_step(const WaveFunction& phi, const FlowWorkspace& ws,
                                          double a0, double tau) {
  const Eigen::ArrayXd dens = phi.values.cwiseAbs2().array();
  const Eigen::ArrayXd w = ws.trap + 8.0 * kPi * a0 * dens;
  const double shift = 0.5 * (w.maxCoeff() + w.minCoeff());
  // chemical potential <phi, (-Laplacian + W) phi>, so that eigenfunctions are fixed points
  Field current = phi.values;
  ws.plan.forward(current.data());
  const double dv = phi.grid.cell_volume();
  const double mu = ((ws.k2 * current.cwiseAbs2().array()).sum() / static_cast<double>(phi.grid.size()) +
                     (w * dens).sum()) * dv / (dens.sum() * dv);
  Field next = ((1.0 / tau + shift + mu - w) * phi.values.array()).matrix();
  ws.plan.forward(next.data());
  next.array() /= (1.0 / tau + shift + ws.k2);
  Field spectrum = next;
  ws.plan.inverse(next.data());
  const double norm = std::sqrt(squared_norm(next) * phi.grid.cell_volume());
  if (!(norm > 0.0) || !std::isfinite(norm)) throw SolverError("minimize_gp: flow step produced a degenerate state");
  next /= norm;
  spectrum /= norm;
  const double e = energy_from(next, spectrum, ws.k2, ws.trap, a0, phi.grid);
  return {WaveFunction{phi.grid, std::move(next)}, e};
}

}  // namespace

WaveFunction gradient_flow_step(const WaveFunction& phi, const TrapModel& trap, double a0, double tau) {
  if (!(tau > 0.0)) throw DomainError("gradient_flow_step: tau must be > 0");
  const FlowWorkspace ws{grid_plan(phi.grid), squared_wavenumbers(phi.grid), trap_on_grid(phi.grid, trap)};
  return flow_step(phi, ws, a0, tau).first;
}

GroundState minimize_gp(const TrapModel& trap, double a0, const GridSpec& grid, double tol,
                        const GroundStateOptions& options) {
  validate(grid);
  if (!trap.confining()) throw ConfigError("minimize_gp: trap must be confining");
  if (a0 < 0.0) throw DomainError("minimize_gp: a0 must be >= 0");
  if (!(tol > 0.0)) throw DomainError("minimize_gp: tol must be > 0");

  const FlowWorkspace ws{grid_plan(grid), squared_wavenumbers(grid), trap_on_grid(grid, trap)};
  GroundState gs;
  gs.phi = options.initial ? *options.initial : gaussian_state(grid, grid.box_length / 8.0);
  if (!(gs.phi.grid == grid)) throw ConfigError("minimize_gp: initial state grid mismatch");
  normalize(gs.phi);
  gs.energy = gp_energy(gs.phi, a0, trap);
  gs.energy_history.push_back(gs.energy);

  const auto max_tau = [&](const WaveFunction& phi) {
    const Eigen::ArrayXd w = ws.trap + 8.0 * kPi * a0 * phi.values.cwiseAbs2().array();
    const double spread = w.maxCoeff() - w.minCoeff();
    return spread > 0.0 ? std::min(1.0, 1.0 / spread) : 1.0;
  };
  double tau = max_tau(gs.phi);
  double rate = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    auto [next, e] = flow_step(gs.phi, ws, a0, tau);
    const double decrease = gs.energy - e;
    if (decrease < 0.0) {
      if (-decrease <= 1e-14 * std::abs(gs.energy)) {
        gs.last_step = tau;
        return gs;  // stagnated at roundoff
      }
      tau *= 0.5;
      if (tau < options.min_step) {
        throw ConvergenceError("minimize_gp: step size underflow", -decrease);
      }
      continue;
    }
    gs.phi = std::move(next);
    gs.energy = e;
    gs.energy_history.push_back(e);
    gs.flow_time += tau;
    gs.iterations += 1;
    gs.last_step = tau;
    rate = decrease / tau;
    if (rate < tol) return gs;
    tau = std::min(max_tau(gs.phi), 1.25 * tau);
  }
  std::ostringstream msg;
  msg << "minimize_gp: iteration cap reached, energy decrease rate " << rate;
  throw ConvergenceError(msg.str(), rate);
}

}  // namespace gplab

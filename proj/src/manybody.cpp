#include "gplab/manybody.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/fft.hpp"
#include "lattice.hpp"

namespace gplab {
namespace {

using detail::Digits;
using detail::displacement_table;
using detail::for_each_config;

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

FftPlan state_plan(const GridSpec& g, int particles) {
  return FftPlan(std::vector<int>(static_cast<std::size_t>(g.dim * particles), g.points));
}

void check_state(const ManyBodyState& psi) {
  if (psi.particles < 1) throw DomainError("manybody: particle count must be >= 1");
  if (psi.size() != manybody_size(psi.grid, psi.particles)) {
    throw DomainError("manybody: amplitude count does not match grid and particle number");
  }
}

double partial_overlap(const ManyBodyState& psi, const WaveFunction& phi, int k) {
  check_state(psi);
  if (!(phi.grid == psi.grid)) throw DomainError("manybody: grid mismatch");
  if (k < 1 || k >= psi.particles) throw DomainError("factorization_distance: need 1 <= k < N");
  const Field lead = product_amplitudes(phi, k);
  const auto n1 = lead.size();
  const auto n2 = psi.values.size() / n1;
  RowMajorMap a(psi.values.data(), n1, n2);
  const double dv = psi.grid.cell_volume();
  const Eigen::VectorXcd xi = a.transpose() * lead.conjugate();
  const double xi2 = squared_norm(xi) * std::pow(dv, 2 * k) * std::pow(dv, psi.particles - k);
  const double norm2 = squared_norm(psi.values) * std::pow(dv, psi.particles);
  return xi2 / norm2;
}

}  // namespace

double ManyBodyState::cell_volume() const noexcept { return std::pow(grid.cell_volume(), particles); }

std::size_t manybody_size(const GridSpec& grid, int particles) {
  validate(grid);
  if (particles < 1) throw DomainError("manybody: particle count must be >= 1");
  std::size_t n = 1;
  for (int p = 0; p < particles; ++p) {
    n *= grid.size();
    if (n > kMaxAmplitudes) {
      throw ConfigError("manybody: " + std::to_string(particles) + " particles on " +
                        std::to_string(grid.points) + "^" + std::to_string(grid.dim) +
                        " points exceed the 2^28-amplitude memory budget");
    }
  }
  return n;
}

Field product_amplitudes(const WaveFunction& phi, int particles) {
  const std::size_t total = manybody_size(phi.grid, particles);
  Field out(static_cast<Eigen::Index>(total));
  for_each_config(phi.grid.size(), particles, [&](std::size_t flat, const std::size_t* s) {
    Complex v = 1.0;
    for (int p = 0; p < particles; ++p) v *= phi.values(static_cast<Eigen::Index>(s[p]));
    out(static_cast<Eigen::Index>(flat)) = v;
  });
  return out;
}

Field jastrow_amplitudes(const WaveFunction& phi, int particles,
                         const std::function<double(double)>& f) {
  Field out = product_amplitudes(phi, particles);
  const Digits digits(phi.grid);
  const auto ftab = displacement_table(phi.grid, f);
  for_each_config(phi.grid.size(), particles, [&](std::size_t flat, const std::size_t* s) {
    double w = 1.0;
    for (int i = 0; i < particles; ++i)
      for (int j = i + 1; j < particles; ++j) w *= ftab[digits.displacement(s[i], s[j])];
    out(static_cast<Eigen::Index>(flat)) *= w;
  });
  return out;
}

double l2_norm(const ManyBodyState& psi) {
  return std::sqrt(squared_norm(psi.values) * psi.cell_volume());
}

void normalize(ManyBodyState& psi) {
  const double n = l2_norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("manybody: cannot normalize a zero state");
  psi.values /= n;
}

ManyBodyState build_product(const WaveFunction& phi, int particles) {
  ManyBodyState psi{particles, phi.grid, product_amplitudes(phi, particles)};
  normalize(psi);
  return psi;
}

ManyBodyState build_jastrow_product(const WaveFunction& phi, int particles,
                                    const std::function<double(double)>& f) {
  ManyBodyState psi{particles, phi.grid, jastrow_amplitudes(phi, particles, f)};
  normalize(psi);
  return psi;
}

Eigen::ArrayXd potential_diagonal(const ManyBodyHamiltonian& h, const GridSpec& grid, int particles) {
  const std::size_t total = manybody_size(grid, particles);
  const std::size_t single = grid.size();
  std::vector<double> trap(single, 0.0);
  if (h.trap.confining()) {
    for (std::size_t s = 0; s < single; ++s) {
      const auto x = grid.position(s);
      trap[s] = h.trap(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim)));
    }
  }
  const bool pairs = !h.pair.is_zero() && particles > 1 && h.pair_weight != 0.0;
  std::vector<double> ptab;
  if (pairs) ptab = displacement_table(grid, [&](double r) { return h.pair_weight * h.pair(r); });
  const Digits digits(grid);
  Eigen::ArrayXd out(static_cast<Eigen::Index>(total));
  for_each_config(single, particles, [&](std::size_t flat, const std::size_t* s) {
    double v = 0.0;
    for (int p = 0; p < particles; ++p) v += trap[s[p]];
    if (pairs) {
      for (int i = 0; i < particles; ++i)
        for (int j = i + 1; j < particles; ++j) v += ptab[digits.displacement(s[i], s[j])];
    }
    out(static_cast<Eigen::Index>(flat)) = v;
  });
  return out;
}

ManyBodyState evolve_manybody(const ManyBodyState& psi0, const ManyBodyHamiltonian& h, double t,
                              double dt, int every,
                              const std::function<void(double, const ManyBodyState&)>& observer) {
  check_state(psi0);
  if (!(dt > 0.0)) throw DomainError("evolve_manybody: dt must be positive");
  if (!std::isfinite(t)) throw DomainError("evolve_manybody: t must be finite");
  ManyBodyState psi = psi0;
  if (observer) observer(0.0, psi);
  const long steps = static_cast<long>(std::ceil(std::abs(t) / dt - 1e-12));
  if (steps == 0) return psi;
  const double step = t / static_cast<double>(steps);

  const auto plan = state_plan(psi.grid, psi.particles);
  const Eigen::ArrayXd k2 = squared_wavenumbers(psi.grid, psi.particles);
  const Eigen::ArrayXcd half = (Complex(0.0, -0.5 * step) * k2.cast<Complex>()).exp();
  const Eigen::ArrayXd v = potential_diagonal(h, psi.grid, psi.particles);
  const Eigen::ArrayXcd kick = (Complex(0.0, -step) * v.cast<Complex>()).exp();
  Complex* data = psi.values.data();

  bool open = false;  // a kinetic half step is pending
  for (long n = 1; n <= steps; ++n) {
    plan.forward(data);
    psi.values.array() *= half;
    if (open) psi.values.array() *= half;
    plan.inverse(data);
    psi.values.array() *= kick;
    open = true;
    const bool last = n == steps;
    const bool report = observer && every > 0 && (n % every == 0 || last);
    if (last || report) {
      plan.forward(data);
      psi.values.array() *= half;
      plan.inverse(data);
      open = false;
      if (!psi.values.allFinite()) {
        throw SolverError("evolve_manybody: non-finite amplitudes", static_cast<double>(n));
      }
      if (report) observer(static_cast<double>(n) * step, psi);
    }
  }
  return psi;
}

ManyBodyState evolve_manybody(const ManyBodyState& psi0, const ManyBodyHamiltonian& h, double t,
                              double dt) {
  return evolve_manybody(psi0, h, t, dt, 0, {});
}

ManyBodyState evolve_manybody(const ManyBodyState& psi0, const PotentialModel& pair,
                              const TrapModel& trap, double t, double dt) {
  return evolve_manybody(psi0, ManyBodyHamiltonian{pair, trap, 1.0}, t, dt);
}

Field apply_hamiltonian(const ManyBodyState& psi, const ManyBodyHamiltonian& h) {
  check_state(psi);
  Field out = psi.values;
  const auto plan = state_plan(psi.grid, psi.particles);
  plan.forward(out.data());
  out.array() *= squared_wavenumbers(psi.grid, psi.particles);
  plan.inverse(out.data());
  out.array() += potential_diagonal(h, psi.grid, psi.particles) * psi.values.array();
  return out;
}

double energy_moment(const ManyBodyState& psi, const ManyBodyHamiltonian& h, int m) {
  if (m != 1 && m != 2) throw DomainError("energy_moment: m must be 1 or 2");
  const Field hpsi = apply_hamiltonian(psi, h);
  const double dv = psi.cell_volume();
  if (m == 1) return psi.values.dot(hpsi).real() * dv;
  return squared_norm(hpsi) * dv;
}

double symmetry_defect(const ManyBodyState& psi) {
  check_state(psi);
  const double scale = psi.values.cwiseAbs().maxCoeff();
  if (psi.particles < 2 || scale == 0.0) return 0.0;
  const std::size_t single = psi.grid.size();
  std::vector<std::size_t> stride(static_cast<std::size_t>(psi.particles), 1);
  for (int p = psi.particles - 2; p >= 0; --p) stride[p] = stride[p + 1] * single;
  double worst = 0.0;
  for_each_config(single, psi.particles, [&](std::size_t flat, const std::size_t* s) {
    const Complex a = psi.values(static_cast<Eigen::Index>(flat));
    for (int i = 0; i < psi.particles; ++i) {
      for (int j = i + 1; j < psi.particles; ++j) {
        const std::size_t partner = flat - s[i] * stride[i] - s[j] * stride[j] + s[j] * stride[i] +
                                    s[i] * stride[j];
        worst = std::max(worst, std::abs(a - psi.values(static_cast<Eigen::Index>(partner))));
      }
    }
  });
  return worst / scale;
}

DensityMatrix marginal(const ManyBodyState& psi, int k) {
  check_state(psi);
  if (k < 1 || k > psi.particles) throw DomainError("marginal: need 1 <= k <= N");
  const Eigen::Index n1 = kernel_dimension(psi.grid, k);
  const Eigen::Index n2 = psi.values.size() / n1;
  RowMajorMap a(psi.values.data(), n1, n2);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n1, n1);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(a);
  rho = rho.selfadjointView<Eigen::Lower>();
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw DomainError("marginal: zero state");
  rho /= tr;
  return DensityMatrix{k, psi.grid, std::move(rho)};
}

double condensate_overlap(const ManyBodyState& psi, const WaveFunction& phi) {
  if (psi.particles == 1) {
    if (!(phi.grid == psi.grid)) throw DomainError("manybody: grid mismatch");
    const Complex z = phi.values.dot(psi.values) * psi.grid.cell_volume();
    return std::norm(z) / std::pow(l2_norm(psi), 2);
  }
  return partial_overlap(psi, phi, 1);
}

double factorization_distance(const ManyBodyState& psi, const WaveFunction& phi, int k) {
  return std::sqrt(std::max(0.0, 1.0 - partial_overlap(psi, phi, k)));
}

double correlation_quotient(const ManyBodyState& psi, const std::function<double(double)>& f,
                            int i, int j) {
  check_state(psi);
  if (psi.particles < 2) throw DomainError("correlation_quotient: need N >= 2");
  if (i == j || i < 0 || j < 0 || i >= psi.particles || j >= psi.particles) {
    throw DomainError("correlation_quotient: need distinct particle indices in [0, N)");
  }
  const auto ftab = displacement_table(psi.grid, f);
  for (double v : ftab) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("correlation_quotient: f vanishes on the grid");
  }
  const Digits digits(psi.grid);
  const std::size_t single = psi.grid.size();
  Field chi = psi.values;
  for_each_config(single, psi.particles, [&](std::size_t flat, const std::size_t* s) {
    chi(static_cast<Eigen::Index>(flat)) /= ftab[digits.displacement(s[i], s[j])];
  });
  state_plan(psi.grid, psi.particles).forward(chi.data());
  const Eigen::ArrayXd k2 = squared_wavenumbers(psi.grid);
  double sum = 0.0;
  for_each_config(single, psi.particles, [&](std::size_t flat, const std::size_t* s) {
    sum += std::norm(chi(static_cast<Eigen::Index>(flat))) * k2(static_cast<Eigen::Index>(s[i])) *
           k2(static_cast<Eigen::Index>(s[j]));
  });
  return sum * psi.cell_volume() / static_cast<double>(psi.size());
}

HardyCheck hardy_check(const WaveFunction& psi_rel) {
  const GridSpec& g = psi_rel.grid;
  if (g.dim != 3) throw DomainError("hardy_check: three-dimensional grids only");
  const double dx = g.spacing();
  double lhs = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    const auto x = g.position(s);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double w = r2 > 0.0 ? 1.0 / r2 : 1.0 / (dx * dx);
    lhs += std::norm(psi_rel.values(static_cast<Eigen::Index>(s))) * w;
  }
  return {lhs * g.cell_volume(), 4.0 * kinetic_energy(psi_rel)};
}

}  // namespace gplab

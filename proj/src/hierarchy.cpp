#include "gplab/hierarchy.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>

#include "gplab/errors.hpp"
#include "gplab/fft.hpp"
#include "lattice.hpp"

namespace gplab {
namespace {

using detail::Digits;
using detail::displacement_table;

constexpr Complex kI{0.0, 1.0};

void check_kernel(const Kernel& g) {
  validate(g.grid);
  const Eigen::Index n = kernel_dimension(g.grid, g.k);
  if (g.matrix.rows() != n || g.matrix.cols() != n) {
    throw DomainError("kernel: matrix size does not match grid and particle number");
  }
}

// Applies FFT -> multiply by `factor` -> inverse FFT to every column.
void transform_columns(Eigen::MatrixXcd& m, const GridSpec& grid, int k, const Eigen::ArrayXcd& factor) {
  const auto cols = static_cast<int>(m.cols());
  const FftPlan plan(std::vector<int>(static_cast<std::size_t>(grid.dim * k), grid.points), cols,
                     static_cast<long>(m.rows()));
  plan.forward(m.data());
  m.array().colwise() *= factor;
  plan.inverse(m.data());
}

Eigen::ArrayXcd free_phase(const GridSpec& grid, int copies, double t) {
  return (Complex(0.0, -t) * squared_wavenumbers(grid, copies).cast<Complex>()).exp();
}

// sum_j (-Laplacian_j) applied to the columns.
Eigen::MatrixXcd laplacian_columns(const Eigen::MatrixXcd& m, const GridSpec& grid, int k) {
  Eigen::MatrixXcd out = m;
  transform_columns(out, grid, k, squared_wavenumbers(grid, k).cast<Complex>());
  return out;
}

Field neg_laplacian(const Field& u, const GridSpec& grid) {
  Field out = u;
  const FftPlan plan(std::vector<int>(static_cast<std::size_t>(grid.dim), grid.points));
  plan.forward(out.data());
  out.array() *= squared_wavenumbers(grid);
  plan.inverse(out.data());
  return out;
}

Complex grid_inner(const Field& a, const Field& b, const GridSpec& grid) {
  return a.dot(b) * grid.cell_volume();
}

std::size_t power(std::size_t base, int e) {
  std::size_t n = 1;
  for (int i = 0; i < e; ++i) n *= base;
  return n;
}

// r x T coordinates of the columns of u in an orthonormal basis of their span.
Eigen::MatrixXcd slot_coordinates(const Eigen::MatrixXcd& u) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(u);
  const Eigen::Index r = qr.rank();
  if (r == 0) return Eigen::MatrixXcd(0, u.cols());
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(u.rows(), r);
  return q.adjoint() * u;
}

// Columns are Kronecker products of the per-slot columns, slot 0 most significant.
Eigen::MatrixXcd kron_columns(const std::vector<Eigen::MatrixXcd>& slots) {
  const Eigen::Index t = slots.front().cols();
  Eigen::MatrixXcd out = slots.front();
  for (std::size_t i = 1; i < slots.size(); ++i) {
    const Eigen::Index r = slots[i].rows();
    Eigen::MatrixXcd next(out.rows() * r, t);
    for (Eigen::Index a = 0; a < out.rows(); ++a) {
      next.middleRows(a * r, r) = slots[i].array() * out.row(a).replicate(r, 1).array();
    }
    out = std::move(next);
  }
  return out;
}

void check_product(const ProductKernel& g) {
  validate(g.grid);
  const auto n = static_cast<Eigen::Index>(g.grid.size());
  for (const auto& term : g.terms) {
    if (static_cast<int>(term.kets.size()) != g.k || static_cast<int>(term.bras.size()) != g.k) {
      throw DomainError("product kernel: term rank does not match k");
    }
    for (int i = 0; i < g.k; ++i) {
      if (term.kets[i].size() != n || term.bras[i].size() != n) {
        throw DomainError("product kernel: vector length does not match the grid");
      }
    }
  }
}

template <class Frame>
std::array<std::size_t, 3> frame_indices(const std::vector<Frame>& traj, double frame_dt, double t,
                                         double dt) {
  if (!(frame_dt > 0.0) || !(dt > 0.0)) throw DomainError("hierarchy residual: steps must be positive");
  const double c = t / frame_dt, s = dt / frame_dt;
  const long ic = std::lround(c), is = std::lround(s);
  if (std::abs(c - static_cast<double>(ic)) > 1e-6 || std::abs(s - static_cast<double>(is)) > 1e-6 ||
      is < 1 || ic - is < 0 || ic + is >= static_cast<long>(traj.size())) {
    throw DomainError("hierarchy residual: missing trajectory frames around t = " + std::to_string(t));
  }
  return {static_cast<std::size_t>(ic - is), static_cast<std::size_t>(ic), static_cast<std::size_t>(ic + is)};
}

}  // namespace

// ---------------------------------------------------------------------------

Kernel free_propagate(const Kernel& gamma, double t) {
  check_kernel(gamma);
  if (t == 0.0) return gamma;
  const Eigen::ArrayXcd phase = free_phase(gamma.grid, gamma.k, t);
  Eigen::MatrixXcd a = gamma.matrix;
  transform_columns(a, gamma.grid, gamma.k, phase);
  Eigen::MatrixXcd b = a.adjoint();
  transform_columns(b, gamma.grid, gamma.k, phase);
  return {gamma.k, gamma.grid, b.adjoint()};
}

Kernel kinetic_generator(const Kernel& gamma) {
  check_kernel(gamma);
  const Eigen::MatrixXcd left = laplacian_columns(gamma.matrix, gamma.grid, gamma.k);
  const Eigen::MatrixXcd right = laplacian_columns(gamma.matrix.adjoint(), gamma.grid, gamma.k).adjoint();
  return {gamma.k, gamma.grid, -kI * (left - right)};
}

double sobolev_trace_norm(const Kernel& gamma) {
  check_kernel(gamma);
  const GridSpec& g = gamma.grid;
  const auto n = gamma.matrix.rows();
  const FftPlan plan(std::vector<int>(static_cast<std::size_t>(g.dim * gamma.k), g.points),
                     static_cast<int>(n), static_cast<long>(n));
  Eigen::MatrixXcd a = gamma.matrix;
  plan.forward(a.data());
  Eigen::MatrixXcd b = a.adjoint();
  plan.forward(b.data());
  // diag(F gamma F^dagger) = conj(diag(F (F gamma)^dagger))
  const Eigen::ArrayXd w1 = 1.0 + squared_wavenumbers(g);
  Eigen::ArrayXd w = w1;
  for (int p = 1; p < gamma.k; ++p) {
    Eigen::ArrayXd next(w.size() * w1.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) next.segment(i * w1.size(), w1.size()) = w(i) * w1;
    w = std::move(next);
  }
  return (w * b.diagonal().real().array()).sum() / static_cast<double>(n);
}

Kernel collision_apply(const Kernel& gamma_next, double sigma, int j) {
  check_kernel(gamma_next);
  const int k = gamma_next.k - 1;
  if (k < 1) throw DomainError("collision_apply: input must have at least two particles");
  if (j < 0 || j >= k) throw DomainError("collision_apply: slot index out of range");
  if (gamma_next.grid.dim != 1) {
    throw ConfigError("collision_apply: dense path supports one-dimensional grids only");
  }
  const auto s = static_cast<Eigen::Index>(gamma_next.grid.size());
  const auto n = gamma_next.matrix.rows() / s;
  const auto stride = static_cast<Eigen::Index>(power(static_cast<std::size_t>(s), k - 1 - j));
  const Complex c = -kI * sigma / gamma_next.grid.cell_volume();
  Kernel out{k, gamma_next.grid, Eigen::MatrixXcd(n, n)};
  for (Eigen::Index b = 0; b < n; ++b) {
    const Eigen::Index bj = (b / stride) % s;
    for (Eigen::Index a = 0; a < n; ++a) {
      const Eigen::Index aj = (a / stride) % s;
      out.matrix(a, b) = c * (gamma_next.matrix(a * s + aj, b * s + aj) -
                              gamma_next.matrix(a * s + bj, b * s + bj));
    }
  }
  return out;
}

Kernel collision_apply(const Kernel& gamma_next, double sigma) {
  Kernel out = collision_apply(gamma_next, sigma, 0);
  for (int j = 1; j < gamma_next.k - 1; ++j) out.matrix += collision_apply(gamma_next, sigma, j).matrix;
  return out;
}

double bbgky_residual(const std::array<Kernel, 3>& frames, const Kernel& next,
                      const ManyBodyHamiltonian& h, int particles, double dt) {
  const Kernel& mid = frames[1];
  for (const auto& f : frames) {
    check_kernel(f);
    if (f.k != mid.k || !(f.grid == mid.grid)) throw DomainError("bbgky_residual: frame mismatch");
  }
  check_kernel(next);
  const int k = mid.k;
  if (next.k != k + 1 || !(next.grid == mid.grid)) throw DomainError("bbgky_residual: next marginal mismatch");
  if (particles <= k) throw DomainError("bbgky_residual: need k < N");
  if (!(dt > 0.0)) throw DomainError("bbgky_residual: dt must be positive");

  const Eigen::MatrixXcd deriv = (frames[2].matrix - frames[0].matrix) / (2.0 * dt);
  const Eigen::MatrixXcd kin = kinetic_generator(mid).matrix;

  const Eigen::ArrayXd w = potential_diagonal(h, mid.grid, k);
  const auto n = mid.matrix.rows();
  Eigen::MatrixXcd pot(n, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a) pot(a, b) = -kI * (w(a) - w(b)) * mid.matrix(a, b);

  Eigen::MatrixXcd coll = Eigen::MatrixXcd::Zero(n, n);
  if (!h.pair.is_zero() && h.pair_weight != 0.0) {
    const GridSpec& g = mid.grid;
    const auto s = static_cast<Eigen::Index>(g.size());
    const Digits digits(g);
    const auto vtab = displacement_table(g, [&](double r) { return h.pair(r); });
    Eigen::MatrixXd v(s, s);
    for (Eigen::Index x = 0; x < s; ++x)
      for (Eigen::Index y = 0; y < s; ++y) v(x, y) = vtab[digits.displacement(x, y)];
    for (int j = 0; j < k; ++j) {
      const auto stride = static_cast<Eigen::Index>(power(static_cast<std::size_t>(s), k - 1 - j));
      for (Eigen::Index b = 0; b < n; ++b) {
        const Eigen::Index bj = (b / stride) % s;
        for (Eigen::Index a = 0; a < n; ++a) {
          const Eigen::Index aj = (a / stride) % s;
          Complex acc = 0.0;
          for (Eigen::Index c = 0; c < s; ++c) acc += (v(aj, c) - v(bj, c)) * next.matrix(a * s + c, b * s + c);
          coll(a, b) += acc;
        }
      }
    }
    coll *= -kI * h.pair_weight * static_cast<double>(particles - k);
  }

  const double scale = deriv.norm() + kin.norm() + pot.norm() + coll.norm();
  if (scale == 0.0) return 0.0;
  return (deriv - kin - pot - coll).norm() / scale;
}

double bbgky_residual(const std::vector<ManyBodyState>& trajectory, double frame_dt,
                      const ManyBodyHamiltonian& h, int k, double t, double dt) {
  const auto idx = frame_indices(trajectory, frame_dt, t, dt);
  const ManyBodyState& mid = trajectory[idx[1]];
  if (k < 1 || k >= mid.particles) throw DomainError("bbgky_residual: need 1 <= k < N");
  const std::array<Kernel, 3> frames{marginal(trajectory[idx[0]], k), marginal(mid, k),
                                     marginal(trajectory[idx[2]], k)};
  return bbgky_residual(frames, marginal(mid, k + 1), h, mid.particles, dt);
}

// ---------------------------------------------------------------------------

ProductKernel factorized_kernel(const WaveFunction& phi, int k) {
  if (k < 1) throw DomainError("factorized_kernel: k must be >= 1");
  ProductTerm term{1.0, std::vector<Field>(static_cast<std::size_t>(k), phi.values),
                   std::vector<Field>(static_cast<std::size_t>(k), phi.values)};
  return {k, phi.grid, {std::move(term)}};
}

Kernel to_dense(const ProductKernel& gamma) {
  check_product(gamma);
  const Eigen::Index n = kernel_dimension(gamma.grid, gamma.k);
  const auto t = static_cast<Eigen::Index>(gamma.terms.size());
  Kernel out{gamma.k, gamma.grid, Eigen::MatrixXcd::Zero(n, n)};
  if (t == 0) return out;
  std::vector<Eigen::MatrixXcd> kets(static_cast<std::size_t>(gamma.k)), bras(kets.size());
  const auto s = static_cast<Eigen::Index>(gamma.grid.size());
  for (int i = 0; i < gamma.k; ++i) {
    kets[i].resize(s, t);
    bras[i].resize(s, t);
    for (Eigen::Index c = 0; c < t; ++c) {
      kets[i].col(c) = gamma.terms[c].kets[i];
      bras[i].col(c) = gamma.terms[c].bras[i];
    }
  }
  for (Eigen::Index c = 0; c < t; ++c) kets[0].col(c) *= gamma.terms[c].coefficient;
  out.matrix.noalias() = kron_columns(kets) * kron_columns(bras).adjoint();
  out.matrix *= std::pow(gamma.grid.cell_volume(), gamma.k);
  return out;
}

ProductKernel combine(const ProductKernel& a, const ProductKernel& b, Complex scale) {
  if (a.k != b.k || !(a.grid == b.grid)) throw DomainError("combine: kernel mismatch");
  ProductKernel out = a;
  out.terms.reserve(a.terms.size() + b.terms.size());
  for (ProductTerm term : b.terms) {
    term.coefficient *= scale;
    out.terms.push_back(std::move(term));
  }
  return out;
}

ProductKernel free_propagate(const ProductKernel& gamma, double t) {
  check_product(gamma);
  ProductKernel out = gamma;
  if (t == 0.0) return out;
  for (auto& term : out.terms) {
    for (auto& u : term.kets) free_propagate_field(u, out.grid, t);
    for (auto& v : term.bras) free_propagate_field(v, out.grid, t);
  }
  return out;
}

ProductKernel kinetic_generator(const ProductKernel& gamma) {
  check_product(gamma);
  ProductKernel out{gamma.k, gamma.grid, {}};
  out.terms.reserve(gamma.terms.size() * 2 * static_cast<std::size_t>(gamma.k));
  for (const auto& term : gamma.terms) {
    for (int j = 0; j < gamma.k; ++j) {
      ProductTerm left = term;
      left.coefficient *= -kI;
      left.kets[j] = neg_laplacian(term.kets[j], gamma.grid);
      out.terms.push_back(std::move(left));
      ProductTerm right = term;
      right.coefficient *= kI;
      right.bras[j] = neg_laplacian(term.bras[j], gamma.grid);
      out.terms.push_back(std::move(right));
    }
  }
  return out;
}

ProductKernel collision_apply(const ProductKernel& gamma_next, double sigma, int j) {
  check_product(gamma_next);
  const int k = gamma_next.k - 1;
  if (k < 1) throw DomainError("collision_apply: input must have at least two particles");
  if (j < 0 || j >= k) throw DomainError("collision_apply: slot index out of range");
  ProductKernel out{k, gamma_next.grid, {}};
  if (sigma == 0.0) return out;
  out.terms.reserve(2 * gamma_next.terms.size());
  for (const auto& term : gamma_next.terms) {
    const Field& u = term.kets[static_cast<std::size_t>(k)];
    const Field& v = term.bras[static_cast<std::size_t>(k)];
    ProductTerm left{term.coefficient * (-kI * sigma),
                     {term.kets.begin(), term.kets.end() - 1},
                     {term.bras.begin(), term.bras.end() - 1}};
    ProductTerm right = left;
    right.coefficient = term.coefficient * (kI * sigma);
    left.kets[j] = (left.kets[j].array() * u.array() * v.conjugate().array()).matrix();
    right.bras[j] = (right.bras[j].array() * v.array() * u.conjugate().array()).matrix();
    out.terms.push_back(std::move(left));
    out.terms.push_back(std::move(right));
  }
  return out;
}

ProductKernel collision_apply(const ProductKernel& gamma_next, double sigma) {
  ProductKernel out{gamma_next.k - 1, gamma_next.grid, {}};
  for (int j = 0; j < gamma_next.k - 1; ++j) {
    ProductKernel part = collision_apply(gamma_next, sigma, j);
    for (auto& term : part.terms) out.terms.push_back(std::move(term));
  }
  return out;
}

ProductKernel collision_apply_factorized(const WaveFunction& phi, double sigma, int k) {
  if (k < 1) throw DomainError("collision_apply_factorized: k must be >= 1");
  ProductKernel out{k, phi.grid, {}};
  if (sigma == 0.0) return out;
  const Field dense = (phi.values.array() * phi.values.array().abs2()).matrix();
  const ProductTerm base{1.0, std::vector<Field>(static_cast<std::size_t>(k), phi.values),
                         std::vector<Field>(static_cast<std::size_t>(k), phi.values)};
  for (int j = 0; j < k; ++j) {
    ProductTerm left = base, right = base;
    left.coefficient = -kI * sigma;
    left.kets[j] = dense;
    right.coefficient = kI * sigma;
    right.bras[j] = dense;
    out.terms.push_back(std::move(left));
    out.terms.push_back(std::move(right));
  }
  return out;
}

double frobenius_norm(const ProductKernel& gamma) {
  check_product(gamma);
  const auto t = static_cast<Eigen::Index>(gamma.terms.size());
  if (t == 0) return 0.0;
  const auto s = static_cast<Eigen::Index>(gamma.grid.size());
  std::vector<Eigen::MatrixXcd> a(static_cast<std::size_t>(gamma.k)), b(a.size());
  std::size_t rows = 1, cols = 1;
  for (int i = 0; i < gamma.k; ++i) {
    Eigen::MatrixXcd u(s, t), v(s, t);
    for (Eigen::Index c = 0; c < t; ++c) {
      u.col(c) = gamma.terms[c].kets[i];
      v.col(c) = gamma.terms[c].bras[i];
    }
    a[i] = slot_coordinates(u);
    b[i] = slot_coordinates(v);
    if (a[i].rows() == 0 || b[i].rows() == 0) return 0.0;
    rows *= static_cast<std::size_t>(a[i].rows());
    cols *= static_cast<std::size_t>(b[i].rows());
  }
  if (rows * cols > kMaxKernelEntries) throw ConfigError("frobenius_norm: core tensor exceeds the memory budget");
  Eigen::MatrixXcd ka = kron_columns(a);
  for (Eigen::Index c = 0; c < t; ++c) ka.col(c) *= gamma.terms[c].coefficient;
  const Eigen::MatrixXcd core = ka * kron_columns(b).adjoint();
  return core.norm() * std::pow(gamma.grid.cell_volume(), gamma.k);
}

double sobolev_trace_norm(const ProductKernel& gamma) {
  check_product(gamma);
  Complex total = 0.0;
  for (const auto& term : gamma.terms) {
    Complex p = term.coefficient;
    for (int i = 0; i < gamma.k; ++i) {
      const Field& u = term.kets[i];
      p *= grid_inner(term.bras[i], u + neg_laplacian(u, gamma.grid), gamma.grid);
    }
    total += p;
  }
  return total.real();
}

Complex trace(const ProductKernel& gamma) {
  check_product(gamma);
  Complex total = 0.0;
  for (const auto& term : gamma.terms) {
    Complex p = term.coefficient;
    for (int i = 0; i < gamma.k; ++i) p *= grid_inner(term.bras[i], term.kets[i], gamma.grid);
    total += p;
  }
  return total;
}

double infinite_hierarchy_residual(const std::vector<WaveFunction>& trajectory, double frame_dt,
                                   int k, double sigma, double t, double dt) {
  if (k < 1) throw DomainError("infinite_hierarchy_residual: k must be >= 1");
  const auto idx = frame_indices(trajectory, frame_dt, t, dt);
  const WaveFunction& before = trajectory[idx[0]];
  const WaveFunction& mid = trajectory[idx[1]];
  const WaveFunction& after = trajectory[idx[2]];
  if (!(before.grid == mid.grid) || !(after.grid == mid.grid)) {
    throw DomainError("infinite_hierarchy_residual: grid mismatch");
  }

  // |a><a|^k - |b><b|^k telescoped, with |a><a| - |b><b| = |a-b><a| + |b><a-b|
  ProductKernel deriv{k, mid.grid, {}};
  const Field diff = after.values - before.values;
  const Complex c = 1.0 / (2.0 * dt);
  for (int i = 0; i < k; ++i) {
    ProductTerm base{c, {}, {}};
    for (int p = 0; p < k; ++p) {
      const Field& f = p < i ? before.values : after.values;
      base.kets.push_back(f);
      base.bras.push_back(f);
    }
    ProductTerm first = base, second = base;
    first.kets[i] = diff;
    second.kets[i] = before.values;
    second.bras[i] = diff;
    deriv.terms.push_back(std::move(first));
    deriv.terms.push_back(std::move(second));
  }
  const ProductKernel kin = kinetic_generator(factorized_kernel(mid, k));
  const ProductKernel coll = collision_apply_factorized(mid, sigma, k);

  const double scale = frobenius_norm(deriv) + frobenius_norm(kin) + frobenius_norm(coll);
  if (scale == 0.0) return 0.0;
  return frobenius_norm(combine(combine(deriv, kin, -1.0), coll, -1.0)) / scale;
}

// ---------------------------------------------------------------------------

const ProductKernel& HierarchyFamily::entry(int k) const {
  if (k < 1 || k > k_max()) throw DomainError("hierarchy family: no entry for k = " + std::to_string(k));
  return entries[static_cast<std::size_t>(k - 1)];
}

HierarchyFamily factorized_family(const WaveFunction& phi, int k_max, double sigma) {
  HierarchyFamily family;
  family.sigma = sigma;
  for (int k = 1; k <= k_max; ++k) family.entries.push_back(factorized_kernel(phi, k));
  return family;
}

DysonTerm dyson_term(const HierarchyFamily& family, int k, int m, double t, int quad_points) {
  if (m < 0 || m > 2) throw ConfigError("dyson_term: only m <= 2 is supported");
  if (k < 1 || k + m > family.k_max()) throw DomainError("dyson_term: family too short for k + m");
  if (quad_points < 1) throw DomainError("dyson_term: quad_points must be >= 1");
  if (m > 0 && quad_points < 8) warn("dyson_term: fewer than 8 quadrature points per axis; expect a coarse result");

  DysonTerm out{k, m, ProductKernel{k, family.entry(k).grid, {}}, quad_points};
  if (m == 0) {
    out.value = free_propagate(family.entry(k), t);
    return out;
  }
  const double sigma = family.sigma;
  if (sigma == 0.0 || t == 0.0) return out;
  auto append = [&](ProductKernel part, double weight) {
    for (auto& term : part.terms) {
      term.coefficient *= weight;
      out.value.terms.push_back(std::move(term));
    }
  };
  const double h = t / quad_points;
  for (int a = 0; a < quad_points; ++a) {
    const double s1 = (a + 0.5) * h;
    if (m == 1) {
      append(free_propagate(collision_apply(free_propagate(family.entry(k + 1), s1), sigma), t - s1), h);
      continue;
    }
    const double h2 = s1 / quad_points;
    for (int b = 0; b < quad_points; ++b) {
      const double s2 = (b + 0.5) * h2;
      const ProductKernel inner = collision_apply(free_propagate(family.entry(k + 2), s2), sigma);
      append(free_propagate(collision_apply(free_propagate(inner, s1 - s2), sigma), t - s1), h * h2);
    }
  }
  return out;
}

ProductKernel dyson_partial_sum(const HierarchyFamily& family, int k, int n, double t, int quad_points) {
  if (n < 1 || n > 3) throw ConfigError("dyson_partial_sum: n must be in 1..3");
  ProductKernel sum = dyson_term(family, k, 0, t, quad_points).value;
  for (int m = 1; m < n; ++m) sum = combine(sum, dyson_term(family, k, m, t, quad_points).value);
  return sum;
}

PowerCounting power_counting_margin(long k, long m) {
  if (k < 1 || m < 0) throw DomainError("power_counting_margin: need k >= 1, m >= 0");
  PowerCounting p;
  p.volume_exp = 4 * k + 15 * m;
  p.decay_exp = 5 * m + 2 * (2 * k + 3 * m) + 5 * (k + m);
  p.margin = p.decay_exp - p.volume_exp;
  return p;
}

}  // namespace gplab

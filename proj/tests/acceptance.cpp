// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   gplab_acceptance <path to gplab executable> <configs directory>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "gplab/errors.hpp"
#include "gplab/hierarchy.hpp"
#include "gplab/manybody.hpp"
#include "gplab/scattering.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gplab;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(secs < budget_s, fmt::format("runtime {:.2f}s < {:g}s", secs, budget_s));
  if (!out.pass) ++failures;
  std::printf("%s [%2d] %s: %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str());
  std::fflush(stdout);
}

std::string sci(double x) { return fmt::format("{:.3g}", x); }

double max_diff(const Field& a, const Field& b) { return (a - b).cwiseAbs().maxCoeff(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path tool = argc > 1 ? fs::path(argv[1]) : fs::path("gplab");
  const fs::path configs = argc > 2 ? fs::path(argv[2]) : fs::path("configs");
  set_warning_handler([](std::string_view) {});

  const auto barrier = PotentialModel::barrier(1.0, 1.0);
  const auto gauss = PotentialModel::gaussian(2.0, 0.7);

  criterion(1, "scattering identity", 1.0, [&](Outcome& o) {
    const auto sb = solve_zero_energy(barrier);
    const double exact = oracle::barrier_a0(1.0, 1.0);
    const double a_err = std::abs(sb.a0() - exact) / exact;
    o.require(a_err < 1e-8, "barrier a0 rel err " + sci(a_err) + " < 1e-8");
    for (const auto* v : {&barrier, &gauss}) {
      const auto sol = solve_zero_energy(*v);
      const double ratio = coupling_sigma(sol).sigma / (8.0 * pi * sol.a0());
      o.require(std::abs(ratio - 1.0) < 1e-6, "|sigma/8pi a0 - 1| " + sci(std::abs(ratio - 1.0)) + " < 1e-6");
    }
  });

  criterion(2, "scaling law", 1.0, [&](Outcome& o) {
    double worst_a = 0.0, worst_alpha = 0.0;
    for (const auto* v : {&barrier, &gauss}) {
      const double a0 = solve_zero_energy(*v).a0();
      const double alpha = alpha_strength(*v);
      for (long n : {1L, 10L, 100L}) {
        const auto vn = scale_potential(*v, n);
        worst_a = std::max(worst_a, std::abs(solve_zero_energy(vn).a0() * n / a0 - 1.0));
        worst_alpha = std::max(worst_alpha, std::abs(alpha_strength(vn) / alpha - 1.0));
      }
    }
    o.require(worst_a < 1e-8, "a0(V_N) N / a0 - 1 max " + sci(worst_a) + " < 1e-8");
    o.require(worst_alpha < 1e-8, "alpha(V_N) / alpha - 1 max " + sci(worst_alpha) + " < 1e-8");
  });

  criterion(3, "Born dominance", 1.0, [&](Outcome& o) {
    const std::vector<PotentialModel> family{
        barrier,
        gauss,
        PotentialModel::barrier(0.01, 1.0),
        PotentialModel::barrier(100.0, 0.5),
        PotentialModel::gaussian(0.05, 1.5),
        PotentialModel::gaussian(50.0, 0.3),
        PotentialModel::table({0.0, 0.5, 1.0, 1.5}, {2.0, 1.5, 0.5, 0.0}),
        scale_potential(gauss, 10)};
    double min_gap = 1.0;
    for (const auto& v : family) {
      const double b0 = born_coupling(v), s = 8.0 * pi * solve_zero_energy(v).a0();
      min_gap = std::min(min_gap, (b0 - s) / b0);
    }
    o.require(min_gap > 0.0, fmt::format("min (b0 - 8 pi a0)/b0 = {} > 0 over {} potentials", sci(min_gap), family.size()));
  });

  criterion(4, "GP solver conservation", 30.0, [&](Outcome& o) {
    const GridSpec g{1, 1024, 20.0};
    const auto phi = gaussian_state(g, 1.0, {}, {1.0, 0.0, 0.0});
    const double sigma = 1.0, t = 1.0, dt = 1e-3;
    const double a0 = a0_from_sigma(sigma);
    const auto traj = evolve_gp_trajectory(phi, sigma, t, dt);
    const double e0 = gp_energy(phi, a0, TrapModel::none());
    double norm_drift = 0.0, energy_drift = 0.0;
    for (const auto& f : traj) {
      norm_drift = std::max(norm_drift, std::abs(l2_norm(f) - 1.0));
      energy_drift = std::max(energy_drift, std::abs(gp_energy(f, a0, TrapModel::none()) / e0 - 1.0));
    }
    o.require(norm_drift < 1e-10, "norm drift " + sci(norm_drift) + " < 1e-10");
    o.require(energy_drift < 1e-6, "energy drift " + sci(energy_drift) + " < 1e-6");
    const auto back = evolve_gp(traj.back(), sigma, -t, dt);
    const double rev = max_diff(back.values, phi.values);
    o.require(rev < 1e-8, "time reversal " + sci(rev) + " < 1e-8");
    const auto ref = evolve_gp(phi, sigma, t, dt / 8);
    const double e1 = max_diff(traj.back().values, ref.values);
    const double e2 = max_diff(evolve_gp(phi, sigma, t, dt / 2).values, ref.values);
    const double ratio = e1 / e2;
    o.require(ratio >= 3.2 && ratio <= 4.8, fmt::format("dt-halving ratio {:.3f} in [3.2, 4.8]", ratio));
  });

  criterion(5, "GP ground state", 60.0, [&](Outcome& o) {
    const GridSpec g{3, 64, 12.0};
    const double omega = 1.0;
    const auto gs = minimize_gp(TrapModel::harmonic(omega), 0.0, g, 1e-9);
    const double err = std::abs(gs.energy - oracle::oscillator_ground_energy(3, omega));
    o.require(err < 1e-6, fmt::format("|E - 3 omega| {} < 1e-6 after {} iterations", sci(err), gs.iterations));
    std::size_t rises = 0;
    for (std::size_t i = 1; i < gs.energy_history.size(); ++i)
      if (gs.energy_history[i] > gs.energy_history[i - 1]) ++rises;
    o.require(rises == 0, fmt::format("energy increases in {} of {} accepted steps", rises, gs.energy_history.size() - 1));
  });

  criterion(6, "factorized solution of the infinite hierarchy", 120.0, [&](Outcome& o) {
    const GridSpec g{1, 128, 20.0};
    const auto phi = gaussian_state(g, 1.0, {}, {1.0, 0.0, 0.0});
    const double sigma = 2.0, h = 1e-4, t = 0.1;
    const auto traj = evolve_gp_trajectory(phi, sigma, 0.2, h);
    const std::vector<double> steps{4e-3, 2e-3, 1e-3, 5e-4};
    for (int k : {1, 2}) {
      std::vector<double> r;
      for (double dt : steps) r.push_back(infinite_hierarchy_residual(traj, h, k, sigma, t, dt));
      for (std::size_t i = 1; i < r.size(); ++i) {
        const double ratio = r[i - 1] / r[i];
        o.require(ratio >= 3.2 && ratio <= 4.8, fmt::format("k={} ratio {:.3f}", k, ratio));
      }
      const double off = infinite_hierarchy_residual(traj, h, k, sigma / 2, t, steps.back());
      o.require(off > 10.0 * r.back(), fmt::format("k={} sigma/2 residual {} > 10 x {}", k, sci(off), sci(r.back())));
    }
  });

  criterion(7, "BBGKY consistency", 120.0, [&](Outcome& o) {
    const GridSpec g{1, 64, 20.0};
    const auto psi = build_product(gaussian_state(g, 1.0, {}, {0.5, 0.0, 0.0}), 2);
    const ManyBodyHamiltonian ham{PotentialModel::gaussian(5.0, 0.5), TrapModel::none(), 1.0};
    const double h = 1e-4;
    std::vector<ManyBodyState> traj;
    evolve_manybody(psi, ham, 0.2, h, 1, [&](double, const ManyBodyState& s) { traj.push_back(s); });
    std::vector<double> r;
    for (double dt : {4e-3, 2e-3, 1e-3, 5e-4}) r.push_back(bbgky_residual(traj, h, ham, 1, 0.1, dt));
    for (std::size_t i = 1; i < r.size(); ++i) {
      const double ratio = r[i - 1] / r[i];
      o.require(ratio >= 3.2 && ratio <= 4.8, fmt::format("ratio {:.3f}", ratio));
    }
    double worst = 0.0;
    int frames = 0;
    for (std::size_t i = 0; i < traj.size(); i += 100, ++frames) {
      const auto m1 = marginal(traj[i], 1);
      worst = std::max(worst, (partial_trace_last(marginal(traj[i], 2)).matrix - m1.matrix).cwiseAbs().maxCoeff());
    }
    o.require(worst < 1e-10, fmt::format("Tr_2 gamma2 - gamma1 max {} < 1e-10 over {} frames", sci(worst), frames));
  });

  criterion(8, "Dyson truncation", 300.0, [&](Outcome& o) {
    const GridSpec g{1, 128, 20.0};
    const auto phi = gaussian_state(g, 1.0);
    const double sigma = 0.2, t = 0.05;
    const auto exact = factorized_kernel(evolve_gp(phi, sigma, t, t / 2000), 1);
    const auto fam = factorized_family(phi, 3, sigma);
    std::vector<double> d;
    for (int n = 1; n <= 3; ++n) d.push_back(frobenius_norm(combine(dyson_partial_sum(fam, 1, n, t, 32), exact, -1.0)));
    o.require(d[1] < d[0] && d[2] < d[1], fmt::format("distances {} > {} > {}", sci(d[0]), sci(d[1]), sci(d[2])));
    const auto free_fam = factorized_family(phi, 3, 0.0);
    const auto free_exact = factorized_kernel(evolve_gp(phi, 0.0, t, t), 1);
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n)
      worst = std::max(worst, frobenius_norm(combine(dyson_partial_sum(free_fam, 1, n, t, 32), free_exact, -1.0)));
    o.require(worst < 1e-12, "sigma = 0 partial sums error " + sci(worst) + " < 1e-12");
  });

  criterion(9, "correlation structure", 300.0, [&](Outcome& o) {
    const GridSpec g{3, 16, 6.0};
    const auto phi = gaussian_state(g, 1.0);
    const auto sol = solve_zero_energy(PotentialModel::barrier(10.0, 1.0));
    std::vector<double> cq, raw;
    for (long n : {4L, 8L, 16L}) {
      const auto f = jastrow(sol, n);
      const auto psi = build_jastrow_product(phi, 2, f);
      cq.push_back(correlation_quotient(psi, f, 0, 1));
      raw.push_back(correlation_quotient(psi, [](double) { return 1.0; }, 0, 1));
    }
    const double spread = *std::max_element(cq.begin(), cq.end()) / *std::min_element(cq.begin(), cq.end());
    o.require(spread <= 2.0, fmt::format("quotient {:.3f}, {:.3f}, {:.3f}: spread {:.3f} <= 2", cq[0], cq[1], cq[2], spread));
    o.require(raw[0] < raw[1] && raw[1] < raw[2], fmt::format("raw {:.3f} < {:.3f} < {:.3f}", raw[0], raw[1], raw[2]));
  });

  criterion(10, "power counting", 1.0, [&](Outcome& o) {
    long bad = 0;
    for (long k = 1; k <= 100; ++k)
      for (long m = 0; m <= 100; ++m)
        if (power_counting_margin(k, m).margin != 5 * k + m) ++bad;
    o.require(bad == 0, fmt::format("{} mismatches of 5k + m", bad));
    const auto p = power_counting_margin(1, 1);
    o.require(p.volume_exp == 19 && p.decay_exp == 25 && p.margin == 6,
              fmt::format("(1,1) -> ({}, {}, {})", p.volume_exp, p.decay_exp, p.margin));
  });

  criterion(11, "marginal and overlap suite", 60.0, [&](Outcome& o) {
    const GridSpec g{1, 64, 16.0};
    const auto phi = gaussian_state(g, 1.0, {0.5, 0.0, 0.0}, {0.7, 0.0, 0.0});
    const auto s1 = spectrum(marginal(build_product(phi, 3), 1));
    const double overlap = condensate_overlap(build_product(phi, 3), phi);
    o.require(std::abs(s1.values(0) - 1.0) < 1e-12 && std::abs(s1.values(1)) < 1e-12,
              "product rank 1: lambda2 " + sci(s1.values(1)));
    o.require(std::abs(overlap - 1.0) < 1e-12, "overlap - 1 " + sci(overlap - 1.0));

    const auto a = plane_wave(g, {1, 0, 0});
    const auto b = make_wavefunction(g, gaussian_state(g, 0.8).values - inner(a, gaussian_state(g, 0.8)) * a.values);
    const auto n = static_cast<Eigen::Index>(g.size());
    ManyBodyState two{2, g, Field(n * n)};
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y)
        two.values(x * n + y) = (a.values(x) * b.values(y) + b.values(x) * a.values(y)) / std::sqrt(2.0);
    const auto s2 = spectrum(marginal(two, 1));
    const double dev = std::max(std::abs(s2.values(0) - 0.5), std::abs(s2.values(1) - 0.5));
    o.require(dev < 1e-10, "two-mode eigenvalue deviation " + sci(dev));

    const GridSpec g3{3, 32, 12.0};
    const auto sol = solve_zero_energy(PotentialModel::barrier(10.0, 1.0));
    std::vector<WaveFunction> family;
    for (double w : {0.6, 0.8, 1.0, 1.3, 1.6}) family.push_back(gaussian_state(g3, w));
    family.push_back(gaussian_state(g3, 1.0, {0.7, -0.3, 0.2}, {1.0, 0.5, 0.0}));
    family.push_back(plane_wave(g3, {1, 0, 0}));
    for (long nn : {2L, 4L}) {
      const auto f = jastrow(sol, nn);
      const auto base = gaussian_state(g3, 1.0);
      family.push_back(make_wavefunction(
          g3, sample(g3, [&](const std::array<double, 3>& x) {
                return Complex(f(std::hypot(x[0], x[1], x[2])), 0.0);
              }).cwiseProduct(base.values)));
    }
    double worst = 0.0;
    for (const auto& psi : family) {
      const auto hc = hardy_check(psi);
      worst = std::max(worst, hc.lhs / hc.rhs);
    }
    o.require(worst <= 1.0, fmt::format("Hardy max lhs/rhs {:.4f} <= 1 over {} states", worst, family.size()));
  });

  criterion(12, "determinism", 300.0, [&](Outcome& o) {
    const auto work = fs::temp_directory_path() / "gplab_acceptance_determinism";
    int checked = 0, identical = 0;
    std::string failed;
    for (const auto& entry : fs::directory_iterator(configs)) {
      if (entry.path().extension() != ".json") continue;
      std::vector<std::string> runs;
      bool ran = true;
      for (int rep = 0; rep < 2; ++rep) {
        const auto dir = work / std::to_string(rep);
        fs::remove_all(dir);
        const std::string cmd = fmt::format("GPLAB_OUTPUT_DIR='{}' '{}' --threads 1 run --config '{}' >/dev/null 2>&1",
                                            dir.string(), tool.string(), entry.path().string());
        ran = std::system(cmd.c_str()) == 0 && ran;
        std::string bytes;
        if (fs::exists(dir))
          for (const auto& f : fs::directory_iterator(dir))
            if (f.path().extension() == ".csv") bytes += slurp(f.path());
        ran = ran && !bytes.empty();
        runs.push_back(bytes);
      }
      ++checked;
      if (ran && runs[0] == runs[1]) ++identical;
      else failed += " " + entry.path().filename().string();
    }
    o.require(checked > 0 && identical == checked,
              fmt::format("{} of {} configs byte-identical on rerun{}", identical, checked, failed));
    fs::remove_all(work);
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

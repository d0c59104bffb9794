#include "gplab/cli.hpp"

#include <Eigen/Core>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "gplab/errors.hpp"
#include "gplab/gp.hpp"
#include "gplab/hierarchy.hpp"
#include "gplab/manybody.hpp"
#include "gplab/scattering.hpp"
#include "gplab/snapshot.hpp"

namespace gplab::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// strict JSON access

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(where + ": unknown field '" + item.key() + "'");
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
  return x;
}

long get_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<long>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
  return v.get<bool>();
}

std::vector<double> get_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, where));
  return out;
}

template <class T>
std::array<T, 3> get_triple(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty() || v.size() > 3) throw ConfigError(where + ": expected 1 to 3 numbers");
  std::array<T, 3> out{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if constexpr (std::is_integral_v<T>) out[i] = static_cast<T>(get_integer(v[i], where));
    else out[i] = get_number(v[i], where);
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

int positive_int(const json& v, const std::string& where) {
  const long x = get_integer(v, where);
  require(x >= 1 && x <= 1000000000L, where + ": must be a positive integer");
  return static_cast<int>(x);
}

const std::set<std::string>& experiments() {
  static const std::set<std::string> names{"scatter", "gp_evolve", "gp_groundstate", "manybody",
                                           "hierarchy", "power_counting", "report"};
  return names;
}

PotentialSpec parse_potential(const json& p) {
  check_keys(p, {"kind", "id", "height", "radius", "width", "cutoff", "radii", "values", "file"}, "potential");
  PotentialSpec s;
  require(p.contains("kind"), "potential: 'kind' is required");
  s.kind = get_string(p["kind"], "potential.kind");
  if (p.contains("id")) s.id = get_string(p["id"], "potential.id");
  if (p.contains("height")) s.height = get_number(p["height"], "potential.height");
  if (p.contains("radius")) s.radius = get_number(p["radius"], "potential.radius");
  if (p.contains("width")) s.width = get_number(p["width"], "potential.width");
  if (p.contains("cutoff")) s.cutoff = get_number(p["cutoff"], "potential.cutoff");
  if (p.contains("radii")) s.radii = get_numbers(p["radii"], "potential.radii");
  if (p.contains("values")) s.values = get_numbers(p["values"], "potential.values");
  if (p.contains("file")) s.file = get_string(p["file"], "potential.file");
  if (s.id.empty()) s.id = s.kind;
  if (s.kind == "barrier") {
    require(p.contains("height") && p.contains("radius"), "potential: barrier needs height and radius");
  } else if (s.kind == "gaussian") {
    require(p.contains("height") && p.contains("width"), "potential: gaussian needs height and width");
  } else if (s.kind == "table") {
    require(!s.file.empty() || !s.radii.empty(), "potential: table needs radii/values or file");
  } else {
    require(s.kind == "zero", "potential.kind: unknown kind '" + s.kind + "'");
  }
  build_potential(s);  // validates parameters
  return s;
}

// ---------------------------------------------------------------------------
// output helpers

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string num(double x) { return format_number(x); }
std::string num(long x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

struct Outcome {
  Table table;
  std::string mode = "standard";
  std::vector<std::pair<fs::path, std::function<void(const fs::path&)>>> extra;  // deferred writes
};

void log(const RunOptions& o, const std::string& msg) {
  if (o.verbose) std::cerr << "[gplab] " << msg << '\n';
}

// ---------------------------------------------------------------------------
// experiment helpers

const PotentialSpec& potential_of(const ScenarioConfig& c, const char* who) {
  if (!c.potential) throw ConfigError(std::string(who) + ": a potential is required");
  return *c.potential;
}

double resolve_sigma(const ScenarioConfig& c, bool one_dimensional) {
  const auto& mode = c.coupling.mode;
  if (mode == "explicit") return *c.coupling.value;
  const PotentialModel v = build_potential(potential_of(c, "coupling"));
  if (mode == "born") return one_dimensional ? born_coupling_1d(v) : born_coupling(v);
  if (v.is_zero()) return 0.0;
  return 8.0 * std::numbers::pi * solve_zero_energy(v).a0();
}

WaveFunction initial_state(const ScenarioConfig& c, const GridSpec& grid) {
  const InitialSpec& s = c.initial;
  if (s.kind == "gaussian") return gaussian_state(grid, s.width, s.center, s.momentum);
  if (s.kind == "plane_wave") return plane_wave(grid, s.modes);
  if (s.kind == "random_smooth") {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const WaveFunction env = gaussian_state(grid, s.width, s.center, s.momentum);
    std::vector<std::pair<std::array<int, 3>, Complex>> modes;
    for (int a = -2; a <= 2; ++a)
      for (int b = (grid.dim > 1 ? -2 : 0); b <= (grid.dim > 1 ? 2 : 0); ++b)
        for (int d = (grid.dim > 2 ? -2 : 0); d <= (grid.dim > 2 ? 2 : 0); ++d) {
          const double re = u(rng), im = u(rng);
          modes.push_back({{a, b, d}, Complex(re, im)});
        }
    const double k0 = 2.0 * std::numbers::pi / grid.box_length;
    Field values = sample(grid, [&](const std::array<double, 3>& x) {
      Complex m = 1.0;
      for (const auto& [n, coef] : modes) {
        const double phase = k0 * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]);
        m += 0.25 * coef * std::polar(1.0, phase);
      }
      return m;
    });
    return make_wavefunction(grid, (values.array() * env.values.array()).matrix());
  }
  throw ConfigError("initial.kind '" + s.kind + "' is not available for this experiment");
}

Outcome run_scatter(const ScenarioConfig& c) {
  const PotentialSpec& spec = potential_of(c, "scatter");
  const PotentialModel v = build_potential(spec);
  if (v.is_zero()) throw ConfigError("scatter: the potential must be nonzero");
  Outcome out;
  out.table.header = {"potential_id", "N", "a0", "b0", "alpha", "sigma", "sigma_over_8pi_a0"};
  const std::vector<long> ns = c.scaling_N.empty() ? std::vector<long>{1} : c.scaling_N;
  for (long n : ns) {
    const PotentialModel vn = scale_potential(v, n);
    const ScatteringSolution sol = solve_zero_energy(vn);
    const double sigma = coupling_sigma(sol).sigma;
    out.table.add({spec.id, num(n), num(sol.a0()), num(born_coupling(vn)), num(alpha_strength(vn)),
                   num(sigma), num(sigma / (8.0 * std::numbers::pi * sol.a0()))});
  }
  return out;
}

Outcome run_gp_evolve(const ScenarioConfig& c, const RunOptions& o) {
  const double sigma = resolve_sigma(c, c.grid.dim == 1);
  WaveFunction phi;
  if (c.initial.kind == "ground_state") {
    GroundStateOptions gs;
    gs.max_iterations = c.solver.max_iterations;
    phi = minimize_gp(c.trap, a0_from_sigma(sigma), c.grid, c.solver.tol, gs).phi;
    log(o, "ground state prepared; trap removed for the dynamics");
  } else {
    phi = initial_state(c, c.grid);
  }
  const double a0 = a0_from_sigma(sigma);
  const TrapModel none = TrapModel::none();
  Outcome out;
  out.table.header = {"t", "norm", "energy"};
  const long steps = static_cast<long>(std::ceil(c.time.t_final / c.time.dt * (1.0 - 1e-12)));
  const double h = steps > 0 ? c.time.t_final / static_cast<double>(steps) : 0.0;
  const WaveFunction initial = phi;
  out.table.add({num(0.0), num(l2_norm(phi)), num(gp_energy(phi, a0, none))});
  for (long n = 0; n < steps;) {
    const long chunk = std::min<long>(c.time.sample_every, steps - n);
    phi = evolve_gp(phi, sigma, static_cast<double>(chunk) * h, h);
    n += chunk;
    out.table.add({num(static_cast<double>(n) * h), num(l2_norm(phi)), num(gp_energy(phi, a0, none))});
  }
  if (c.output.binary_snapshots) {
    out.extra.push_back({c.output.prefix + "_initial.bin", [initial](const fs::path& p) { write_snapshot(p, initial); }});
    out.extra.push_back({c.output.prefix + "_final.bin", [phi](const fs::path& p) { write_snapshot(p, phi); }});
  }
  return out;
}

Outcome run_gp_groundstate(const ScenarioConfig& c) {
  const double a0 = a0_from_sigma(resolve_sigma(c, c.grid.dim == 1));
  GroundStateOptions gs;
  gs.max_iterations = c.solver.max_iterations;
  if (c.source.contains("initial") && c.initial.kind != "ground_state") gs.initial = initial_state(c, c.grid);
  const GroundState g = minimize_gp(c.trap, a0, c.grid, c.solver.tol, gs);
  Outcome out;
  out.table.header = {"iteration", "energy"};
  for (std::size_t i = 0; i < g.energy_history.size(); ++i) {
    out.table.add({num(static_cast<long>(i)), num(g.energy_history[i])});
  }
  if (c.output.binary_snapshots) {
    const WaveFunction phi = g.phi;
    out.extra.push_back({c.output.prefix + "_groundstate.bin", [phi](const fs::path& p) { write_snapshot(p, phi); }});
  }
  return out;
}

Outcome run_manybody(const ScenarioConfig& c, const RunOptions& o) {
  if (c.trap.confining()) throw ConfigError("manybody: dynamics run without a trap (set trap.kind to none)");
  const int n = c.particles;
  const long ns = c.scaling_N.empty() ? n : c.scaling_N.front();
  const PotentialModel v = c.potential ? build_potential(*c.potential) : PotentialModel::zero();
  const bool analog = c.grid.dim == 1;
  ManyBodyHamiltonian h;
  h.trap = TrapModel::none();
  double sigma = 0.0;
  if (analog) {
    h.pair = scale_potential_analog1d(v, ns);
    h.pair_weight = 1.0 / n;
    sigma = c.coupling.mode == "explicit" ? *c.coupling.value : born_coupling_1d(v);
  } else {
    h.pair = scale_potential(v, ns);
    sigma = c.potential || c.coupling.mode == "explicit" ? resolve_sigma(c, false) : 0.0;
  }
  const WaveFunction phi0 = initial_state(c, c.grid);
  ManyBodyState psi;
  if (c.initial.correlated) {
    if (c.grid.dim != 3) throw ConfigError("manybody: correlated initial data needs a three-dimensional grid");
    if (v.is_zero()) {
      psi = build_product(phi0, n);
    } else {
      const ScatteringSolution sol = solve_zero_energy(v);
      psi = build_jastrow_product(phi0, n, jastrow(sol, ns));
    }
  } else {
    psi = build_product(phi0, n);
  }
  log(o, fmt::format("manybody: N = {}, {} amplitudes, hartree coupling {}", n, psi.size(), sigma));

  const auto hartree = evolve_gp_trajectory(phi0, sigma, c.time.t_final, c.time.dt);
  const double step = hartree.size() > 1 ? c.time.t_final / static_cast<double>(hartree.size() - 1) : 0.0;
  Outcome out;
  out.mode = analog ? "analog1d" : "standard";
  out.table.header = {"t", "norm", "energy", "overlap", "depletion"};
  auto observe = [&](double t, const ManyBodyState& s) {
    const std::size_t idx = step > 0.0 ? static_cast<std::size_t>(std::lround(t / step)) : 0;
    const double overlap = condensate_overlap(s, hartree.at(idx));
    out.table.add({num(t), num(l2_norm(s)), num(energy_moment(s, h, 1)), num(overlap), num(1.0 - overlap)});
  };
  const ManyBodyState final_state = evolve_manybody(psi, h, c.time.t_final, c.time.dt, c.time.sample_every, observe);
  if (c.output.binary_snapshots) {
    const Kernel g1 = marginal(final_state, 1);
    out.extra.push_back({c.output.prefix + "_gamma1.bin", [g1](const fs::path& p) {
                           const Eigen::MatrixXcd rm = g1.matrix.transpose();  // row-major order
                           write_snapshot(p, g1.grid, std::span<const Complex>(rm.data(), static_cast<std::size_t>(rm.size())));
                         }});
  }
  return out;
}

Outcome run_hierarchy(const ScenarioConfig& c, const RunOptions& o) {
  const HierarchySpec& hs = c.hierarchy;
  const double sigma = resolve_sigma(c, c.grid.dim == 1);
  const WaveFunction phi0 = initial_state(c, c.grid);
  const auto traj = evolve_gp_trajectory(phi0, sigma, c.time.t_final, c.time.dt);
  const long frames = static_cast<long>(traj.size());
  const double h = frames > 1 ? c.time.t_final / static_cast<double>(frames - 1) : c.time.dt;
  const long stride = hs.residual_stride;
  if (frames <= 2 * stride) throw ConfigError("hierarchy: t_final / dt must exceed 2 * residual_stride");
  Outcome out;
  out.table.header = {"k", "m", "t", "residual"};
  for (int k = 1; k <= hs.k_max; ++k) {
    for (int j = 1; j <= hs.samples; ++j) {
      long idx = std::lround(static_cast<double>(frames - 1) * j / (hs.samples + 1));
      idx = std::clamp(idx, stride, frames - 1 - stride);
      const double t = static_cast<double>(idx) * h;
      const double r = infinite_hierarchy_residual(traj, h, k, sigma, t, static_cast<double>(stride) * h);
      out.table.add({num(k), num(0), num(t), num(r)});
    }
  }
  if (hs.dyson_terms > 0) {
    const HierarchyFamily family = factorized_family(phi0, hs.dyson_terms, sigma);
    const ProductKernel exact = factorized_kernel(traj.back(), 1);
    for (int n = 1; n <= hs.dyson_terms; ++n) {
      const ProductKernel sum = dyson_partial_sum(family, 1, n, c.time.t_final, hs.quad_points);
      out.table.add({num(1), num(n), num(c.time.t_final), num(frobenius_norm(combine(sum, exact, -1.0)))});
      log(o, fmt::format("dyson partial sum n = {} done", n));
    }
  }
  return out;
}

Outcome run_power_counting(const ScenarioConfig& c) {
  Outcome out;
  out.table.header = {"k", "m", "volume_exp", "decay_exp", "margin"};
  for (int k = 1; k <= c.power_counting.k_max; ++k) {
    for (int m = 0; m <= c.power_counting.m_max; ++m) {
      const PowerCounting p = power_counting_margin(k, m);
      out.table.add({num(k), num(m), num(p.volume_exp), num(p.decay_exp), num(p.margin)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// report

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = any = true;
    } else if (ch == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      row.clear();
      cell.clear();
      any = false;
    } else {
      cell += ch;
      any = true;
    }
  }
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------

PotentialModel build_potential(const PotentialSpec& s) {
  try {
    if (s.kind == "zero") return PotentialModel::zero();
    if (s.kind == "barrier") return PotentialModel::barrier(s.height, s.radius);
    if (s.kind == "gaussian") return PotentialModel::gaussian(s.height, s.width, s.cutoff);
    if (s.kind == "table") {
      if (!s.file.empty()) return PotentialModel::table_from_csv(s.file, s.cutoff);
      return PotentialModel::table(s.radii, s.values, s.cutoff);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  throw ConfigError("potential.kind: unknown kind '" + s.kind + "'");
}

ScenarioConfig parse_config(const json& doc) {
  check_keys(doc, {"schema_version", "experiment", "potential", "trap", "grid", "particles", "scaling_N",
                   "time", "coupling", "output", "seed", "initial", "solver", "hierarchy", "power_counting",
                   "inputs"},
             "config");
  ScenarioConfig c;
  c.source = doc;
  require(doc.contains("schema_version"), "config: 'schema_version' is required");
  c.schema_version = get_string(doc["schema_version"], "schema_version");
  require(c.schema_version == kSchemaVersion, "schema_version: expected \"1\", got \"" + c.schema_version + "\"");
  require(doc.contains("experiment"), "config: 'experiment' is required");
  c.experiment = get_string(doc["experiment"], "experiment");
  require(experiments().count(c.experiment) == 1, "experiment: unknown experiment '" + c.experiment + "'");

  if (doc.contains("potential")) c.potential = parse_potential(doc["potential"]);

  if (doc.contains("trap")) {
    const json& t = doc["trap"];
    check_keys(t, {"kind", "omega"}, "trap");
    const std::string kind = t.contains("kind") ? get_string(t["kind"], "trap.kind") : "none";
    if (kind == "harmonic") {
      require(t.contains("omega"), "trap: harmonic needs omega");
      c.trap = TrapModel::harmonic(get_number(t["omega"], "trap.omega"));
    } else {
      require(kind == "none", "trap.kind: unknown kind '" + kind + "'");
      require(!t.contains("omega"), "trap: omega given for kind none");
    }
  }

  {
    int dim = 1;
    double box = 20.0;
    std::optional<int> points;
    if (doc.contains("grid")) {
      const json& g = doc["grid"];
      check_keys(g, {"dim", "points", "box_length"}, "grid");
      if (g.contains("dim")) dim = positive_int(g["dim"], "grid.dim");
      if (g.contains("points")) points = positive_int(g["points"], "grid.points");
      if (g.contains("box_length")) box = get_number(g["box_length"], "grid.box_length");
    }
    require(dim >= 1 && dim <= 3, "grid.dim: must be 1, 2 or 3");
    c.grid = default_grid(dim, box);
    if (c.experiment == "manybody") c.grid.points = dim == 1 ? 64 : 16;
    if (c.experiment == "hierarchy") c.grid.points = 128;
    if (points) c.grid.points = *points;
    validate(c.grid);
  }

  if (doc.contains("particles")) c.particles = positive_int(doc["particles"], "particles");
  if (doc.contains("scaling_N")) {
    const json& s = doc["scaling_N"];
    require(s.is_array(), "scaling_N: expected an array");
    for (const auto& x : s) c.scaling_N.push_back(positive_int(x, "scaling_N"));
  }
  if (doc.contains("time")) {
    const json& t = doc["time"];
    check_keys(t, {"t_final", "dt", "sample_every"}, "time");
    if (t.contains("t_final")) c.time.t_final = get_number(t["t_final"], "time.t_final");
    if (t.contains("dt")) c.time.dt = get_number(t["dt"], "time.dt");
    if (t.contains("sample_every")) c.time.sample_every = positive_int(t["sample_every"], "time.sample_every");
  }
  require(c.time.dt > 0.0, "time.dt: must be positive");
  require(c.time.t_final >= 0.0, "time.t_final: must be nonnegative");

  if (doc.contains("coupling")) {
    const json& k = doc["coupling"];
    check_keys(k, {"mode", "value"}, "coupling");
    if (k.contains("mode")) c.coupling.mode = get_string(k["mode"], "coupling.mode");
    if (k.contains("value")) c.coupling.value = get_number(k["value"], "coupling.value");
    require(c.coupling.mode == "from_scattering" || c.coupling.mode == "born" || c.coupling.mode == "explicit",
            "coupling.mode: unknown mode '" + c.coupling.mode + "'");
    require(c.coupling.mode != "explicit" || c.coupling.value.has_value(), "coupling: explicit mode needs a value");
    require(c.coupling.mode == "explicit" || !c.coupling.value.has_value(),
            "coupling: value is only allowed in explicit mode");
    require(c.coupling.mode == "explicit" || c.potential.has_value(),
            "coupling: mode " + c.coupling.mode + " requires a potential");
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, {"dir", "prefix", "binary_snapshots"}, "output");
    if (o.contains("dir")) c.output.dir = get_string(o["dir"], "output.dir");
    if (o.contains("prefix")) c.output.prefix = get_string(o["prefix"], "output.prefix");
    if (o.contains("binary_snapshots")) c.output.binary_snapshots = get_bool(o["binary_snapshots"], "output.binary_snapshots");
    require(!c.output.prefix.empty() && c.output.prefix.find('/') == std::string::npos,
            "output.prefix: must be a nonempty file-name stem");
  }
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    require(s.is_number_integer() && !(s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0),
            "seed: expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    check_keys(i, {"kind", "width", "center", "momentum", "modes", "correlated"}, "initial");
    if (i.contains("kind")) c.initial.kind = get_string(i["kind"], "initial.kind");
    if (i.contains("width")) c.initial.width = get_number(i["width"], "initial.width");
    if (i.contains("center")) c.initial.center = get_triple<double>(i["center"], "initial.center");
    if (i.contains("momentum")) c.initial.momentum = get_triple<double>(i["momentum"], "initial.momentum");
    if (i.contains("modes")) c.initial.modes = get_triple<int>(i["modes"], "initial.modes");
    if (i.contains("correlated")) c.initial.correlated = get_bool(i["correlated"], "initial.correlated");
    const auto& k = c.initial.kind;
    require(k == "gaussian" || k == "plane_wave" || k == "random_smooth" || k == "ground_state",
            "initial.kind: unknown kind '" + k + "'");
    require(c.initial.width > 0.0, "initial.width: must be positive");
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, {"tol", "max_iterations"}, "solver");
    if (s.contains("tol")) c.solver.tol = get_number(s["tol"], "solver.tol");
    if (s.contains("max_iterations")) c.solver.max_iterations = positive_int(s["max_iterations"], "solver.max_iterations");
    require(c.solver.tol > 0.0, "solver.tol: must be positive");
  }
  if (doc.contains("hierarchy")) {
    const json& h = doc["hierarchy"];
    check_keys(h, {"k_max", "residual_stride", "samples", "dyson_terms", "quad_points"}, "hierarchy");
    if (h.contains("k_max")) c.hierarchy.k_max = positive_int(h["k_max"], "hierarchy.k_max");
    if (h.contains("residual_stride")) c.hierarchy.residual_stride = positive_int(h["residual_stride"], "hierarchy.residual_stride");
    if (h.contains("samples")) c.hierarchy.samples = positive_int(h["samples"], "hierarchy.samples");
    if (h.contains("dyson_terms")) {
      const long n = get_integer(h["dyson_terms"], "hierarchy.dyson_terms");
      require(n >= 0 && n <= 3, "hierarchy.dyson_terms: must be in 0..3");
      c.hierarchy.dyson_terms = static_cast<int>(n);
    }
    if (h.contains("quad_points")) c.hierarchy.quad_points = positive_int(h["quad_points"], "hierarchy.quad_points");
  }
  if (doc.contains("power_counting")) {
    const json& p = doc["power_counting"];
    check_keys(p, {"k_max", "m_max"}, "power_counting");
    if (p.contains("k_max")) c.power_counting.k_max = positive_int(p["k_max"], "power_counting.k_max");
    if (p.contains("m_max")) {
      const long m = get_integer(p["m_max"], "power_counting.m_max");
      require(m >= 0, "power_counting.m_max: must be nonnegative");
      c.power_counting.m_max = static_cast<int>(m);
    }
  }
  if (doc.contains("inputs")) {
    const json& in = doc["inputs"];
    require(in.is_array(), "inputs: expected an array of directories");
    for (const auto& d : in) c.inputs.emplace_back(get_string(d, "inputs"));
  }

  // experiment-specific requirements
  const auto& e = c.experiment;
  if (e == "scatter") require(c.potential.has_value(), "scatter: a potential is required");
  if (e == "gp_groundstate") require(c.trap.confining(), "gp_groundstate: a confining trap is required");
  if (e == "gp_evolve" && c.initial.kind == "ground_state") {
    require(c.trap.confining(), "gp_evolve: ground_state initial data needs a confining trap");
  }
  if ((e == "gp_evolve" || e == "gp_groundstate" || e == "hierarchy") && !doc.contains("coupling")) {
    require(c.potential.has_value(), e + ": coupling defaults to from_scattering, which requires a potential");
  }
  if (e == "manybody") manybody_size(c.grid, c.particles);
  if (e == "hierarchy") {
    require(c.grid.dim == 1 || c.hierarchy.k_max <= 1, "hierarchy: k_max > 1 needs a one-dimensional grid");
  }
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<fs::path> run_scenario(const ScenarioConfig& c, const RunOptions& o) {
  Eigen::setNbThreads(std::max(1, o.threads));
  fs::path dir = c.output.dir;
  if (const char* env = std::getenv("GPLAB_OUTPUT_DIR"); env && *env) dir = env;
  const auto start = std::chrono::steady_clock::now();
  log(o, "running " + c.experiment);

  if (c.experiment == "report") {
    const fs::path path = report(c.inputs, dir / (c.output.prefix + "_results.csv"));
    return {path};
  }
  Outcome out;
  if (c.experiment == "scatter") out = run_scatter(c);
  else if (c.experiment == "gp_evolve") out = run_gp_evolve(c, o);
  else if (c.experiment == "gp_groundstate") out = run_gp_groundstate(c);
  else if (c.experiment == "manybody") out = run_manybody(c, o);
  else if (c.experiment == "hierarchy") out = run_hierarchy(c, o);
  else out = run_power_counting(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(dir);
  std::vector<fs::path> written;
  const fs::path results = dir / (c.output.prefix + "_results.csv");
  write_text(results, to_csv(out.table));
  written.push_back(results);
  for (const auto& [name, writer] : out.extra) {
    writer(dir / name);
    written.push_back(dir / name);
  }
  json manifest = {{"schema_version", kSchemaVersion},
                   {"tool", "gplab"},
                   {"tool_version", kToolVersion},
                   {"experiment", c.experiment},
                   {"config_hash", config_hash(c.source)},
                   {"mode", out.mode},
                   {"threads", o.threads},
                   {"seed", c.seed},
                   {"wall_time_s", wall},
                   {"results", results.filename().string()}};
  json files = json::array();
  for (const auto& p : written) files.push_back(p.filename().string());
  manifest["files"] = files;
  const fs::path mpath = dir / (c.output.prefix + "_manifest.json");
  write_text(mpath, manifest.dump(2) + "\n");
  written.push_back(mpath);
  log(o, fmt::format("done in {:.3f} s", wall));
  return written;
}

int run(const fs::path& config_path, const RunOptions& options) {
  try {
    run_scenario(load_config(config_path), options);
    return kSuccess;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}

fs::path report(const std::vector<fs::path>& run_dirs, const fs::path& output) {
  std::vector<std::string> columns{"config_hash"};
  std::vector<std::map<std::string, std::string>> rows;
  std::set<std::string> seen;
  for (const auto& dir : run_dirs) {
    std::vector<fs::path> manifests;
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 14 && name.ends_with("_manifest.json")) manifests.push_back(entry.path());
      }
    }
    std::sort(manifests.begin(), manifests.end());
    if (manifests.empty()) {
      warn("report: no manifest in " + dir.string() + ", skipped");
      continue;
    }
    for (const auto& mpath : manifests) {
      json m;
      try {
        std::ifstream in(mpath);
        m = json::parse(in);
      } catch (const json::exception&) {
        warn("report: unreadable manifest " + mpath.string() + ", skipped");
        continue;
      }
      if (!m.contains("config_hash") || !m.contains("results")) {
        warn("report: incomplete manifest " + mpath.string() + ", skipped");
        continue;
      }
      const std::string hash = m["config_hash"].get<std::string>();
      if (!seen.insert(hash).second) continue;
      const auto table = read_csv(mpath.parent_path() / m["results"].get<std::string>());
      if (table.empty()) continue;
      const auto& header = table.front();
      for (const auto& h : header)
        if (std::find(columns.begin(), columns.end(), h) == columns.end()) columns.push_back(h);
      for (std::size_t r = 1; r < table.size(); ++r) {
        std::map<std::string, std::string> row{{"config_hash", hash}};
        for (std::size_t i = 0; i < header.size() && i < table[r].size(); ++i) row[header[i]] = table[r][i];
        rows.push_back(std::move(row));
      }
    }
  }
  Table t;
  t.header = columns;
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (const auto& col : columns) {
      const auto it = r.find(col);
      line.push_back(it == r.end() ? "" : it->second);
    }
    t.add(std::move(line));
  }
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_text(output, to_csv(t));
  return output;
}

}  // namespace gplab::cli

#include "bohm/io/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <limits>

#include <json.hpp>

#include "bohm/error.hpp"
#include "bohm/manybody.hpp"
#include "bohm/numerics.hpp"
#include "bohm/observables.hpp"
#include "bohm/parallel.hpp"
#include "bohm/qhje.hpp"
#include "bohm/sampling.hpp"
#include "bohm/tdse.hpp"

namespace bohm::io {

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }
ordered_json opt(const std::optional<bool>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json report_json(const ObservableReport& r) {
  return ordered_json{{"name", r.name},
                      {"units", r.units},
                      {"orthodox_value", opt(r.orthodox_value)},
                      {"bohmian_density_value", opt(r.bohmian_density_value)},
                      {"trajectory_ensemble_value", opt(r.trajectory_ensemble_value)},
                      {"density_tolerance", r.density_tolerance},
                      {"ensemble_tolerance", r.ensemble_tolerance},
                      {"density_agrees", opt(r.density_agrees)},
                      {"ensemble_agrees", opt(r.ensemble_agrees)}};
}

ordered_json reports_at(const ComplexField& psi, const std::vector<double>& positions, const UnitSystem& units,
                        double time) {
  ordered_json arr = ordered_json::array();
  for (auto r : {position_report(psi, positions), momentum_report(psi, positions, units),
                 kinetic_report(psi, positions, units)}) {
    auto j = report_json(r);
    j["time"] = time;
    arr.push_back(std::move(j));
  }
  return arr;
}

ComplexField normalized(ComplexField psi) {
  const double n = norm(psi);
  if (!(n > 0.0)) throw DomainError("initial state vanishes on the grid");
  const double s = 1.0 / std::sqrt(n);
  for (auto& z : psi.data()) z *= s;
  return psi;
}

GaussianParams gaussian_of(const PacketSpec& p) { return GaussianParams{p.width, p.center, p.k, 0.0}; }

void polar_table(const ScenarioConfig& cfg, const Grid1D& grid, const UnitSystem& units, ComplexField& out) {
  const auto path = cfg.polar_table.is_absolute() ? cfg.polar_table : cfg.base_dir / cfg.polar_table;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read polar table " + path.string(), 0, "table");
  std::vector<double> xs, rs, ss;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 && line.find_first_of("xX") != std::string::npos) continue;  // header
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double v[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 3; ++i) {
      while (p < end && (*p == ' ' || *p == ',' || *p == '\t')) ++p;
      auto [q, ec] = std::from_chars(p, end, v[i]);
      if (ec != std::errc{}) throw ConfigError("polar table row " + std::to_string(n) + " needs x, R, S", 0, "table");
      p = q;
    }
    if (!xs.empty() && !(v[0] > xs.back())) throw ConfigError("polar table x must increase", 0, "table");
    xs.push_back(v[0]);
    rs.push_back(v[1]);
    ss.push_back(v[2]);
  }
  if (xs.size() < 2) throw ConfigError("polar table needs at least two rows", 0, "table");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.x(k);
    if (x < xs.front() || x > xs.back()) {
      out[k] = 0.0;
      continue;
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()), xs.size() - 1);
    const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    const double r = (1.0 - w) * rs[j - 1] + w * rs[j];
    const double s = (1.0 - w) * ss[j - 1] + w * ss[j];
    out[k] = std::polar(r, s / units.hbar());
  }
}

std::vector<double> initial_positions(const RealField& density, const ScenarioConfig& cfg, std::uint64_t seed,
                                      std::size_t count) {
  if (count == 0) return {};
  return cfg.sampling == Sampling::quantile ? quantile_positions(density, count)
                                            : sample_quantum_equilibrium(density, count, seed);
}

// Trajectory samples kept at snapshot times only.
struct SnapshotEnsemble {
  TrajectoryEnsemble ens;

  void add(double t, const std::vector<double>& x, const RealField& velocity) {
    if (ens.trajectories.empty()) {
      ens.trajectories.resize(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) ens.trajectories[j].id = j;
    }
    ens.times.push_back(t);
    for (std::size_t j = 0; j < x.size(); ++j) {
      ens.trajectories[j].x.push_back(x[j]);
      ens.trajectories[j].v.push_back(interpolate<double>(velocity.values(), velocity.grid(), x[j]));
    }
  }
};

CsvTable trajectory_table(const TrajectoryEnsemble& ens) {
  CsvTable t({"traj_id", "t", "x", "v"});
  for (std::size_t s = 0; s < ens.times.size(); ++s) {
    for (const auto& tr : ens.trajectories) t.add_row(tr.id, {ens.times[s], tr.x[s], tr.v[s]});
  }
  return t;
}

void field_rows(CsvTable& table, double t, const ComplexField& psi, const UnitSystem& units) {
  const auto vf = bohmian_velocity(psi, units, t);
  RealField amp(psi.grid());
  for (std::size_t k = 0; k < psi.size(); ++k) amp[k] = std::abs(psi[k]);
  const auto q = quantum_potential(amp, units);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < psi.size(); ++k) {
    table.add_row({t, psi.grid().x(k), psi[k].real(), psi[k].imag(), abs2(psi[k]), vf.velocity[k],
                   q.mask[k] ? nan : q.values[k]});
  }
}

// Residence time in [lo, hi] accumulated over linear segments.
struct DwellTally {
  Region region;
  double total = 0.0;
  std::size_t members = 0;

  void segment(double xa, double xb, double dt) {
    if (xa == xb) {
      if (xa >= region.lo && xa <= region.hi) total += dt;
      return;
    }
    const double a = std::min(xa, xb), b = std::max(xa, xb);
    const double overlap = std::min(b, region.hi) - std::max(a, region.lo);
    if (overlap > 0.0) total += dt * overlap / (b - a);
  }
  double mean() const { return members ? total / static_cast<double>(members) : 0.0; }
};

struct Outputs {
  CsvTable fields{{"t", "x", "re", "im", "density", "velocity", "Q"}};
  ordered_json obs = ordered_json::object();
  std::optional<CsvTable> extra;
  std::string extra_name;
};

// ---- single-particle time-dependent runs ---------------------------------

void run_wave(const ScenarioConfig& cfg, const RunOptions& opts, RunResult& res, Outputs& out) {
  const Grid1D grid = cfg.grid();
  const UnitSystem units = cfg.units();
  const RealField v = cfg.potential.sample(grid);
  const ComplexField psi0 = initial_state(cfg);
  TdseConfig tc{cfg.dt, cfg.steps, cfg.nonlinearity, cfg.frame_every, cfg.override_stability || opts.override_stability};
  check_stability_gate(tc, grid, units);
  res.stability_factor = stability_factor(tc, grid, units);

  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  auto x0 = initial_positions(density(psi0), cfg, seed, cfg.ensemble_size);
  IntegratorConfig ic;
  ic.record_stride = std::numeric_limits<std::size_t>::max();
  TrajectoryIntegrator integ(x0, ic, seed, to_string(cfg.solver));
  std::optional<RegionOccupancy> occ;
  std::optional<DwellTally> tally;
  if (cfg.dwell_region) {
    occ.emplace(cfg.dwell_region->lo, cfg.dwell_region->hi);
    tally = DwellTally{*cfg.dwell_region, 0.0, x0.size()};
  }
  ordered_json reports = ordered_json::array();
  SnapshotEnsemble snaps;
  std::vector<double> prev_x = x0;
  double prev_t = 0.0;
  bool first = true;

  double velocity_gap = 0.0;  // worst over snapshots
  auto on_frame = [&](std::size_t step, double t, const ComplexField& psi) {
    const auto vf = bohmian_velocity(psi, units, t);
    integ.push(vf);
    if (occ) occ->add(t, psi);
    const auto& x = integ.positions();
    if (tally && !first) {
      for (std::size_t j = 0; j < x.size(); ++j) tally->segment(prev_x[j], x[j], t - prev_t);
    }
    prev_x = x;
    prev_t = t;
    const bool snap = step % cfg.snapshot_every == 0 || step == cfg.steps;
    if (snap) {
      if (cfg.write_fields) field_rows(out.fields, t, psi, units);
      if (!x.empty()) snaps.add(t, x, vf.velocity);
      if (opts.on_snapshot) opts.on_snapshot(t, psi);
      velocity_gap = std::max(velocity_gap, velocity_definition_gap(psi, units, &v).relative);
    }
    if ((first || step == cfg.steps) && cfg.write_observables) {
      for (auto& r : reports_at(psi, x, units, t)) reports.push_back(std::move(r));
    }
    if (step == cfg.steps) res.final_psi = psi;
    first = false;
  };

  if (cfg.solver == SolverKind::tdse) {
    const bool gaussian_ok = (cfg.state == StateKind::gaussian || cfg.state == StateKind::two_gaussian) &&
                             cfg.nonlinearity == 0.0 && cfg.potential.kind() == PotentialSpec::Kind::flat &&
                             cfg.potential.background() == 0.0;
    if (cfg.startup == Startup::exact && !gaussian_ok) {
      throw ConfigError("exact startup needs Gaussian packets in a zero potential with no nonlinearity", 0,
                        "startup");
    }
    const bool exact = gaussian_ok && cfg.startup != Startup::euler;
    StartupPair start = [&] {
      if (!exact) return startup_euler(psi0, v, tc, units);
      std::vector<GaussianParams> ps{gaussian_of(cfg.packet)};
      std::vector<Complex> ws{1.0};
      if (cfg.state == StateKind::two_gaussian) {
        ps.push_back(gaussian_of(cfg.packet2));
        ws.push_back(cfg.weight2);
      }
      ComplexField raw(grid);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        auto g = gaussian_packet(ps[i], 0.0, grid, units);
        for (std::size_t k = 0; k < grid.size(); ++k) raw[k] += ws[i] * g[k];
      }
      const double s = 1.0 / std::sqrt(norm(raw));
      for (auto& w : ws) w *= s;
      return startup_from_gaussians(ps, ws, grid, cfg.dt, units);
    }();
    auto sum = evolve(std::move(start), v, tc, units,
                      [&](const Snapshot& s) { on_frame(s.step, s.time, s.psi); });
    res.max_norm_drift = sum.max_norm_drift;
    out.obs["euler_startup"] = !exact;
  } else {
    // qhje-eulerian: forward Euler on (ln R, S) over the fixed grid.
    auto f = to_log_polar(psi0, units);
    const double n0 = norm(psi0);
    on_frame(0, 0.0, psi0);
    for (std::size_t j = 1; j <= cfg.steps; ++j) {
      f = eulerian_logpolar_step(f, v, cfg.dt, units);
      if (j % cfg.frame_every == 0 || j == cfg.steps) {
        const auto psi = from_log_polar(f, units);
        res.max_norm_drift = std::max(res.max_norm_drift, std::abs(norm(psi) - n0));
        on_frame(j, cfg.dt * static_cast<double>(j), psi);
      }
    }
  }
  res.node_carries = integ.ensemble().node_carries;
  res.boundary_hits = integ.ensemble().boundary_hits;
  res.ensemble = std::move(snaps.ens);
  res.ensemble.seed = seed;
  res.ensemble.source = to_string(cfg.solver);
  res.ensemble.node_carries = res.node_carries;
  res.ensemble.boundary_hits = res.boundary_hits;
  out.obs["reports"] = std::move(reports);
  out.obs["max_norm_drift"] = res.max_norm_drift;
  out.obs["velocity_definition_gap"] = velocity_gap;
  if (occ) {
    ordered_json d{{"lo", cfg.dwell_region->lo}, {"hi", cfg.dwell_region->hi}};
    d["trajectory"] = tally->mean();
    try {
      d["density"] = occ->dwell_time();
    } catch (const InconclusiveRunError&) {
      throw InconclusiveRunError("density in the dwell region has not decayed below 1e-6 of its peak by the end of "
                                 "the run; extend the duration");
    }
    out.obs["dwell_time"] = std::move(d);
  }
}

// ---- Lagrangian fluid elements ---------------------------------------------

void run_lagrangian(const ScenarioConfig& cfg, const RunOptions& opts, RunResult& res, Outputs& out) {
  const UnitSystem units = cfg.units();
  const ComplexField psi0 = initial_state(cfg);
  const std::size_t count = cfg.ensemble_size ? cfg.ensemble_size : 64;
  auto x0 = quantile_positions(density(psi0), count);
  auto elems = make_elements(x0, to_polar(psi0, units), units);
  ClassicalConfig cc;
  cc.dt = cfg.dt;
  cc.steps = cfg.steps;
  cc.record_stride = cfg.snapshot_every;
  cc.quantum = cfg.quantum;
  cc.scheme = cfg.scheme;
  double hmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < elems.size(); ++i) hmin = std::min(hmin, elems.x[i] - elems.x[i - 1]);
  res.stability_factor = units.hbar() * cfg.dt / (units.mass() * hmin * hmin);
  auto run = fluid_ensemble_evolve(std::move(elems), cfg.potential, cc, units);
  res.ensemble = std::move(run.ensemble);
  res.ensemble.seed = opts.seed.value_or(cfg.seed);
  out.obs["caustic"] = run.caustic;
  out.obs["caustic_time"] = run.caustic ? ordered_json(run.caustic_time) : ordered_json(nullptr);
  out.obs["elements"] = count;
}

// ---- stationary states -----------------------------------------------------

void run_bound(const ScenarioConfig& cfg, Outputs& out) {
  const Grid1D grid = cfg.grid();
  const UnitSystem units = cfg.units();
  auto states = bound_states(cfg.potential, grid, units, cfg.eigen_count);
  CsvTable spectrum({"n", "energy", "energy_ev"});
  CsvTable shapes({"n", "x", "psi", "density", "Q"});
  ordered_json reports = ordered_json::array();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 0; n < states.size(); ++n) {
    const auto& s = states[n];
    spectrum.add_row(n + 1, {s.energy, units.electron_volts(s.energy)});
    RealField amp(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) amp[k] = std::abs(s.wavefunction[k]);
    const auto q = quantum_potential(amp, units);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      shapes.add_row(n + 1, {grid.x(k), s.wavefunction[k], s.wavefunction[k] * s.wavefunction[k],
                             q.mask[k] ? nan : q.values[k]});
    }
    ComplexField psi(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) psi[k] = s.wavefunction[k];
    auto j = report_json(kinetic_report(psi, {}, units));
    j["state"] = n + 1;
    reports.push_back(std::move(j));
  }
  out.obs["reports"] = std::move(reports);
  out.extra = std::move(spectrum);
  out.extra_name = "spectrum.csv";
  // Shapes replace the time-dependent fields file.
  out.fields = std::move(shapes);
}

void run_scatter(const ScenarioConfig& cfg, const RunOptions& opts, RunResult& res, Outputs& out) {
  const Grid1D grid = cfg.grid();
  const UnitSystem units = cfg.units();
  double energy = 0.0;
  if (cfg.energy) {
    energy = *cfg.energy;
  } else {
    const auto& scan = res.scan;
    auto best = scan.end();
    for (auto it = scan.begin(); it != scan.end(); ++it) {
      if (it->resonance && (best == scan.end() || it->transmission > best->transmission)) best = it;
    }
    if (best == scan.end()) throw InconclusiveRunError("no resonance inside the scan window");
    energy = best->energy;
  }
  auto sol = scattering_state(cfg.potential, energy, grid, units);
  const auto& psi = sol.interior;
  const auto vf = bohmian_velocity(psi, units, 0.0);
  const RealField v = cfg.potential.sample(grid);
  const auto j = numerov_current(sol, v, units);
  const auto [jmin, jmax] = std::minmax_element(j.begin(), j.end());
  out.obs["energy"] = energy;
  out.obs["energy_ev"] = units.electron_volts(energy);
  out.obs["transmission"] = std::norm(sol.t);
  out.obs["reflection"] = std::norm(sol.r);
  out.obs["current_spread"] = (*jmax - *jmin) / std::max(std::abs(*jmax), std::abs(*jmin));
  out.obs["velocity_definition_gap"] = velocity_definition_gap(psi, units, &v).relative;
  if (cfg.write_fields) field_rows(out.fields, 0.0, psi, units);
  if (opts.on_snapshot) opts.on_snapshot(0.0, psi);
  res.final_psi = psi;

  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  auto x0 = initial_positions(density(psi), cfg, seed, cfg.ensemble_size);
  std::size_t reversals = 0;
  if (!x0.empty() && cfg.steps > 0) {
    IntegratorConfig ic;
    ic.record_stride = std::numeric_limits<std::size_t>::max();
    TrajectoryIntegrator integ(x0, ic, seed, "tise-scatter");
    VelocityFrame frame = vf;
    std::vector<double> last = x0;
    std::vector<std::uint8_t> flipped(x0.size(), 0);
    SnapshotEnsemble snaps;
    for (std::size_t s = 0; s <= cfg.steps; ++s) {
      frame.time = cfg.dt * static_cast<double>(s);
      integ.push(frame);
      const auto& x = integ.positions();
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < last[i]) flipped[i] = 1;
      }
      last = x;
      if (s % cfg.snapshot_every == 0 || s == cfg.steps) snaps.add(frame.time, x, frame.velocity);
    }
    for (auto f : flipped) reversals += f;
    res.boundary_hits = integ.ensemble().boundary_hits;
    res.node_carries = integ.ensemble().node_carries;
    res.ensemble = std::move(snaps.ens);
    res.ensemble.seed = seed;
    res.ensemble.source = "tise-scatter";
    res.ensemble.boundary_hits = res.boundary_hits;
    res.ensemble.node_carries = res.node_carries;
  }
  out.obs["reversals"] = reversals;
}

// ---- two particles --------------------------------------------------------

std::vector<std::array<double, 2>> pair_starts(const ScenarioConfig& cfg, const ComplexField& a,
                                               const ComplexField& b, const ComplexField2D& psi, std::uint64_t seed) {
  const std::size_t m = std::max<std::size_t>(cfg.ensemble_size, 1);
  std::vector<std::array<double, 2>> out;
  if (!cfg.particle_positions.empty()) out.push_back({cfg.particle_positions[0], cfg.particle_positions[1]});
  const std::size_t need = m - out.size();
  if (need == 0) return out;
  if (cfg.state == StateKind::product) {
    auto x1 = sample_quantum_equilibrium(density(a), need, seed);
    auto x2 = sample_quantum_equilibrium(density(b), need, seed + 1);
    for (std::size_t i = 0; i < need; ++i) out.push_back({x1[i], x2[i]});
    return out;
  }
  // Marginal of particle 1, then particle 2 from the nearest row.
  const Grid1D& g = a.grid();
  RealField marginal(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += abs2(psi(i, k));
    marginal[i] = s;
  }
  auto x1 = sample_quantum_equilibrium(marginal, need, seed);
  for (std::size_t i = 0; i < need; ++i) {
    const std::size_t c = g.cell_of(x1[i]);
    const std::size_t row = (x1[i] - g.x(c) < 0.5 * g.dx()) ? c : c + 1;
    RealField cond(g);
    for (std::size_t k = 0; k < g.size(); ++k) cond[k] = abs2(psi(row, k));
    out.push_back({x1[i], sample_quantum_equilibrium(cond, 1, seed + 1 + i)[0]});
  }
  return out;
}

void run_many_body(const ScenarioConfig& cfg, const RunOptions& opts, RunResult& res, Outputs& out) {
  const Grid1D grid = cfg.grid();
  const UnitSystem units = cfg.units();
  const RealField v1 = cfg.potential.sample(grid);
  const auto a = gaussian_packet(gaussian_of(cfg.packet), 0.0, grid, units);
  const auto b = gaussian_packet(gaussian_of(cfg.packet2), 0.0, grid, units);
  const bool symmetric = cfg.state == StateKind::symmetric;
  const ComplexField2D psi = cfg.state == StateKind::product ? product_state(a, b) : exchange_state(a, b, symmetric);
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const auto starts = pair_starts(cfg, a, b, psi, seed);
  const bool override = cfg.override_stability || opts.override_stability;

  res.ensemble.seed = seed;
  res.ensemble.source = to_string(cfg.solver);
  res.ensemble.trajectories.resize(2 * starts.size());
  std::vector<std::uint8_t> transmitted(2 * starts.size(), 0);
  const double right = cfg.potential.segments().empty() ? 0.0 : cfg.potential.segments().back().hi;

  if (cfg.solver == SolverKind::manybody_exact) {
    const auto v2 = two_particle_potential(v1, v1, cfg.interaction);
    TwoParticleConfig tc{cfg.dt, cfg.steps, cfg.snapshot_every, override};
    auto run = exact_two_particle_evolve(startup_euler(psi, v2, cfg.dt, units), v2, tc, units, starts);
    res.stability_factor = run.stability_factor;
    res.max_norm_drift = run.max_norm_drift;
    res.node_carries = run.node_carries;
    res.boundary_hits = run.boundary_hits;
    res.ensemble.times = run.times;
    for (std::size_t m = 0; m < starts.size(); ++m) {
      auto& t1 = res.ensemble.trajectories[2 * m];
      auto& t2 = res.ensemble.trajectories[2 * m + 1];
      t1 = Trajectory{2 * m, run.paths[m].x1, run.paths[m].v1};
      t2 = Trajectory{2 * m + 1, run.paths[m].x2, run.paths[m].v2};
    }
  } else {
    const auto sym = cfg.solver == SolverKind::manybody_conditional
                         ? ExchangeSymmetry::none
                         : (symmetric ? ExchangeSymmetry::symmetric : ExchangeSymmetry::antisymmetric);
    ConditionalConfig cc{cfg.dt, v1, cfg.interaction, override};
    res.stability_factor = stability_factor(cfg.dt, grid, units);
    for (std::size_t m = 0; m < starts.size(); ++m) {
      auto st = make_many_body_state({a, b}, {starts[m][0], starts[m][1]}, sym, cc, units);
      auto run = conditional_evolve(std::move(st), cc, units, cfg.steps, cfg.snapshot_every);
      res.node_carries += run.final_state.node_carries;
      res.boundary_hits += run.final_state.boundary_hits;
      res.ensemble.times = run.times;
      for (std::size_t p = 0; p < 2; ++p) {
        auto tr = std::move(run.trajectories[p]);
        tr.id = 2 * m + p;
        res.ensemble.trajectories[2 * m + p] = std::move(tr);
      }
    }
  }
  for (std::size_t i = 0; i < res.ensemble.trajectories.size(); ++i) {
    transmitted[i] = res.ensemble.trajectories[i].x.back() > right;
  }
  out.obs["max_norm_drift"] = res.max_norm_drift;
  out.obs["particles_per_member"] = 2;
  out.obs["transmitted_past"] = right;
  ordered_json tx = ordered_json::array();
  for (auto t : transmitted) tx.push_back(static_cast<bool>(t));
  out.obs["transmitted"] = std::move(tx);
}

[[noreturn]] void rethrow_with_context(const std::string& name) {
  const std::string pre = "scenario '" + name + "': ";
  try {
    throw;
  } catch (const InstabilityError& e) {
    throw InstabilityError(pre + e.what(), e.stability_factor());
  } catch (const InconclusiveRunError& e) {
    throw InconclusiveRunError(pre + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(pre + e.what(), 0, e.key());
  } catch (const StepSizeError& e) {
    throw StepSizeError(pre + e.what());
  } catch (const UnsupportedConfigError& e) {
    throw UnsupportedConfigError(pre + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(pre + e.what());
  } catch (const DomainError& e) {
    throw DomainError(pre + e.what());
  } catch (const Error& e) {
    throw Error(pre + e.what());
  }
}

}  // namespace

std::filesystem::path default_output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("runs");
}

ComplexField initial_state(const ScenarioConfig& cfg) {
  const Grid1D grid = cfg.grid();
  const UnitSystem units = cfg.units();
  ComplexField psi(grid);
  switch (cfg.state) {
    case StateKind::gaussian:
      psi = gaussian_packet(gaussian_of(cfg.packet), 0.0, grid, units);
      break;
    case StateKind::two_gaussian: {
      auto a = gaussian_packet(gaussian_of(cfg.packet), 0.0, grid, units);
      auto b = gaussian_packet(gaussian_of(cfg.packet2), 0.0, grid, units);
      for (std::size_t k = 0; k < grid.size(); ++k) psi[k] = a[k] + cfg.weight2 * b[k];
      break;
    }
    case StateKind::eigenstate:
      if (cfg.box) {
        const double lo = cfg.box->lo, len = cfg.box->hi - cfg.box->lo;
        const double n = static_cast<double>(cfg.eigen_index);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const double x = grid.x(k);
          psi[k] = (x > lo && x < cfg.box->hi) ? std::sin(n * std::numbers::pi * (x - lo) / len) : 0.0;
        }
      } else {
        auto states = bound_states(cfg.potential, grid, units, cfg.eigen_index);
        if (states.size() < cfg.eigen_index) throw DomainError("requested eigenstate was not found");
        for (std::size_t k = 0; k < grid.size(); ++k) psi[k] = states.back().wavefunction[k];
      }
      break;
    case StateKind::polar:
      polar_table(cfg, grid, units, psi);
      break;
    case StateKind::product:
    case StateKind::antisymmetrized:
    case StateKind::symmetric:
      throw UnsupportedConfigError("two-particle states have no single-particle form");
  }
  psi[0] = 0.0;
  psi[grid.size() - 1] = 0.0;
  return normalized(std::move(psi));
}

std::vector<TransmissionPoint> scan_transmission(const ScenarioConfig& cfg, double emin, double emax, double de) {
  if (!(emax > emin) || !(de > 0.0)) throw ConfigError("scan needs emax > emin and de > 0");
  ScenarioConfig c = cfg;
  c.scan_emin = emin;
  c.scan_emax = emax;
  c.scan_de = de;
  return transmission_scan(c.potential, c.scan_energies(), c.grid(), c.units());
}

std::string transmission_csv(const std::vector<TransmissionPoint>& scan, const UnitSystem& units, std::size_t* rows) {
  CsvTable t({"energy_ev", "transmission", "reflection", "resonance"});
  for (const auto& p : scan) {
    t.add_row({units.electron_volts(p.energy), p.transmission, p.reflection, p.resonance ? 1.0 : 0.0});
  }
  if (rows) *rows = t.rows();
  return t.text();
}

RunResult run_scenario(ScenarioConfig cfg, const RunOptions& opts) {
  set_thread_count(std::max<std::size_t>(1, opts.threads));
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.override_stability) cfg.override_stability = true;
  RunResult res;
  Outputs out;
  try {
    if (cfg.has_scan()) {
      res.scan = transmission_scan(cfg.potential, cfg.scan_energies(), cfg.grid(), cfg.units());
    }
    switch (cfg.solver) {
      case SolverKind::tdse:
      case SolverKind::qhje_eulerian:
        run_wave(cfg, opts, res, out);
        break;
      case SolverKind::qhje_lagrangian:
        run_lagrangian(cfg, opts, res, out);
        break;
      case SolverKind::tise_bound:
        run_bound(cfg, out);
        break;
      case SolverKind::tise_scatter:
        run_scatter(cfg, opts, res, out);
        break;
      case SolverKind::manybody_exact:
      case SolverKind::manybody_conditional:
      case SolverKind::manybody_conditional_exchange:
        run_many_body(cfg, opts, res, out);
        break;
    }
  } catch (const Error&) {
    set_thread_count(1);
    rethrow_with_context(cfg.name);
  }
  set_thread_count(1);

  ordered_json obs{{"scenario", cfg.name}, {"solver", to_string(cfg.solver)}};
  for (const auto& el : out.obs.items()) obs[el.key()] = el.value();
  res.observables_json = obs.dump(2) + "\n";

  res.dir = opts.out_dir.empty() ? default_output_root() / (cfg.name + "-seed" + std::to_string(cfg.seed))
                                 : opts.out_dir;
  if (opts.write) {
    std::error_code ec;
    std::filesystem::create_directories(res.dir, ec);
    if (ec) throw Error("cannot create output directory " + res.dir.string() + ": " + ec.message());
    const bool wave_fields = cfg.solver == SolverKind::tdse || cfg.solver == SolverKind::qhje_eulerian ||
                             cfg.solver == SolverKind::tise_scatter;
    if (cfg.solver == SolverKind::tise_bound) {
      res.files.push_back(write_file(res.dir, "eigenstates.csv", out.fields.text(), out.fields.rows()));
    } else if (wave_fields && cfg.write_fields) {
      res.files.push_back(write_file(res.dir, "fields.csv", out.fields.text(), out.fields.rows()));
    }
    if (out.extra) res.files.push_back(write_file(res.dir, out.extra_name, out.extra->text(), out.extra->rows()));
    if (cfg.write_trajectories && cfg.solver != SolverKind::tise_bound) {
      const auto t = trajectory_table(res.ensemble);
      res.files.push_back(write_file(res.dir, "trajectories.csv", t.text(), t.rows()));
    }
    if (!res.scan.empty()) {
      std::size_t rows = 0;
      const auto text = transmission_csv(res.scan, cfg.units(), &rows);
      res.files.push_back(write_file(res.dir, "transmission.csv", text, rows));
    }
    if (cfg.write_observables) {
      res.files.push_back(write_file(res.dir, "observables.json", res.observables_json, 0));
    }
  }

  ordered_json files = ordered_json::array();
  for (const auto& f : res.files) {
    files.push_back({{"name", f.name}, {"rows", f.rows}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  ordered_json manifest{
      {"program", "bohm"},
      {"version", kVersion},
      {"compiler", __VERSION__},
      {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                           "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"scenario", cfg.name},
      {"preset", cfg.preset},
      {"solver", to_string(cfg.solver)},
      {"seed", cfg.seed},
      {"dt", cfg.dt},
      {"steps", cfg.steps},
      {"stability_factor", res.stability_factor},
      {"node_carries", res.node_carries},
      {"boundary_hits", res.boundary_hits},
      {"max_norm_drift", res.max_norm_drift},
      {"files", std::move(files)},
      {"config", to_text(cfg)},
  };
  res.manifest_json = manifest.dump(2) + "\n";
  if (opts.write) write_file(res.dir, "manifest.json", res.manifest_json, 0);
  return res;
}

}  // namespace bohm::io

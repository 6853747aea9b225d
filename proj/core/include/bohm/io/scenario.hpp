#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bohm/manybody.hpp"
#include "bohm/potential.hpp"
#include "bohm/qhje.hpp"
#include "bohm/units.hpp"

namespace bohm::io {

enum class StateKind { gaussian, two_gaussian, eigenstate, polar, product, antisymmetrized, symmetric };
enum class SolverKind {
  tdse,
  tise_bound,
  tise_scatter,
  qhje_lagrangian,
  qhje_eulerian,
  manybody_exact,
  manybody_conditional,
  manybody_conditional_exchange,
};
enum class Sampling { random, quantile };
enum class Startup { automatic, exact, euler };

std::string to_string(StateKind k);
std::string to_string(SolverKind k);

struct PacketSpec {
  double width = 0.0;   // amplitude width a, m
  double center = 0.0;  // m
  double k = 0.0;       // 1/m
};

struct Region {
  double lo = 0.0;
  double hi = 0.0;
};

/// Fully resolved scenario, SI throughout.
struct ScenarioConfig {
  std::string name = "scenario";
  std::string preset;
  std::filesystem::path base_dir;  // for relative table paths

  double mass = 0.0;  // kg

  double x_min = 0.0, x_max = 0.0, dx = 1e-10;

  PotentialSpec potential = PotentialSpec::flat();

  StateKind state = StateKind::gaussian;
  PacketSpec packet;
  PacketSpec packet2;
  double weight2 = 1.0;
  std::size_t eigen_index = 1;      // 1-based
  std::optional<Region> box;        // eigenstate of a hard-walled box
  std::filesystem::path polar_table;

  InteractionSpec interaction = InteractionSpec::none();
  std::vector<double> particle_positions;  // many-body members beyond the first are sampled

  SolverKind solver = SolverKind::tdse;
  double dt = 0.0;
  double stability_target = 0.2;
  std::size_t steps = 0;
  double nonlinearity = 0.0;  // J m
  Startup startup = Startup::automatic;
  std::size_t eigen_count = 5;
  std::optional<double> energy;  // tise-scatter; empty means the resonance of the scan
  LagrangianScheme scheme = LagrangianScheme::rk4;
  bool quantum = true;

  std::size_t ensemble_size = 0;
  std::uint64_t seed = 1;
  Sampling sampling = Sampling::random;

  bool write_fields = true;
  bool write_trajectories = true;
  bool write_observables = true;
  std::size_t snapshot_every = 0;  // steps; 0 picks about 50 snapshots per run
  std::size_t frame_every = 10;    // steps between velocity frames for trajectories
  std::optional<Region> dwell_region;

  std::optional<double> scan_emin, scan_emax, scan_de;

  bool override_stability = false;

  UnitSystem units() const { return UnitSystem(mass); }
  Grid1D grid() const { return Grid1D::with_step(x_min, x_max, dx); }
  bool many_body() const noexcept {
    return solver == SolverKind::manybody_exact || solver == SolverKind::manybody_conditional ||
           solver == SolverKind::manybody_conditional_exchange;
  }
  bool has_scan() const noexcept { return scan_emin && scan_emax && scan_de; }
  std::vector<double> scan_energies() const;
};

/// Parses the sectioned key = value format. A `preset = name` key in
/// [scenario] loads that preset first; keys in `text` then replace the
/// preset's. Throws ConfigError with the line and key on any problem.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& file);

/// Canonical text of the resolved config; parse_scenario(to_text(c)) == c.
std::string to_text(const ScenarioConfig& cfg);

/// Parses "<number> [unit]" for a quantity of the given dimension.
enum class Dimension { none, length, energy, time, wavenumber, rate, mass, coupling };
double parse_quantity(const std::string& text, Dimension dim);

}  // namespace bohm::io

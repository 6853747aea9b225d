#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/tdse.hpp"
#include "bohm/trajectory.hpp"
#include "bohm/units.hpp"

namespace bohm {

enum class InteractionKind { softened_coulomb, tabulated_pair };

/// Pair energy as a function of separation. The softening length stands in
/// for the screening of a finite lateral cross-section.
struct InteractionSpec {
  InteractionKind kind = InteractionKind::softened_coulomb;
  double strength = si::coulomb_strength;  // J m; divide by eps_r for a dielectric
  double softening = 1e-9;                 // m
  std::vector<double> table_r;             // separations, ascending, m
  std::vector<double> table_u;             // J; held constant beyond the ends

  static InteractionSpec coulomb(double strength, double softening);
  static InteractionSpec tabulated(std::vector<double> r, std::vector<double> u);
  static InteractionSpec none();

  void validate() const;
  double pair(double separation) const;
};

/// U(x) = sum_k pair(|x - x_k|) over the given partner positions.
RealField interaction_field(const Grid1D& grid, std::span<const double> partners,
                            const InteractionSpec& spec);

/// Same with the softened Coulomb form q^2 / sqrt(r^2 + s^2).
RealField softened_coulomb(const Grid1D& grid, std::span<const double> partners, double strength,
                           double softening);

// ---- exact two-particle oracle -------------------------------------------

/// V(x1, x2) = V1(x1) + V2(x2) + pair(|x1 - x2|).
RealField2D two_particle_potential(const RealField& v1, const RealField& v2, const InteractionSpec& spec);

ComplexField2D product_state(const ComplexField& a, const ComplexField& b);
/// (a(x1) b(x2) - b(x1) a(x2)) / sqrt(2), or with + for `symmetric`.
ComplexField2D exchange_state(const ComplexField& a, const ComplexField& b, bool symmetric = false);

double norm(const ComplexField2D& psi);

/// hbar dt / m (1/dx1^2 + 1/dx2^2); leapfrog is stable below 0.5, as in 1D.
double stability_factor(double dt, const Grid2D& grid, const UnitSystem& units);

struct StartupPair2D {
  ComplexField2D prev;
  ComplexField2D curr;
  double t0 = 0.0;
};

StartupPair2D startup_euler(const ComplexField2D& psi0, const RealField2D& potential, double dt,
                            const UnitSystem& units, double t0 = 0.0);

struct TwoParticleConfig {
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t record_stride = 1;    // trajectory samples and snapshots
  bool override_stability = false;
  double node_threshold = kNodeThreshold;  // relative to the frame's peak density
};

struct Snapshot2D {
  std::size_t step = 0;
  double time = 0.0;
  const ComplexField2D* psi = nullptr;
  double norm_drift = 0.0;
};

using Snapshot2DSink = std::function<void(const Snapshot2D&)>;

struct PairPath {
  std::vector<double> x1, x2, v1, v2;
};

struct TwoParticleRun {
  std::vector<double> times;
  std::vector<PairPath> paths;
  double stability_factor = 0.0;
  double max_norm_drift = 0.0;
  std::size_t node_carries = 0;
  std::size_t boundary_hits = 0;
  ComplexField2D final_psi;
};

/// Leapfrog on the 2D grid with a five-point Laplacian; Bohmian pairs follow
/// (J1, J2) / |psi|^2 with RK4 between consecutive time levels.
TwoParticleRun exact_two_particle_evolve(StartupPair2D start, const RealField2D& potential,
                                         const TwoParticleConfig& cfg, const UnitSystem& units,
                                         const std::vector<std::array<double, 2>>& initial,
                                         const Snapshot2DSink& sink = {});

/// max |d rho/dt + div J| at the middle level of three consecutive fields.
double continuity_residual(const ComplexField2D& prev, const ComplexField2D& curr,
                           const ComplexField2D& next, double dt, const UnitSystem& units);

// ---- conditional wave functions -------------------------------------------

enum class ExchangeSymmetry { none, antisymmetric, symmetric };

/// N particles on one shared 1D grid. Without exchange there is one wave per
/// particle; with exchange waves(a, h) is particle a's copy of packet h.
struct ManyBodyState {
  Grid1D grid;
  std::size_t n = 0;
  ExchangeSymmetry symmetry = ExchangeSymmetry::none;
  std::vector<ComplexField> prev;  // level j-1
  std::vector<ComplexField> curr;  // level j
  std::vector<double> positions;
  std::vector<double> velocities;
  double time = 0.0;
  std::size_t steps = 0;
  std::size_t node_carries = 0;
  std::size_t boundary_hits = 0;
  bool startup_pending = false;  // prev holds the bootstrapped level 1

  std::size_t waves_per_particle() const noexcept { return symmetry == ExchangeSymmetry::none ? 1 : n; }
  const ComplexField& wave(std::size_t a, std::size_t h = 0) const { return curr[a * waves_per_particle() + h]; }
};

struct ConditionalConfig {
  double dt = 0.0;
  RealField external;            // potential felt by every particle
  InteractionSpec interaction;
  bool override_stability = false;
  double node_threshold = kNodeThreshold;
};

/// Starts every wave from its packet and bootstraps the second level with
/// one Euler step under the potential at the initial positions. With
/// exchange, waves(a, h) starts from packets[h] for every a.
ManyBodyState make_many_body_state(const std::vector<ComplexField>& packets, std::vector<double> positions,
                                   ExchangeSymmetry symmetry, const ConditionalConfig& cfg,
                                   const UnitSystem& units, double t0 = 0.0);

/// Potential seen by particle a with the others frozen at their positions.
RealField conditional_potential(const ManyBodyState& s, std::size_t a, const ConditionalConfig& cfg);

/// The wave that guides particle a: its own wave without exchange, or the
/// determinant (permanent) with row a on the grid and other rows at the
/// current positions.
ComplexField guiding_wave(const ManyBodyState& s, std::size_t a);

/// One leapfrog step of every wave, then RK4 moves each particle in the field
/// of its guiding wave between the old and new level.
ManyBodyState conditional_step_no_exchange(ManyBodyState s, const ConditionalConfig& cfg, const UnitSystem& units);
ManyBodyState conditional_step_exchange(ManyBodyState s, const ConditionalConfig& cfg, const UnitSystem& units);

/// Dispatches on the state's symmetry; in place.
void conditional_step(ManyBodyState& s, const ConditionalConfig& cfg, const UnitSystem& units);

struct ConditionalRun {
  std::vector<double> times;
  std::vector<Trajectory> trajectories;
  ManyBodyState final_state;
};

ConditionalRun conditional_evolve(ManyBodyState s, const ConditionalConfig& cfg, const UnitSystem& units,
                                  std::size_t steps, std::size_t record_stride = 1);

}  // namespace bohm

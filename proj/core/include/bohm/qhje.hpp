#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/potential.hpp"
#include "bohm/trajectory.hpp"
#include "bohm/units.hpp"

namespace bohm {

/// Minimum element count for the quartic moving-least-squares stencil.
inline constexpr std::size_t kMlsWindow = 7;
inline constexpr int kMlsDegree = 4;

/// Fluid elements of the Lagrangian solver, ordered by position.
struct FluidElementSet {
  std::vector<double> x;  // m
  std::vector<double> S;  // J s
  std::vector<double> R;  // amplitude, > 0
  std::vector<double> v;  // m/s

  std::size_t size() const noexcept { return x.size(); }
};

/// d/dx (order 1) or d2/dx2 (order 2) of scattered samples: a quartic
/// least-squares fit over the 7 nearest consecutive elements, differentiated
/// at each element. Positions must be strictly increasing.
std::vector<double> scattered_derivative(std::span<const double> values,
                                         std::span<const double> positions, int order);

/// First and second derivative from one fit per element.
struct ScatteredDerivatives {
  std::vector<double> d1;
  std::vector<double> d2;
};
ScatteredDerivatives scattered_derivatives(std::span<const double> values,
                                           std::span<const double> positions);

/// Elements at `positions` with R and S sampled from functions; v = S'/m.
FluidElementSet make_elements(std::vector<double> positions, const std::function<double(double)>& amplitude,
                              const std::function<double(double)>& action, const UnitSystem& units);

/// Elements at `positions` with R and S interpolated from a polar field.
FluidElementSet make_elements(std::vector<double> positions, const PolarField& polar,
                              const UnitSystem& units);

enum class LagrangianScheme {
  euler,  // one forward-Euler cascade per step
  rk4,    // classical RK4 on (x, S, ln R) with refits at every stage
};

struct LagrangianOptions {
  bool quantum = true;
  int max_halvings = 20;
  LagrangianScheme scheme = LagrangianScheme::rk4;
};

/// Step below which RK4 keeps the dispersive quantum term stable for the
/// current element spacing: m h_min^2 / hbar times `safety`.
double lagrangian_stable_dt(const FluidElementSet& elems, const UnitSystem& units, double safety = 0.5);

/// Advances the elements by dt. In the Euler cascade the right-hand side is
/// fitted at the old positions, positions move with the old velocities and v
/// is refitted on the new positions; RK4 chains four such evaluations. When the ordering breaks the step is retried as two
/// half steps, recursively, up to max_halvings levels (StepSizeError past
/// that). With fewer than 7 elements in classical mode each element follows
/// its own characteristic instead.
FluidElementSet lagrangian_step(const FluidElementSet& elems, const PotentialSpec& potential,
                                double dt, const UnitSystem& units,
                                const LagrangianOptions& opts = {});

/// psi = exp(C + i S / hbar) on a fixed grid.
struct LogPolarField {
  Grid1D grid;
  std::vector<double> C;
  std::vector<double> S;
};

LogPolarField to_log_polar(const ComplexField& psi, const UnitSystem& units);
ComplexField from_log_polar(const LogPolarField& f, const UnitSystem& units);

/// Forward Euler on the log-polar quantum Hamilton-Jacobi pair.
LogPolarField eulerian_logpolar_step(const LogPolarField& f, const RealField& potential, double dt,
                                     const UnitSystem& units);

struct ClassicalConfig {
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t record_stride = 1;
  bool quantum = false;  // true runs the same driver with the quantum potential
  int max_halvings = 20;
  LagrangianScheme scheme = LagrangianScheme::rk4;
};

struct FluidRun {
  TrajectoryEnsemble ensemble;
  FluidElementSet final_elements;
  bool caustic = false;
  double caustic_time = 0.0;  // when the run stopped early
};

/// Evolves `elements` (from make_elements) step by step, recording positions
/// and velocities every record_stride steps. An ordering violation that step
/// halving cannot repair ends the run early with `caustic` set.
FluidRun fluid_ensemble_evolve(FluidElementSet elements, const PotentialSpec& potential,
                               const ClassicalConfig& cfg, const UnitSystem& units, double t0 = 0.0);

/// Classical mode from an initial polar field: elements at the given
/// positions, no quantum potential.
FluidRun classical_ensemble_evolve(const PolarField& initial, std::vector<double> positions,
                                   const PotentialSpec& potential, ClassicalConfig cfg,
                                   const UnitSystem& units);

}  // namespace bohm

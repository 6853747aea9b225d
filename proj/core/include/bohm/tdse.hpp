#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "bohm/field.hpp"
#include "bohm/potential.hpp"
#include "bohm/units.hpp"

namespace bohm {

/// Factor above which the runner refuses to start without an override.
inline constexpr double kStabilityGate = 0.25;

struct TdseConfig {
  double dt = 0.0;                  // s
  std::size_t steps = 0;
  double nonlinearity_g = 0.0;      // J m, adds g |psi|^2 to V
  std::size_t snapshot_stride = 1;
  bool override_stability = false;
};

/// Free Gaussian packet. `a` is the amplitude width parameter: the density at
/// t = t1 is proportional to exp(-2 (x - x0)^2 / a^2).
struct GaussianParams {
  double a = 0.0;   // m
  double x0 = 0.0;  // m
  double kc = 0.0;  // 1/m
  double t1 = 0.0;  // s
};

/// Closed-form free evolution of the packet, evaluated at time t.
ComplexField gaussian_packet(const GaussianParams& p, double t, const Grid1D& grid,
                             const UnitSystem& units);

/// 1 - (norm of the sampled packet); large values mean the grid truncates it.
double gaussian_truncation(const GaussianParams& p, double t, const Grid1D& grid,
                           const UnitSystem& units);

/// hbar dt / (m dx^2).
double stability_factor(double dt, const Grid1D& grid, const UnitSystem& units);
double stability_factor(const TdseConfig& cfg, const Grid1D& grid, const UnitSystem& units);

/// Throws InstabilityError when the factor exceeds the gate and the config
/// carries no override.
void check_stability_gate(const TdseConfig& cfg, const Grid1D& grid, const UnitSystem& units);

/// One leapfrog level: psi_{j+1} from psi_{j-1}, psi_j. End points stay 0.
ComplexField step_explicit(const ComplexField& prev, const ComplexField& curr,
                           const RealField& potential, const TdseConfig& cfg,
                           const UnitSystem& units);

/// In-place variant: `prev` is overwritten with psi_{j+1}.
void step_explicit_inplace(ComplexField& prev, const ComplexField& curr,
                           const RealField& potential, const TdseConfig& cfg,
                           const UnitSystem& units);

/// The two time levels a leapfrog run starts from.
struct StartupPair {
  ComplexField prev;  // at t0
  ComplexField curr;  // at t0 + dt
  double t0 = 0.0;
  bool euler_bootstrap = false;
};

/// Both levels from the closed-form Gaussian (exact in a flat potential).
StartupPair startup_from_gaussian(const GaussianParams& p, const Grid1D& grid, double dt,
                                  const UnitSystem& units);
StartupPair startup_from_gaussians(const std::vector<GaussianParams>& packets,
                                   const std::vector<Complex>& weights, const Grid1D& grid,
                                   double dt, const UnitSystem& units);

/// Arbitrary field plus one forward-Euler step.
StartupPair startup_euler(const ComplexField& psi0, const RealField& potential, const TdseConfig& cfg,
                          const UnitSystem& units, double t0 = 0.0);

struct Snapshot {
  std::size_t step = 0;
  double time = 0.0;
  ComplexField psi;
  double norm_drift = 0.0;  // norm(t) - norm(t0)
};

using SnapshotSink = std::function<void(const Snapshot&)>;

struct EvolveSummary {
  std::size_t steps = 0;
  std::size_t snapshots = 0;
  double stability_factor = 0.0;
  double max_norm_drift = 0.0;
  bool euler_bootstrap = false;
};

/// Runs cfg.steps levels beyond t0 and emits a snapshot at step 0, every
/// snapshot_stride steps, and at the last step.
EvolveSummary evolve(StartupPair start, const RealField& potential, const TdseConfig& cfg,
                     const UnitSystem& units, const SnapshotSink& sink);

/// Collects every snapshot in memory.
std::vector<Snapshot> evolve_collect(StartupPair start, const RealField& potential,
                                     const TdseConfig& cfg, const UnitSystem& units,
                                     EvolveSummary* summary = nullptr);

}  // namespace bohm

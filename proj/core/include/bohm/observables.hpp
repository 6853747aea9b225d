#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/trajectory.hpp"
#include "bohm/units.hpp"

namespace bohm {

/// One quantity computed three ways. Values left empty were not computed.
struct ObservableReport {
  std::string name;
  std::string units;
  std::optional<double> orthodox_value;
  std::optional<double> bohmian_density_value;
  std::optional<double> trajectory_ensemble_value;
  double density_tolerance = 0.0;   // absolute, orthodox vs density form
  double ensemble_tolerance = 0.0;  // absolute, density form vs ensemble
  std::optional<bool> density_agrees;
  std::optional<bool> ensemble_agrees;

  /// Fills the agreement flags from whichever values are present.
  void evaluate();
};

/// Integral of |psi|^2 x, divided by the norm.
double mean_position(const ComplexField& psi);
double mean_position(std::span<const double> positions);

struct MomentumMean {
  double orthodox = 0.0;     // Re of the integral of psi* (-i hbar d/dx) psi
  double bohmian = 0.0;      // integral of R^2 dS/dx over non-node points
  double masked_mass = 0.0;  // probability on phase-node points
};

MomentumMean mean_momentum(const ComplexField& psi, const UnitSystem& units);
/// m times the mean ensemble velocity.
double mean_momentum(std::span<const double> velocities, const UnitSystem& units);

/// <T> = <Q> + <p_B^2>/2m. All three use nearest-neighbour links with zero
/// ghosts beyond the ends, so the identity holds to rounding.
struct KineticMean {
  double total = 0.0;
  double bohmian_kinetic_part = 0.0;
  double quantum_potential_part = 0.0;

  double residual() const noexcept { return total - bohmian_kinetic_part - quantum_potential_part; }
};

KineticMean mean_kinetic(const ComplexField& psi, const UnitSystem& units);

enum class LocalOperator { position, momentum, kinetic, potential, current, density };

/// Throws DomainError for names outside the supported set.
LocalOperator local_operator_from_name(const std::string& name);
std::string to_string(LocalOperator op);

/// A_B(x) = Re[psi* A psi] / |psi|^2 on unmasked points; for `current` the
/// field is J itself and for `density` it is R^2.
struct LocalMean {
  LocalOperator op = LocalOperator::position;
  RealField values;
  std::vector<std::uint8_t> mask;
  double mean = 0.0;                // integral of R^2 A_B (J for current) over unmasked points
  double masked_mass = 0.0;
  double imaginary_integral = 0.0;  // integral of Im[psi* A psi]
};

LocalMean local_operator_mean(const ComplexField& psi, LocalOperator op, const UnitSystem& units,
                              const RealField* potential = nullptr, double node_threshold = 1e-6);

struct EnsembleMean {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t used = 0;  // positions that landed on unmasked cells
};

/// Average of A_B at the given positions, linearly interpolated.
EnsembleMean ensemble_mean(const LocalMean& local, std::span<const double> positions);

/// Probability inside [lo, hi] from a stream of snapshots.
class RegionOccupancy {
 public:
  RegionOccupancy(double lo, double hi);

  void add(double time, const ComplexField& psi);

  /// Trapezoid over the recorded times. Throws InconclusiveRunError unless
  /// the density in the region fell below `decay` of the run's peak density
  /// by the last snapshot.
  double dwell_time(double decay = 1e-6) const;

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& probability() const noexcept { return prob_; }

 private:
  double lo_, hi_;
  std::vector<double> times_;
  std::vector<double> prob_;
  double peak_ = 0.0;
  double last_region_peak_ = 0.0;
};

/// Mean residence time in [lo, hi]; each trajectory is linear between samples
/// and every entry counts.
double dwell_time(const TrajectoryEnsemble& ensemble, double lo, double hi);

/// J/|psi|^2 against dS/dx / m. Both derivatives use the same 9-point
/// stencil, kept inside one constant piece of `potential` when given (psi'' jumps
/// where V does). Points below `threshold` of the peak density, or whose
/// stencil touches a phase node, are skipped.
struct VelocityGap {
  double relative = 0.0;  // max |difference| / max |v|
  double max_speed = 0.0;
  double worst_x = 0.0;
  std::size_t points = 0;
};

VelocityGap velocity_definition_gap(const ComplexField& psi, const UnitSystem& units,
                                    const RealField* potential = nullptr, double threshold = 1e-6);

struct DwellReport {
  double trajectory = 0.0;
  double density = 0.0;
};

ObservableReport position_report(const ComplexField& psi, std::span<const double> positions);
ObservableReport momentum_report(const ComplexField& psi, std::span<const double> positions,
                                 const UnitSystem& units);
ObservableReport kinetic_report(const ComplexField& psi, std::span<const double> positions,
                                const UnitSystem& units);

}  // namespace bohm

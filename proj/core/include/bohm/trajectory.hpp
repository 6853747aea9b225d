#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/numerics.hpp"
#include "bohm/units.hpp"

namespace bohm {

/// J = (hbar/m) Im(psi* dpsi/dx).
RealField current_density(const ComplexField& psi, const UnitSystem& units);

struct VelocityFrame {
  double time = 0.0;
  RealField velocity;
  RealField density;
  std::vector<std::uint8_t> node_mask;
  std::size_t carried = 0;  // masked points that took a neighbour's value
};

/// v = J / |psi|^2; masked points copy the nearest unmasked value.
VelocityFrame bohmian_velocity(const ComplexField& psi, const UnitSystem& units, double time = 0.0,
                               double node_threshold = kNodeThreshold);

/// (1/m) dS/dx.
RealField velocity_from_phase(const PolarField& polar, const UnitSystem& units);

struct MaskedField {
  RealField values;
  std::vector<std::uint8_t> mask;  // 1 where undefined; values there are 0
};

/// Q = -(hbar^2/2m) R''/R where R > threshold * max R.
MaskedField quantum_potential(const RealField& amplitude, const UnitSystem& units,
                              double node_threshold = 1e-6);

struct Trajectory {
  std::size_t id = 0;
  std::vector<double> x;
  std::vector<double> v;
};

/// All trajectories share `times`; sample i of each trajectory is at times[i].
struct TrajectoryEnsemble {
  std::vector<double> times;
  std::vector<Trajectory> trajectories;
  std::uint64_t seed = 0;
  std::string source;
  std::size_t boundary_hits = 0;  // (trajectory, frame interval) pairs clamped at an edge
  std::size_t node_carries = 0;   // (trajectory, frame interval) pairs ending on a masked cell

  std::size_t size() const noexcept { return trajectories.size(); }
  std::size_t samples() const noexcept { return times.size(); }
  std::vector<double> positions_at(std::size_t sample) const;
};

struct IntegratorConfig {
  double max_step = std::numeric_limits<double>::infinity();  // RK4 step bound, s
  std::size_t max_substeps = 100000;  // per frame interval
  std::size_t record_stride = 1;      // keep every n-th frame
};

/// RK4 on velocities interpolated linearly in x and t between consecutive
/// frames. Positions leaving the grid are clamped to its edge and counted.
class TrajectoryIntegrator {
 public:
  TrajectoryIntegrator(std::vector<double> initial, IntegratorConfig cfg = {},
                       std::uint64_t seed = 0, std::string source = {});

  void push(const VelocityFrame& frame);
  const TrajectoryEnsemble& ensemble() const noexcept { return ens_; }
  TrajectoryEnsemble take() { return std::move(ens_); }
  const std::vector<double>& positions() const noexcept { return x_; }

 private:
  void record(const VelocityFrame& frame);

  IntegratorConfig cfg_;
  TrajectoryEnsemble ens_;
  std::vector<double> x_;
  std::optional<VelocityFrame> last_;
  std::size_t frames_ = 0;
};

TrajectoryEnsemble integrate_trajectories(const std::vector<VelocityFrame>& frames,
                                          std::vector<double> initial,
                                          const IntegratorConfig& cfg = {}, std::uint64_t seed = 0);

/// Integral of |psi|^2 from the left edge to x.
double left_probability(const ComplexField& psi, double x);
double left_probability(const RealField& density, double x);

}  // namespace bohm

#pragma once

#include <optional>
#include <vector>

#include "bohm/field.hpp"

namespace bohm {

/// One rectangular segment of a piecewise potential, [lo, hi) at `height` (J).
struct Barrier {
  double lo;
  double hi;
  double height;
};

/// External potential V(x). Piecewise potentials are sampled as cell averages
/// so that discontinuities falling on a grid point take the mean of both sides.
class PotentialSpec {
 public:
  enum class Kind { flat, piecewise, tabulated, harmonic };

  static PotentialSpec flat(double height = 0.0);
  /// Segments must be ordered and non-overlapping; outside them V = background.
  static PotentialSpec piecewise(std::vector<Barrier> segments, double background = 0.0);
  static PotentialSpec tabulated(RealField table);
  /// V = 0.5 * mass * omega^2 * (x - center)^2.
  static PotentialSpec harmonic(double mass, double omega, double center = 0.0);

  Kind kind() const noexcept { return kind_; }
  double value(double x) const;
  double derivative(double x) const;

  /// Samples on `grid`. Tabulated potentials require the table's own grid.
  RealField sample(const Grid1D& grid) const;

  const std::vector<Barrier>& segments() const noexcept { return segments_; }
  double background() const noexcept { return background_; }
  double stiffness() const noexcept { return stiffness_; }
  double center() const noexcept { return center_; }
  const std::optional<RealField>& table() const noexcept { return table_; }

 private:
  PotentialSpec() = default;
  double cell_average(double lo, double hi) const;

  Kind kind_ = Kind::flat;
  double background_ = 0.0;
  std::vector<Barrier> segments_;
  double stiffness_ = 0.0;
  double center_ = 0.0;
  std::optional<RealField> table_;
};

}  // namespace bohm

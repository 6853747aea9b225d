#include "bohm/potential.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/numerics.hpp"

namespace bohm {

PotentialSpec PotentialSpec::flat(double height) {
  PotentialSpec p;
  p.kind_ = Kind::flat;
  p.background_ = height;
  return p;
}

PotentialSpec PotentialSpec::piecewise(std::vector<Barrier> segments, double background) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.hi > s.lo)) throw DomainError("potential segment has non-positive width");
    if (i > 0 && s.lo < segments[i - 1].hi) {
      throw DomainError("potential segments must be ordered and non-overlapping");
    }
  }
  PotentialSpec p;
  p.kind_ = Kind::piecewise;
  p.background_ = background;
  p.segments_ = std::move(segments);
  return p;
}

PotentialSpec PotentialSpec::tabulated(RealField table) {
  PotentialSpec p;
  p.kind_ = Kind::tabulated;
  p.table_ = std::move(table);
  return p;
}

PotentialSpec PotentialSpec::harmonic(double mass, double omega, double center) {
  if (!(mass > 0.0) || !(omega > 0.0)) throw DomainError("harmonic potential needs mass, omega > 0");
  PotentialSpec p;
  p.kind_ = Kind::harmonic;
  p.stiffness_ = mass * omega * omega;
  p.center_ = center;
  return p;
}

double PotentialSpec::value(double x) const {
  switch (kind_) {
    case Kind::flat:
      return background_;
    case Kind::piecewise:
      for (const auto& s : segments_) {
        if (x >= s.lo && x < s.hi) return s.height;
      }
      return background_;
    case Kind::tabulated:
      return interpolate<double>(table_->values(), table_->grid(), x);
    case Kind::harmonic:
      return 0.5 * stiffness_ * (x - center_) * (x - center_);
  }
  return 0.0;
}

double PotentialSpec::derivative(double x) const {
  switch (kind_) {
    case Kind::flat:
    case Kind::piecewise:
      return 0.0;
    case Kind::tabulated: {
      const auto& g = table_->grid();
      const std::size_t k = g.cell_of(x);
      return ((*table_)[k + 1] - (*table_)[k]) / g.dx();
    }
    case Kind::harmonic:
      return stiffness_ * (x - center_);
  }
  return 0.0;
}

double PotentialSpec::cell_average(double lo, double hi) const {
  double v = background_;
  const double width = hi - lo;
  for (const auto& s : segments_) {
    const double overlap = std::min(hi, s.hi) - std::max(lo, s.lo);
    if (overlap > 0.0) v += (s.height - background_) * overlap / width;
  }
  return v;
}

RealField PotentialSpec::sample(const Grid1D& grid) const {
  if (kind_ == Kind::tabulated) {
    if (!(table_->grid() == grid)) throw ShapeError("tabulated potential grid does not match");
    return *table_;
  }
  RealField out(grid);
  const double h = 0.5 * grid.dx();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.x(k);
    out[k] = kind_ == Kind::piecewise ? cell_average(x - h, x + h) : value(x);
  }
  return out;
}

}  // namespace bohm

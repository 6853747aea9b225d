#pragma once

#include <cstddef>
#include <vector>

namespace bohm {

/// Uniform 1D mesh: point k sits at x0 + k * dx.
class Grid1D {
 public:
  Grid1D(double x0, double dx, std::size_t n);

  /// n points from x_min to x_max inclusive.
  static Grid1D spanning(double x_min, double x_max, std::size_t n);
  /// Points from x_min with step dx covering at least up to x_max.
  static Grid1D with_step(double x_min, double x_max, double dx);

  double x0() const noexcept { return x0_; }
  double dx() const noexcept { return dx_; }
  std::size_t size() const noexcept { return n_; }
  double x(std::size_t k) const noexcept { return x0_ + static_cast<double>(k) * dx_; }
  double x_min() const noexcept { return x0_; }
  double x_max() const noexcept { return x(n_ - 1); }
  double length() const noexcept { return x_max() - x_min(); }
  bool contains(double x) const noexcept { return x >= x_min() && x <= x_max(); }

  /// Index of the cell [x_k, x_{k+1}] holding x, clamped to [0, n-2].
  std::size_t cell_of(double x) const noexcept;

  std::vector<double> points() const;

  bool operator==(const Grid1D&) const = default;

 private:
  double x0_;
  double dx_;
  std::size_t n_;
};

/// Two orthogonal axes; values are stored row-major with axis2 contiguous.
class Grid2D {
 public:
  Grid2D(Grid1D axis1, Grid1D axis2) : axis1_(axis1), axis2_(axis2) {}

  const Grid1D& axis1() const noexcept { return axis1_; }
  const Grid1D& axis2() const noexcept { return axis2_; }
  std::size_t size() const noexcept { return axis1_.size() * axis2_.size(); }
  std::size_t index(std::size_t i1, std::size_t i2) const noexcept { return i1 * axis2_.size() + i2; }

  bool operator==(const Grid2D&) const = default;

 private:
  Grid1D axis1_;
  Grid1D axis2_;
};

}  // namespace bohm

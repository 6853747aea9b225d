#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bohm/error.hpp"
#include "bohm/grid.hpp"

namespace bohm {

using Complex = std::complex<double>;

/// |z|^2 without the hypot that std::norm may go through.
inline double abs2(const Complex& z) noexcept { return z.real() * z.real() + z.imag() * z.imag(); }

/// Scalar samples on a 1D grid. Length always matches the grid.
template <class T>
class Field {
 public:
  using value_type = T;

  explicit Field(Grid1D grid) : grid_(grid), values_(grid.size(), T{}) {}
  Field(Grid1D grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw ShapeError("field has " + std::to_string(values_.size()) + " values for a grid of " +
                       std::to_string(grid_.size()) + " points");
    }
  }

  template <class F>
  static Field from_function(const Grid1D& grid, F&& f) {
    std::vector<T> v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<T>(f(grid.x(k)));
    return Field(grid, std::move(v));
  }

  const Grid1D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator[](std::size_t k) noexcept { return values_[k]; }
  const T& operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  std::vector<T>& data() noexcept { return values_; }
  const std::vector<T>& data() const noexcept { return values_; }

 private:
  Grid1D grid_;
  std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<Complex>;

/// Scalar samples on a 2D grid, row-major (axis2 contiguous).
template <class T>
class Field2D {
 public:
  explicit Field2D(Grid2D grid) : grid_(grid), values_(grid.size(), T{}) {}
  Field2D(Grid2D grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ShapeError("2D field length does not match its grid");
  }

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator()(std::size_t i1, std::size_t i2) noexcept { return values_[grid_.index(i1, i2)]; }
  const T& operator()(std::size_t i1, std::size_t i2) const noexcept {
    return values_[grid_.index(i1, i2)];
  }
  T& operator[](std::size_t k) noexcept { return values_[k]; }
  const T& operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

 private:
  Grid2D grid_;
  std::vector<T> values_;
};

using RealField2D = Field2D<double>;
using ComplexField2D = Field2D<Complex>;

/// Polar form psi = R exp(i S / hbar). `node` marks points where the phase is
/// undefined: density below the node threshold, or a neighbouring phase step
/// larger than pi/2 (a zero of psi lies inside the adjacent cell).
struct PolarField {
  Grid1D grid;
  std::vector<double> amplitude;
  std::vector<double> action;
  std::vector<std::uint8_t> node;

  std::size_t size() const noexcept { return amplitude.size(); }
};

}  // namespace bohm

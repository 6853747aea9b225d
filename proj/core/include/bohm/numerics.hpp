#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/units.hpp"

namespace bohm {

/// Default relative node threshold: a point is a node when
/// |psi|^2 < kNodeThreshold * max |psi|^2.
inline constexpr double kNodeThreshold = 1e-12;

/// First derivative on a uniform grid. Interior points use the central
/// difference (f[k+1] - f[k-1]) / (2 dx); the two end points use first-order
/// one-sided differences.
template <class T>
std::vector<T> gradient(std::span<const T> f, const Grid1D& grid);

/// Three-point second derivative with psi = 0 ghost points beyond both ends.
template <class T>
std::vector<T> laplacian(std::span<const T> f, const Grid1D& grid);

template <class T>
Field<T> gradient(const Field<T>& f) {
  return Field<T>(f.grid(), gradient<T>(f.values(), f.grid()));
}

template <class T>
Field<T> laplacian(const Field<T>& f) {
  return Field<T>(f.grid(), laplacian<T>(f.values(), f.grid()));
}

/// Trapezoid rule over the whole grid.
double trapezoid(std::span<const double> f, double dx);

/// Running trapezoid integral; out[0] = 0, out[n-1] = trapezoid(f, dx).
std::vector<double> cumulative_trapezoid(std::span<const double> f, double dx);

/// |psi|^2 at each point.
std::vector<double> density(std::span<const Complex> psi);
RealField density(const ComplexField& psi);

/// Integral of |psi|^2 by the trapezoid rule.
double norm(const ComplexField& psi);

/// Linear interpolation of grid samples; x outside the grid is clamped.
template <class T>
T interpolate(std::span<const T> f, const Grid1D& grid, double x);

/// Polar decomposition with the action unwrapped left to right.
PolarField to_polar(const ComplexField& psi, const UnitSystem& units,
                    double node_threshold = kNodeThreshold);

ComplexField from_polar(const PolarField& polar, const UnitSystem& units);

}  // namespace bohm

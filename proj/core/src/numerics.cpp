#include "bohm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bohm {

namespace {

void check_length(std::size_t values, const Grid1D& grid) {
  if (values != grid.size()) {
    throw ShapeError("field of length " + std::to_string(values) + " on a grid of " +
                     std::to_string(grid.size()) + " points");
  }
}

}  // namespace

template <class T>
std::vector<T> gradient(std::span<const T> f, const Grid1D& grid) {
  check_length(f.size(), grid);
  const std::size_t n = f.size();
  const double inv2dx = 1.0 / (2.0 * grid.dx());
  std::vector<T> out(n);
  // End rows are the one-sided 2/(2dx) differences.
  out[0] = (f[1] - f[0]) * (2.0 * inv2dx);
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (f[k + 1] - f[k - 1]) * inv2dx;
  out[n - 1] = (f[n - 1] - f[n - 2]) * (2.0 * inv2dx);
  return out;
}

template <class T>
std::vector<T> laplacian(std::span<const T> f, const Grid1D& grid) {
  check_length(f.size(), grid);
  const std::size_t n = f.size();
  const double inv = 1.0 / (grid.dx() * grid.dx());
  std::vector<T> out(n);
  out[0] = (f[1] - 2.0 * f[0]) * inv;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (f[k + 1] - 2.0 * f[k] + f[k - 1]) * inv;
  out[n - 1] = (f[n - 2] - 2.0 * f[n - 1]) * inv;
  return out;
}

template std::vector<double> gradient<double>(std::span<const double>, const Grid1D&);
template std::vector<Complex> gradient<Complex>(std::span<const Complex>, const Grid1D&);
template std::vector<double> laplacian<double>(std::span<const double>, const Grid1D&);
template std::vector<Complex> laplacian<Complex>(std::span<const Complex>, const Grid1D&);

double trapezoid(std::span<const double> f, double dx) {
  if (f.empty()) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
  return s * dx;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double dx) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * dx * (f[k - 1] + f[k]);
  return out;
}

std::vector<double> density(std::span<const Complex> psi) {
  std::vector<double> d(psi.size());
  for (std::size_t k = 0; k < psi.size(); ++k) d[k] = abs2(psi[k]);
  return d;
}

RealField density(const ComplexField& psi) {
  return RealField(psi.grid(), density(psi.values()));
}

double norm(const ComplexField& psi) {
  const auto d = density(psi.values());
  return trapezoid(d, psi.grid().dx());
}

template <class T>
T interpolate(std::span<const T> f, const Grid1D& grid, double x) {
  check_length(f.size(), grid);
  const std::size_t k = grid.cell_of(x);
  const double s = std::clamp((x - grid.x(k)) / grid.dx(), 0.0, 1.0);
  return f[k] * (1.0 - s) + f[k + 1] * s;
}

template double interpolate<double>(std::span<const double>, const Grid1D&, double);
template Complex interpolate<Complex>(std::span<const Complex>, const Grid1D&, double);

PolarField to_polar(const ComplexField& psi, const UnitSystem& units, double node_threshold) {
  const std::size_t n = psi.size();
  PolarField out{psi.grid(), std::vector<double>(n), std::vector<double>(n),
                 std::vector<std::uint8_t>(n, 0)};
  const auto dens = density(psi.values());
  const double peak = *std::max_element(dens.begin(), dens.end());
  const double cutoff = node_threshold * peak;
  constexpr double two_pi = 2.0 * si::pi;

  std::vector<double> theta(n);
  double ref = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.amplitude[k] = std::sqrt(dens[k]);
    if (peak == 0.0 || dens[k] < cutoff) {
      out.node[k] = 1;
      theta[k] = ref;
      continue;
    }
    double step = std::remainder(std::arg(psi[k]) - ref, two_pi);
    if (step <= -si::pi) step += two_pi;
    theta[k] = ref + step;
    ref = theta[k];
  }
  // A phase step above pi/2 between resolved neighbours means psi changes sign
  // inside the cell; both ends are flagged.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (out.node[k] || out.node[k + 1]) continue;
    if (std::abs(theta[k + 1] - theta[k]) > 0.5 * si::pi) {
      out.node[k] = 2;
      out.node[k + 1] = 2;
    }
  }
  for (std::size_t k = 0; k < n; ++k) out.action[k] = units.hbar() * theta[k];
  return out;
}

ComplexField from_polar(const PolarField& polar, const UnitSystem& units) {
  const std::size_t n = polar.size();
  if (polar.action.size() != n || n != polar.grid.size()) {
    throw ShapeError("polar field components have inconsistent lengths");
  }
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = std::polar(polar.amplitude[k], polar.action[k] / units.hbar());
  }
  return ComplexField(polar.grid, std::move(v));
}

}  // namespace bohm

#include "bohm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bohm/error.hpp"

namespace bohm {

Grid1D::Grid1D(double x0, double dx, std::size_t n) : x0_(x0), dx_(dx), n_(n) {
  if (!std::isfinite(x0) || !std::isfinite(dx) || !(dx > 0.0)) {
    throw DomainError("grid step must be positive and finite");
  }
  if (n < 3) throw DomainError("grid needs at least 3 points, got " + std::to_string(n));
}

Grid1D Grid1D::spanning(double x_min, double x_max, std::size_t n) {
  if (n < 3) throw DomainError("grid needs at least 3 points, got " + std::to_string(n));
  if (!(x_max > x_min)) throw DomainError("grid extent must be positive");
  return Grid1D(x_min, (x_max - x_min) / static_cast<double>(n - 1), n);
}

Grid1D Grid1D::with_step(double x_min, double x_max, double dx) {
  if (!(dx > 0.0)) throw DomainError("grid step must be positive");
  if (!(x_max > x_min)) throw DomainError("grid extent must be positive");
  const double cells = (x_max - x_min) / dx;
  const auto n = static_cast<std::size_t>(std::ceil(cells - 1e-9)) + 1;
  return Grid1D(x_min, dx, n);
}

std::size_t Grid1D::cell_of(double x) const noexcept {
  const double s = std::floor((x - x0_) / dx_);
  if (!(s > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(s), n_ - 2);
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(n_);
  for (std::size_t k = 0; k < n_; ++k) p[k] = x(k);
  return p;
}

}  // namespace bohm

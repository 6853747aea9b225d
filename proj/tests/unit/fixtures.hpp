#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bohm/tdse.hpp"

namespace fixture {

using namespace bohm;

// 10 nm packet with k dx = 0.05 on a 1 Angstrom grid.
struct FreePacket {
  UnitSystem units = UnitSystem::electron();
  GaussianParams packet{10e-9, 0.0, 5e8, 0.0};
  Grid1D grid = Grid1D::spanning(-60e-9, 60e-9, 1201);

  double dt_for(double factor) const {
    return factor * units.mass() * grid.dx() * grid.dx() / units.hbar();
  }
};

inline double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

inline double density_std(const ComplexField& psi) {
  const auto& g = psi.grid();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = std::norm(psi[k]) * ((k == 0 || k + 1 == g.size()) ? 0.5 : 1.0);
    m0 += w;
    m1 += w * g.x(k);
    m2 += w * g.x(k) * g.x(k);
  }
  const double mu = m1 / m0;
  return std::sqrt(m2 / m0 - mu * mu);
}

}  // namespace fixture

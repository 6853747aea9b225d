#pragma once

#include <cstddef>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/potential.hpp"
#include "bohm/units.hpp"

namespace bohm {

struct EigenSolution {
  double energy;           // J
  RealField wavefunction;  // trapezoid-normalized, zero at both end points
};

/// Lowest `count` eigenpairs of -(hbar^2/2m) D2 + V with psi = 0 at the two
/// end points, in ascending order.
std::vector<EigenSolution> bound_states(const RealField& potential, const UnitSystem& units,
                                        std::size_t count);
std::vector<EigenSolution> bound_states(const PotentialSpec& potential, const Grid1D& grid,
                                        const UnitSystem& units, std::size_t count);

/// Right-to-left Numerov recursion for phi'' = f phi, seeded with the values at
/// the last two grid points.
template <class T>
Field<T> numerov_sweep(const RealField& f, T seed_last, T seed_before_last);

struct ScatteringSolution {
  double energy;  // J
  double k;       // 1/m, lead wave number
  Complex r;
  Complex t;
  ComplexField interior;  // incident amplitude 1/sqrt(2 pi)
};

/// Stationary state incident from the left. The first and last three samples
/// of the potential form the leads and must be flat and of equal height.
ScatteringSolution scattering_state(const RealField& potential, double energy,
                                    const UnitSystem& units);
ScatteringSolution scattering_state(const PotentialSpec& potential, double energy,
                                    const Grid1D& grid, const UnitSystem& units);

/// Flux on the links (k, k+1) from the discrete Wronskian Im(y_k* y_{k+1}),
/// y = (1 - dx^2 f / 12) psi, which the Numerov recursion conserves exactly.
/// Scaled so that in the leads it equals hbar k |amplitude|^2 / m.
std::vector<double> numerov_current(const ScatteringSolution& s, const RealField& potential,
                                    const UnitSystem& units);

struct TransmissionPoint {
  double energy;
  double transmission;  // |t|^2
  double reflection;    // |r|^2
  bool resonance;       // strict local maximum of |t|^2 within the scan
};

std::vector<TransmissionPoint> transmission_scan(const PotentialSpec& potential,
                                                 const std::vector<double>& energies,
                                                 const Grid1D& grid, const UnitSystem& units);

}  // namespace bohm

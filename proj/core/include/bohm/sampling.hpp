#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bohm/field.hpp"

namespace bohm {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne
/// Twister. Unlike std::uniform_real_distribution the bit pattern is fixed
/// across standard libraries.
inline double canonical_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draws `count` positions distributed as `density` (quantum equilibrium).
/// Inverse-CDF sampling of the piecewise-linear CDF whose node values are the
/// running trapezoid integral. Deterministic for a given seed; positions are
/// returned in draw order.
std::vector<double> sample_quantum_equilibrium(const RealField& density, std::size_t count,
                                               std::uint64_t seed);

/// Deterministic stratified placement: position of quantile (j + 1/2) / count
/// of the same piecewise-linear CDF, restricted to [lo_quantile, hi_quantile].
std::vector<double> quantile_positions(const RealField& density, std::size_t count,
                                       double lo_quantile = 0.0, double hi_quantile = 1.0);

/// Kolmogorov-Smirnov distance between samples and the piecewise-linear CDF of
/// a density on a grid.
double ks_distance(std::vector<double> samples, const RealField& density);

}  // namespace bohm

#include "bohm/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/numerics.hpp"

namespace bohm {

namespace {

struct Cdf {
  const Grid1D& grid;
  std::vector<double> nodes;  // normalized running integral, nodes.back() == 1

  explicit Cdf(const RealField& density) : grid(density.grid()) {
    for (double v : density.values()) {
      if (v < 0.0 || !std::isfinite(v)) throw DomainError("density must be finite and non-negative");
    }
    nodes = cumulative_trapezoid(density.values(), grid.dx());
    const double total = nodes.back();
    if (!(total > 0.0)) throw DomainError("density is identically zero");
    for (double& c : nodes) c /= total;
    nodes.back() = 1.0;
  }

  double inverse(double u) const {
    // First node with CDF >= u; the sample lies in the cell ending there.
    auto it = std::lower_bound(nodes.begin() + 1, nodes.end(), u);
    if (it == nodes.end()) --it;
    const auto k = static_cast<std::size_t>(it - nodes.begin());
    const double lo = nodes[k - 1];
    const double hi = nodes[k];
    const double s = hi > lo ? (u - lo) / (hi - lo) : 0.5;
    return grid.x(k - 1) + std::clamp(s, 0.0, 1.0) * grid.dx();
  }

  double at(double x) const {
    if (x <= grid.x_min()) return 0.0;
    if (x >= grid.x_max()) return 1.0;
    return interpolate<double>(nodes, grid, x);
  }
};

}  // namespace

std::vector<double> sample_quantum_equilibrium(const RealField& density, std::size_t count,
                                               std::uint64_t seed) {
  if (count == 0) throw DomainError("sample count must be at least 1");
  const Cdf cdf(density);
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (auto& x : out) x = cdf.inverse(canonical_uniform(rng));
  return out;
}

std::vector<double> quantile_positions(const RealField& density, std::size_t count,
                                       double lo_quantile, double hi_quantile) {
  if (count == 0) throw DomainError("sample count must be at least 1");
  if (!(lo_quantile >= 0.0 && hi_quantile <= 1.0 && lo_quantile < hi_quantile)) {
    throw DomainError("quantile range must satisfy 0 <= lo < hi <= 1");
  }
  const Cdf cdf(density);
  std::vector<double> out(count);
  const double span = hi_quantile - lo_quantile;
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = cdf.inverse(lo_quantile + span * (static_cast<double>(j) + 0.5) / static_cast<double>(count));
  }
  return out;
}

double ks_distance(std::vector<double> samples, const RealField& density) {
  if (samples.empty()) throw DomainError("KS distance needs at least one sample");
  const Cdf cdf(density);
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double f = cdf.at(samples[j]);
    d = std::max({d, f - static_cast<double>(j) / m, static_cast<double>(j + 1) / m - f});
  }
  return d;
}

}  // namespace bohm

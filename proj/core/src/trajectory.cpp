#include "bohm/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/parallel.hpp"

namespace bohm {

RealField current_density(const ComplexField& psi, const UnitSystem& units) {
  const auto d = gradient(psi);
  const double c = units.hbar() / units.mass();
  RealField j(psi.grid());
  for (std::size_t k = 0; k < psi.size(); ++k) j[k] = c * (std::conj(psi[k]) * d[k]).imag();
  return j;
}

VelocityFrame bohmian_velocity(const ComplexField& psi, const UnitSystem& units, double time,
                               double node_threshold) {
  const std::size_t n = psi.size();
  VelocityFrame fr{time, current_density(psi, units), density(psi), std::vector<std::uint8_t>(n, 0), 0};
  const double peak = *std::max_element(fr.density.data().begin(), fr.density.data().end());
  const double cutoff = node_threshold * peak;
  std::vector<std::ptrdiff_t> good;
  for (std::size_t k = 0; k < n; ++k) {
    if (peak > 0.0 && fr.density[k] >= cutoff) {
      fr.velocity[k] /= fr.density[k];
      good.push_back(static_cast<std::ptrdiff_t>(k));
    } else {
      fr.node_mask[k] = 1;
    }
  }
  if (good.empty()) {
    std::fill(fr.velocity.data().begin(), fr.velocity.data().end(), 0.0);
    fr.carried = n;
    return fr;
  }
  // Nearest unmasked neighbour; ties go left.
  std::size_t g = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!fr.node_mask[k]) continue;
    const auto kk = static_cast<std::ptrdiff_t>(k);
    while (g + 1 < good.size() && good[g + 1] < kk) ++g;
    std::ptrdiff_t best = good[g];
    if (g + 1 < good.size() && std::abs(good[g + 1] - kk) < std::abs(best - kk)) best = good[g + 1];
    fr.velocity[k] = fr.velocity[static_cast<std::size_t>(best)];
    ++fr.carried;
  }
  return fr;
}

RealField velocity_from_phase(const PolarField& polar, const UnitSystem& units) {
  auto g = gradient<double>(polar.action, polar.grid);
  for (double& v : g) v /= units.mass();
  return RealField(polar.grid, std::move(g));
}

MaskedField quantum_potential(const RealField& amplitude, const UnitSystem& units,
                              double node_threshold) {
  const std::size_t n = amplitude.size();
  const auto lap = laplacian(amplitude);
  const double peak = *std::max_element(amplitude.data().begin(), amplitude.data().end());
  const double c = -units.hbar() * units.hbar() / (2.0 * units.mass());
  MaskedField out{RealField(amplitude.grid()), std::vector<std::uint8_t>(n, 0)};
  for (std::size_t k = 0; k < n; ++k) {
    if (amplitude[k] < 0.0) throw DomainError("amplitude must be non-negative");
    if (peak > 0.0 && amplitude[k] > node_threshold * peak) {
      out.values[k] = c * lap[k] / amplitude[k];
    } else {
      out.mask[k] = 1;
    }
  }
  return out;
}

std::vector<double> TrajectoryEnsemble::positions_at(std::size_t sample) const {
  std::vector<double> p(trajectories.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = trajectories[j].x[sample];
  return p;
}

TrajectoryIntegrator::TrajectoryIntegrator(std::vector<double> initial, IntegratorConfig cfg,
                                           std::uint64_t seed, std::string source)
    : cfg_(cfg), x_(std::move(initial)) {
  if (cfg_.record_stride == 0) throw ConfigError("record stride must be at least 1");
  if (!(cfg_.max_step > 0.0)) throw ConfigError("integrator step bound must be positive");
  ens_.seed = seed;
  ens_.source = std::move(source);
  ens_.trajectories.resize(x_.size());
  for (std::size_t j = 0; j < x_.size(); ++j) ens_.trajectories[j].id = j;
}

void TrajectoryIntegrator::record(const VelocityFrame& frame) {
  ens_.times.push_back(frame.time);
  const auto& grid = frame.velocity.grid();
  for (std::size_t j = 0; j < x_.size(); ++j) {
    auto& tr = ens_.trajectories[j];
    tr.x.push_back(x_[j]);
    tr.v.push_back(interpolate<double>(frame.velocity.values(), grid, x_[j]));
  }
}

void TrajectoryIntegrator::push(const VelocityFrame& frame) {
  if (!last_) {
    const auto& grid = frame.velocity.grid();
    for (double x : x_) {
      if (!grid.contains(x)) throw DomainError("initial position outside the grid");
    }
    last_ = frame;
    for (double x : x_) {
      const std::size_t c = grid.cell_of(x);
      ens_.node_carries += (frame.node_mask[c] | frame.node_mask[c + 1]) ? 1 : 0;
    }
    record(frame);
    frames_ = 1;
    return;
  }
  const VelocityFrame& a = *last_;
  const VelocityFrame& b = frame;
  if (!(b.velocity.grid() == a.velocity.grid())) throw ShapeError("velocity frames use different grids");
  const double gap = b.time - a.time;
  if (!(gap > 0.0)) throw ConfigError("velocity frames must be strictly time-ordered");
  const double want = std::ceil(gap / cfg_.max_step - 1e-12);
  if (want > static_cast<double>(cfg_.max_substeps)) {
    throw ConfigError("frame gap needs more integrator steps than the budget allows");
  }
  const std::size_t sub = std::max<std::size_t>(1, static_cast<std::size_t>(want));
  const double h = gap / static_cast<double>(sub);
  const Grid1D& grid = a.velocity.grid();
  const auto va = a.velocity.values();
  const auto vb = b.velocity.values();
  auto vel = [&](double x, double t) {
    const double w = (t - a.time) / gap;
    return (1.0 - w) * interpolate<double>(va, grid, x) + w * interpolate<double>(vb, grid, x);
  };
  std::vector<std::uint8_t> hit(x_.size(), 0), carried(x_.size(), 0);
  parallel_for(0, x_.size(), [&](std::size_t j) {
    double x = x_[j];
    for (std::size_t s = 0; s < sub; ++s) {
      const double t = a.time + static_cast<double>(s) * h;
      const double k1 = vel(x, t);
      const double k2 = vel(x + 0.5 * h * k1, t + 0.5 * h);
      const double k3 = vel(x + 0.5 * h * k2, t + 0.5 * h);
      const double k4 = vel(x + h * k3, t + h);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (x < grid.x_min() || x > grid.x_max()) {
        x = std::clamp(x, grid.x_min(), grid.x_max());
        hit[j] = 1;
      }
    }
    x_[j] = x;
    const std::size_t c = grid.cell_of(x);
    carried[j] = a.node_mask[c] | a.node_mask[c + 1] | b.node_mask[c] | b.node_mask[c + 1];
  }, 256);
  for (auto h1 : hit) ens_.boundary_hits += h1;
  for (auto c1 : carried) ens_.node_carries += c1;
  if (frames_ % cfg_.record_stride == 0) record(b);
  ++frames_;
  last_ = frame;
}

TrajectoryEnsemble integrate_trajectories(const std::vector<VelocityFrame>& frames,
                                          std::vector<double> initial, const IntegratorConfig& cfg,
                                          std::uint64_t seed) {
  TrajectoryIntegrator integ(std::move(initial), cfg, seed);
  for (const auto& f : frames) integ.push(f);
  return integ.take();
}

double left_probability(const RealField& density, double x) {
  const Grid1D& grid = density.grid();
  if (x <= grid.x_min()) return 0.0;
  const double dx = grid.dx();
  const std::size_t k = grid.cell_of(x);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += 0.5 * dx * (density[i] + density[i + 1]);
  const double u = std::clamp((x - grid.x(k)) / dx, 0.0, 1.0);
  const double d0 = density[k], d1 = density[k + 1];
  return s + dx * (d0 * u + 0.5 * (d1 - d0) * u * u);
}

double left_probability(const ComplexField& psi, double x) {
  return left_probability(density(psi), x);
}

}  // namespace bohm

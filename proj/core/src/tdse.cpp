#include "bohm/tdse.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "bohm/numerics.hpp"
#include "bohm/parallel.hpp"

namespace bohm {

namespace {

void validate(const TdseConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw DomainError("time step must be positive");
  if (cfg.snapshot_stride == 0) throw DomainError("snapshot stride must be at least 1");
}

std::string factor_text(double f) {
  std::ostringstream s;
  s << "stability factor " << f;
  return s.str();
}

}  // namespace

ComplexField gaussian_packet(const GaussianParams& p, double t, const Grid1D& grid,
                             const UnitSystem& units) {
  if (!(p.a > 0.0)) throw DomainError("Gaussian width must be positive");
  const double hb = units.hbar();
  const double m = units.mass();
  const double tau = t - p.t1;
  const double a2 = p.a * p.a;
  const double theta = 0.5 * std::atan(2.0 * hb * tau / (m * a2));
  const double phi = -theta - hb * p.kc * p.kc * tau / (2.0 * m);
  const double amp = std::pow(2.0 * a2 / si::pi, 0.25) /
                     std::pow(a2 * a2 + 4.0 * hb * hb * tau * tau / (m * m), 0.25);
  const Complex width(a2, 2.0 * hb * tau / m);
  const double center = p.x0 + hb * p.kc * tau / m;
  return ComplexField::from_function(grid, [&](double x) {
    const double u = x - center;
    return amp * std::exp(Complex(-u * u, 0.0) / width + Complex(0.0, phi + p.kc * (x - p.x0)));
  });
}

double gaussian_truncation(const GaussianParams& p, double t, const Grid1D& grid,
                           const UnitSystem& units) {
  return 1.0 - norm(gaussian_packet(p, t, grid, units));
}

double stability_factor(double dt, const Grid1D& grid, const UnitSystem& units) {
  return units.hbar() * dt / (units.mass() * grid.dx() * grid.dx());
}

double stability_factor(const TdseConfig& cfg, const Grid1D& grid, const UnitSystem& units) {
  return stability_factor(cfg.dt, grid, units);
}

void check_stability_gate(const TdseConfig& cfg, const Grid1D& grid, const UnitSystem& units) {
  const double f = stability_factor(cfg, grid, units);
  if (f > kStabilityGate && !cfg.override_stability) {
    throw InstabilityError(factor_text(f) + " exceeds the gate of 0.25; reduce dt or override", f);
  }
}

void step_explicit_inplace(ComplexField& prev, const ComplexField& curr, const RealField& potential,
                           const TdseConfig& cfg, const UnitSystem& units) {
  validate(cfg);
  const Grid1D& grid = curr.grid();
  if (!(prev.grid() == grid) || !(potential.grid() == grid)) {
    throw ShapeError("leapfrog levels and potential must share a grid");
  }
  const std::size_t n = grid.size();
  const double f = stability_factor(cfg.dt, grid, units);
  const double c = 2.0 * cfg.dt / units.hbar();
  const double g = cfg.nonlinearity_g;
  const Complex* u = curr.data().data();
  Complex* out = prev.data().data();
  const double* v = potential.data().data();
  std::atomic<bool> bad{false};

  parallel_for(1, n - 1, [&](std::size_t k) {
    const double veff = g == 0.0 ? v[k] : v[k] + g * abs2(u[k]);
    const Complex lap = u[k + 1] - 2.0 * u[k] + u[k - 1];
    const Complex next = out[k] + Complex(0.0, f) * lap - Complex(0.0, c * veff) * u[k];
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) bad.store(true, std::memory_order_relaxed);
    out[k] = next;
  });
  out[0] = 0.0;
  out[n - 1] = 0.0;
  if (bad.load()) throw InstabilityError("non-finite wave function at " + factor_text(f), f);
}

ComplexField step_explicit(const ComplexField& prev, const ComplexField& curr,
                           const RealField& potential, const TdseConfig& cfg,
                           const UnitSystem& units) {
  ComplexField next = prev;
  step_explicit_inplace(next, curr, potential, cfg, units);
  return next;
}

StartupPair startup_from_gaussian(const GaussianParams& p, const Grid1D& grid, double dt,
                                  const UnitSystem& units) {
  return startup_from_gaussians({p}, {Complex(1.0, 0.0)}, grid, dt, units);
}

StartupPair startup_from_gaussians(const std::vector<GaussianParams>& packets,
                                   const std::vector<Complex>& weights, const Grid1D& grid,
                                   double dt, const UnitSystem& units) {
  if (packets.empty() || packets.size() != weights.size()) {
    throw DomainError("need one weight per Gaussian packet");
  }
  const double t0 = packets.front().t1;
  ComplexField a(grid), b(grid);
  for (std::size_t j = 0; j < packets.size(); ++j) {
    const auto pa = gaussian_packet(packets[j], t0, grid, units);
    const auto pb = gaussian_packet(packets[j], t0 + dt, grid, units);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      a[k] += weights[j] * pa[k];
      b[k] += weights[j] * pb[k];
    }
  }
  // Hard walls.
  a[0] = a[grid.size() - 1] = b[0] = b[grid.size() - 1] = 0.0;
  return StartupPair{std::move(a), std::move(b), t0, false};
}

StartupPair startup_euler(const ComplexField& psi0, const RealField& potential, const TdseConfig& cfg,
                          const UnitSystem& units, double t0) {
  validate(cfg);
  if (!(potential.grid() == psi0.grid())) throw ShapeError("potential and field grids differ");
  const auto lap = laplacian(psi0);
  const double hb = units.hbar();
  const double m = units.mass();
  ComplexField next(psi0.grid());
  const std::size_t n = psi0.size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double veff = potential[k] + cfg.nonlinearity_g * abs2(psi0[k]);
    const Complex h = -hb * hb / (2.0 * m) * lap[k] + veff * psi0[k];
    next[k] = psi0[k] - Complex(0.0, cfg.dt / hb) * h;
  }
  ComplexField first = psi0;
  first[0] = first[n - 1] = 0.0;
  return StartupPair{std::move(first), std::move(next), t0, true};
}

EvolveSummary evolve(StartupPair start, const RealField& potential, const TdseConfig& cfg,
                     const UnitSystem& units, const SnapshotSink& sink) {
  validate(cfg);
  check_stability_gate(cfg, start.curr.grid(), units);
  EvolveSummary sum;
  sum.stability_factor = stability_factor(cfg, start.curr.grid(), units);
  sum.euler_bootstrap = start.euler_bootstrap;

  const double norm0 = norm(start.prev);
  auto emit = [&](std::size_t j, const ComplexField& psi) {
    Snapshot s{j, start.t0 + static_cast<double>(j) * cfg.dt, psi, norm(psi) - norm0};
    sum.max_norm_drift = std::max(sum.max_norm_drift, std::abs(s.norm_drift));
    ++sum.snapshots;
    if (sink) sink(s);
  };

  emit(0, start.prev);
  if (cfg.steps == 0) return sum;

  ComplexField& older = start.prev;
  ComplexField& newer = start.curr;
  for (std::size_t j = 1; j <= cfg.steps; ++j) {
    if (j > 1) {
      step_explicit_inplace(older, newer, potential, cfg, units);
      std::swap(older, newer);
    }
    if (j % cfg.snapshot_stride == 0 || j == cfg.steps) emit(j, newer);
  }
  sum.steps = cfg.steps;
  return sum;
}

std::vector<Snapshot> evolve_collect(StartupPair start, const RealField& potential,
                                     const TdseConfig& cfg, const UnitSystem& units,
                                     EvolveSummary* summary) {
  std::vector<Snapshot> out;
  auto s = evolve(std::move(start), potential, cfg, units,
                  [&](const Snapshot& snap) { out.push_back(snap); });
  if (summary) *summary = s;
  return out;
}

}  // namespace bohm

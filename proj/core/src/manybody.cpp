#include "bohm/manybody.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "bohm/numerics.hpp"
#include "bohm/parallel.hpp"

namespace bohm {

InteractionSpec InteractionSpec::coulomb(double strength, double softening) {
  InteractionSpec s;
  s.strength = strength;
  s.softening = softening;
  s.validate();
  return s;
}

InteractionSpec InteractionSpec::tabulated(std::vector<double> r, std::vector<double> u) {
  InteractionSpec s;
  s.kind = InteractionKind::tabulated_pair;
  s.table_r = std::move(r);
  s.table_u = std::move(u);
  s.validate();
  return s;
}

InteractionSpec InteractionSpec::none() { return coulomb(0.0, 1.0); }

void InteractionSpec::validate() const {
  if (kind == InteractionKind::softened_coulomb) {
    if (!(softening > 0.0)) throw DomainError("softening length must be positive");
    if (!std::isfinite(strength)) throw DomainError("interaction strength must be finite");
    return;
  }
  if (table_r.size() < 2 || table_r.size() != table_u.size()) {
    throw DomainError("pair table needs at least two (r, u) rows");
  }
  for (std::size_t i = 1; i < table_r.size(); ++i) {
    if (!(table_r[i] > table_r[i - 1])) throw DomainError("pair table separations must ascend");
  }
}

double InteractionSpec::pair(double separation) const {
  const double r = std::abs(separation);
  if (kind == InteractionKind::softened_coulomb) {
    if (strength == 0.0) return 0.0;
    return strength / std::sqrt(r * r + softening * softening);
  }
  if (r <= table_r.front()) return table_u.front();
  if (r >= table_r.back()) return table_u.back();
  const auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - table_r.begin()) - 1;
  const double w = (r - table_r[i]) / (table_r[i + 1] - table_r[i]);
  return (1.0 - w) * table_u[i] + w * table_u[i + 1];
}

RealField interaction_field(const Grid1D& grid, std::span<const double> partners, const InteractionSpec& spec) {
  spec.validate();
  RealField u(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double sum = 0.0;
    for (double xb : partners) sum += spec.pair(grid.x(k) - xb);
    u[k] = sum;
  }
  return u;
}

RealField softened_coulomb(const Grid1D& grid, std::span<const double> partners, double strength,
                           double softening) {
  return interaction_field(grid, partners, InteractionSpec::coulomb(strength, softening));
}

// ---- exact two-particle oracle -------------------------------------------

RealField2D two_particle_potential(const RealField& v1, const RealField& v2, const InteractionSpec& spec) {
  spec.validate();
  const Grid2D g(v1.grid(), v2.grid());
  RealField2D v(g);
  for (std::size_t i = 0; i < v1.size(); ++i) {
    for (std::size_t j = 0; j < v2.size(); ++j) {
      v(i, j) = v1[i] + v2[j] + spec.pair(g.axis1().x(i) - g.axis2().x(j));
    }
  }
  return v;
}

ComplexField2D product_state(const ComplexField& a, const ComplexField& b) {
  ComplexField2D psi(Grid2D(a.grid(), b.grid()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) psi(i, j) = a[i] * b[j];
  }
  return psi;
}

ComplexField2D exchange_state(const ComplexField& a, const ComplexField& b, bool symmetric) {
  if (!(a.grid() == b.grid())) throw ShapeError("exchange needs both packets on one grid");
  const double sign = symmetric ? 1.0 : -1.0;
  const double c = 1.0 / std::sqrt(2.0);
  ComplexField2D psi(Grid2D(a.grid(), b.grid()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) psi(i, j) = c * (a[i] * b[j] + sign * b[i] * a[j]);
  }
  return psi;
}

double norm(const ComplexField2D& psi) {
  double s = 0.0;
  for (const Complex& z : psi.values()) s += abs2(z);
  return s * psi.grid().axis1().dx() * psi.grid().axis2().dx();
}

double stability_factor(double dt, const Grid2D& grid, const UnitSystem& units) {
  const double d1 = grid.axis1().dx();
  const double d2 = grid.axis2().dx();
  return units.hbar() * dt / units.mass() * (1.0 / (d1 * d1) + 1.0 / (d2 * d2));
}

namespace {

void require_2d(const Grid2D& g) {
  if (g.axis1().size() < 3 || g.axis2().size() < 3) throw ShapeError("2D grid needs at least 3 points per axis");
}

Complex hamiltonian_at(const ComplexField2D& psi, const RealField2D& v, std::size_t i, std::size_t j,
                       const UnitSystem& units) {
  const auto& g = psi.grid();
  const double d1 = g.axis1().dx();
  const double d2 = g.axis2().dx();
  const Complex lap = (psi(i + 1, j) - 2.0 * psi(i, j) + psi(i - 1, j)) / (d1 * d1) +
                      (psi(i, j + 1) - 2.0 * psi(i, j) + psi(i, j - 1)) / (d2 * d2);
  return -units.hbar() * units.hbar() / (2.0 * units.mass()) * lap + v(i, j) * psi(i, j);
}

void zero_edges(ComplexField2D& psi) {
  const std::size_t n1 = psi.grid().axis1().size();
  const std::size_t n2 = psi.grid().axis2().size();
  for (std::size_t i = 0; i < n1; ++i) psi(i, 0) = psi(i, n2 - 1) = 0.0;
  for (std::size_t j = 0; j < n2; ++j) psi(0, j) = psi(n1 - 1, j) = 0.0;
}

// psi_{j+1} overwrites prev.
void leapfrog_2d(ComplexField2D& prev, const ComplexField2D& curr, const RealField2D& v, double dt,
                 const UnitSystem& units, double factor) {
  const auto& g = curr.grid();
  const std::size_t n1 = g.axis1().size();
  const std::size_t n2 = g.axis2().size();
  const double f1 = units.hbar() * dt / (units.mass() * g.axis1().dx() * g.axis1().dx());
  const double f2 = units.hbar() * dt / (units.mass() * g.axis2().dx() * g.axis2().dx());
  const double cv = 2.0 * dt / units.hbar();
  const Complex* u = curr.values().data();
  const double* pv = v.values().data();
  Complex* out = prev.values().data();
  std::atomic<bool> bad{false};
  parallel_for(1, n1 - 1, [&](std::size_t i) {
    const std::size_t row = i * n2;
    double acc = 0.0;  // NaN or inf anywhere in the row survives the sum
    for (std::size_t j = 1; j + 1 < n2; ++j) {
      const std::size_t k = row + j;
      const Complex z = u[k];
      const Complex lap = f1 * (u[k + n2] + u[k - n2] - 2.0 * z) + f2 * (u[k + 1] + u[k - 1] - 2.0 * z);
      // i f lap - i cv V z
      const Complex d = lap - cv * pv[k] * z;
      const Complex next(out[k].real() - d.imag(), out[k].imag() + d.real());
      acc += next.real() * 0.0 + next.imag() * 0.0;
      out[k] = next;
    }
    if (!std::isfinite(acc)) bad.store(true, std::memory_order_relaxed);
  }, 16);
  zero_edges(prev);
  if (bad.load()) throw InstabilityError("non-finite two-particle wave function", factor);
}

struct Flow2D {
  double rho = 0.0, j1 = 0.0, j2 = 0.0;
};

Flow2D flow_at_node(const ComplexField2D& psi, std::size_t i, std::size_t j, const UnitSystem& units) {
  const auto& g = psi.grid();
  const std::size_t n1 = g.axis1().size();
  const std::size_t n2 = g.axis2().size();
  i = std::clamp<std::size_t>(i, 1, n1 - 2);
  j = std::clamp<std::size_t>(j, 1, n2 - 2);
  const Complex z = psi(i, j);
  const Complex d1 = (psi(i + 1, j) - psi(i - 1, j)) / (2.0 * g.axis1().dx());
  const Complex d2 = (psi(i, j + 1) - psi(i, j - 1)) / (2.0 * g.axis2().dx());
  const double hm = units.hbar() / units.mass();
  return {abs2(z), hm * std::imag(std::conj(z) * d1), hm * std::imag(std::conj(z) * d2)};
}

Flow2D flow_at(const ComplexField2D& psi, double x1, double x2, const UnitSystem& units) {
  const auto& g = psi.grid();
  const std::size_t c1 = g.axis1().cell_of(x1);
  const std::size_t c2 = g.axis2().cell_of(x2);
  const double w1 = std::clamp((x1 - g.axis1().x(c1)) / g.axis1().dx(), 0.0, 1.0);
  const double w2 = std::clamp((x2 - g.axis2().x(c2)) / g.axis2().dx(), 0.0, 1.0);
  Flow2D out;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double w = (a ? w1 : 1.0 - w1) * (b ? w2 : 1.0 - w2);
      const Flow2D f = flow_at_node(psi, c1 + a, c2 + b, units);
      out.rho += w * f.rho;
      out.j1 += w * f.j1;
      out.j2 += w * f.j2;
    }
  }
  return out;
}

double peak_density(const ComplexField2D& psi) {
  double p = 0.0;
  for (const Complex& z : psi.values()) p = std::max(p, abs2(z));
  return p;
}

}  // namespace

StartupPair2D startup_euler(const ComplexField2D& psi0, const RealField2D& potential, double dt,
                            const UnitSystem& units, double t0) {
  if (!(psi0.grid() == potential.grid())) throw ShapeError("potential and field grids differ");
  require_2d(psi0.grid());
  const auto& g = psi0.grid();
  ComplexField2D next(g);
  const Complex c(0.0, -dt / units.hbar());
  for (std::size_t i = 1; i + 1 < g.axis1().size(); ++i) {
    for (std::size_t j = 1; j + 1 < g.axis2().size(); ++j) {
      next(i, j) = psi0(i, j) + c * hamiltonian_at(psi0, potential, i, j, units);
    }
  }
  ComplexField2D first = psi0;
  zero_edges(first);
  return StartupPair2D{std::move(first), std::move(next), t0};
}

TwoParticleRun exact_two_particle_evolve(StartupPair2D start, const RealField2D& potential,
                                         const TwoParticleConfig& cfg, const UnitSystem& units,
                                         const std::vector<std::array<double, 2>>& initial,
                                         const Snapshot2DSink& sink) {
  const Grid2D g = start.curr.grid();
  require_2d(g);
  if (!(start.prev.grid() == g) || !(potential.grid() == g)) throw ShapeError("2D levels and potential differ in grid");
  if (!(cfg.dt > 0.0)) throw DomainError("time step must be positive");
  if (cfg.record_stride == 0) throw DomainError("record stride must be at least 1");
  const double factor = stability_factor(cfg.dt, g, units);
  if (factor > kStabilityGate && !cfg.override_stability) {
    std::ostringstream os;
    os << "stability factor " << factor << " exceeds the gate of 0.25; reduce dt or override";
    throw InstabilityError(os.str(), factor);
  }
  const Grid1D& a1 = g.axis1();
  const Grid1D& a2 = g.axis2();
  for (const auto& p : initial) {
    if (!a1.contains(p[0]) || !a2.contains(p[1])) throw DomainError("initial pair outside the grid");
  }

  TwoParticleRun run{{}, {}, factor, 0.0, 0, 0, start.prev};
  run.paths.resize(initial.size());
  std::vector<std::array<double, 2>> x = initial;
  std::vector<std::array<double, 2>> v(initial.size(), {0.0, 0.0});
  const double norm0 = norm(start.prev);
  const double dt = cfg.dt;

  auto velocity = [&](const ComplexField2D& a, const ComplexField2D& b, double wa, double peak,
                      const std::array<double, 2>& p, bool& node) {
    const Flow2D fa = flow_at(a, p[0], p[1], units);
    const Flow2D fb = flow_at(b, p[0], p[1], units);
    const double rho = wa * fa.rho + (1.0 - wa) * fb.rho;
    if (!(rho > cfg.node_threshold * peak)) {
      node = true;
      return std::array<double, 2>{0.0, 0.0};
    }
    return std::array<double, 2>{(wa * fa.j1 + (1.0 - wa) * fb.j1) / rho, (wa * fa.j2 + (1.0 - wa) * fb.j2) / rho};
  };

  auto record = [&](std::size_t step, const ComplexField2D& psi) {
    run.times.push_back(start.t0 + static_cast<double>(step) * dt);
    for (std::size_t p = 0; p < x.size(); ++p) {
      run.paths[p].x1.push_back(x[p][0]);
      run.paths[p].x2.push_back(x[p][1]);
      run.paths[p].v1.push_back(v[p][0]);
      run.paths[p].v2.push_back(v[p][1]);
    }
    const double drift = norm(psi) - norm0;
    run.max_norm_drift = std::max(run.max_norm_drift, std::abs(drift));
    if (sink) sink(Snapshot2D{step, start.t0 + static_cast<double>(step) * dt, &psi, drift});
  };

  // Initial velocities.
  {
    const double peak = peak_density(start.prev);
    for (std::size_t p = 0; p < x.size(); ++p) {
      bool node = false;
      auto vv = velocity(start.prev, start.prev, 1.0, peak, x[p], node);
      if (!node) v[p] = vv;
    }
  }
  record(0, start.prev);

  ComplexField2D& older = start.prev;
  ComplexField2D& newer = start.curr;
  double peak_lo = peak_density(older);
  // Positions move from level j-1 (`lo`) to level j (`hi`).
  for (std::size_t j = 1; j <= cfg.steps; ++j) {
    const ComplexField2D* lo = &older;
    const ComplexField2D* hi = &newer;
    if (j > 1) {
      leapfrog_2d(older, newer, potential, dt, units, factor);
      std::swap(older, newer);
      lo = &older;
      hi = &newer;
    }
    const double peak_hi = x.empty() ? 0.0 : peak_density(*hi);
    const double peak = std::max(peak_lo, peak_hi);
    peak_lo = peak_hi;
    for (std::size_t p = 0; p < x.size(); ++p) {
      bool node = false;
      const auto& x0 = x[p];
      auto k1 = velocity(*lo, *hi, 1.0, peak, x0, node);
      auto k2 = velocity(*lo, *hi, 0.5, peak, {x0[0] + 0.5 * dt * k1[0], x0[1] + 0.5 * dt * k1[1]}, node);
      auto k3 = velocity(*lo, *hi, 0.5, peak, {x0[0] + 0.5 * dt * k2[0], x0[1] + 0.5 * dt * k2[1]}, node);
      auto k4 = velocity(*lo, *hi, 0.0, peak, {x0[0] + dt * k3[0], x0[1] + dt * k3[1]}, node);
      std::array<double, 2> nx = x0;
      if (node) {
        ++run.node_carries;
        nx = {x0[0] + dt * v[p][0], x0[1] + dt * v[p][1]};
      } else {
        for (int c = 0; c < 2; ++c) nx[c] = x0[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        v[p] = k4;
      }
      const double c1 = std::clamp(nx[0], a1.x_min(), a1.x_max());
      const double c2 = std::clamp(nx[1], a2.x_min(), a2.x_max());
      if (c1 != nx[0] || c2 != nx[1]) ++run.boundary_hits;
      x[p] = {c1, c2};
    }
    if (j % cfg.record_stride == 0 || j == cfg.steps) record(j, *hi);
  }
  run.final_psi = cfg.steps == 0 ? std::move(start.prev) : std::move(newer);
  return run;
}

double continuity_residual(const ComplexField2D& prev, const ComplexField2D& curr, const ComplexField2D& next,
                           double dt, const UnitSystem& units) {
  const auto& g = curr.grid();
  if (!(prev.grid() == g) || !(next.grid() == g)) throw ShapeError("continuity levels differ in grid");
  const std::size_t n1 = g.axis1().size();
  const std::size_t n2 = g.axis2().size();
  if (n1 < 5 || n2 < 5) throw ShapeError("continuity needs at least 5 points per axis");
  const double d1 = g.axis1().dx();
  const double d2 = g.axis2().dx();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n1; ++i) {
    for (std::size_t j = 2; j + 2 < n2; ++j) {
      const double drho = (abs2(next(i, j)) - abs2(prev(i, j))) / (2.0 * dt);
      const double div = (flow_at_node(curr, i + 1, j, units).j1 - flow_at_node(curr, i - 1, j, units).j1) / (2.0 * d1) +
                         (flow_at_node(curr, i, j + 1, units).j2 - flow_at_node(curr, i, j - 1, units).j2) / (2.0 * d2);
      worst = std::max(worst, std::abs(drho + div));
    }
  }
  return worst;
}

// ---- conditional wave functions -------------------------------------------

namespace {

void check_state(const ManyBodyState& s) {
  const std::size_t w = s.waves_per_particle();
  if (s.n == 0 || s.positions.size() != s.n) throw ShapeError("one position per particle is required");
  if (s.curr.size() != s.n * w || s.prev.size() != s.n * w) {
    throw ShapeError(s.symmetry == ExchangeSymmetry::none ? "one conditional wave per particle is required"
                                                          : "exchange needs a square N x N wave matrix");
  }
  for (const auto& f : s.curr) {
    if (!(f.grid() == s.grid)) throw ShapeError("conditional waves must share the grid");
  }
}

void check_config(const ConditionalConfig& cfg, const Grid1D& grid, const UnitSystem& units) {
  if (!(cfg.dt > 0.0)) throw DomainError("time step must be positive");
  if (!(cfg.external.grid() == grid)) throw ShapeError("external potential is on a different grid");
  cfg.interaction.validate();
  const double f = stability_factor(cfg.dt, grid, units);
  if (f > kStabilityGate && !cfg.override_stability) {
    std::ostringstream os;
    os << "stability factor " << f << " exceeds the gate of 0.25; reduce dt or override";
    throw InstabilityError(os.str(), f);
  }
}

// Determinant or permanent of a small square matrix by Laplace expansion.
Complex combine(const std::vector<Complex>& m, std::size_t n, bool antisym) {
  if (n == 1) return m[0];
  if (n == 2) return antisym ? m[0] * m[3] - m[1] * m[2] : m[0] * m[3] + m[1] * m[2];
  Complex sum = 0.0;
  std::vector<Complex> minor((n - 1) * (n - 1));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 1; r < n; ++r) {
      std::size_t k = 0;
      for (std::size_t cc = 0; cc < n; ++cc) {
        if (cc != c) minor[(r - 1) * (n - 1) + k++] = m[r * n + cc];
      }
    }
    const double sign = (antisym && (c % 2)) ? -1.0 : 1.0;
    sum += sign * m[c] * combine(minor, n - 1, antisym);
  }
  return sum;
}

// Cofactors of row a with the other rows sampled at the particle positions.
std::vector<Complex> row_cofactors(const ManyBodyState& s, std::size_t a) {
  const std::size_t n = s.n;
  const bool antisym = s.symmetry == ExchangeSymmetry::antisymmetric;
  std::vector<Complex> rows(n * n);
  for (std::size_t b = 0; b < n; ++b) {
    if (b == a) continue;
    for (std::size_t h = 0; h < n; ++h) {
      rows[b * n + h] = interpolate<Complex>(s.wave(b, h).values(), s.grid, s.positions[b]);
    }
  }
  std::vector<Complex> cof(n);
  std::vector<Complex> minor((n - 1) * (n - 1));
  for (std::size_t h = 0; h < n; ++h) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      std::size_t k = 0;
      for (std::size_t hh = 0; hh < n; ++hh) {
        if (hh != h) minor[r * (n - 1) + k++] = rows[b * n + hh];
      }
      ++r;
    }
    const double sign = (antisym && ((a + h) % 2)) ? -1.0 : 1.0;
    cof[h] = n == 1 ? Complex(1.0) : sign * combine(minor, n - 1, antisym);
  }
  return cof;
}

double local_velocity(const VelocityFrame& lo, const VelocityFrame& hi, double w, double x, const Grid1D& grid,
                      double peak, double threshold, bool& node) {
  const double rho = w * interpolate<double>(lo.density.values(), grid, x) +
                     (1.0 - w) * interpolate<double>(hi.density.values(), grid, x);
  if (!(rho > threshold * peak)) node = true;
  return w * interpolate<double>(lo.velocity.values(), grid, x) +
         (1.0 - w) * interpolate<double>(hi.velocity.values(), grid, x);
}

void advance(ManyBodyState& s, const ConditionalConfig& cfg, const UnitSystem& units) {
  check_state(s);
  check_config(cfg, s.grid, units);
  const std::size_t n = s.n;
  const std::size_t w = s.waves_per_particle();
  const double dt = cfg.dt;

  std::vector<VelocityFrame> before;
  for (std::size_t a = 0; a < n; ++a) before.push_back(bohmian_velocity(guiding_wave(s, a), units, s.time, cfg.node_threshold));

  std::vector<RealField> pot;
  pot.reserve(n);
  for (std::size_t a = 0; a < n; ++a) pot.push_back(conditional_potential(s, a, cfg));
  TdseConfig tc;
  tc.dt = dt;
  tc.override_stability = cfg.override_stability;
  // Waves are independent once the positions are frozen.
  std::atomic<bool> bad{false};
  if (!s.startup_pending) {
    parallel_for(0, n * w, [&](std::size_t idx) {
      try {
        step_explicit_inplace(s.prev[idx], s.curr[idx], pot[idx / w], tc, units);
      } catch (const InstabilityError&) {
        bad = true;
      }
    }, 1);
  }
  s.startup_pending = false;
  if (bad) throw InstabilityError("non-finite conditional wave", stability_factor(dt, s.grid, units));
  std::swap(s.prev, s.curr);
  s.time += dt;
  ++s.steps;

  std::vector<VelocityFrame> after;
  for (std::size_t a = 0; a < n; ++a) after.push_back(bohmian_velocity(guiding_wave(s, a), units, s.time, cfg.node_threshold));

  std::vector<double> moved(n);
  for (std::size_t a = 0; a < n; ++a) {
    double peak = 0.0;
    for (double r : before[a].density.values()) peak = std::max(peak, r);
    for (double r : after[a].density.values()) peak = std::max(peak, r);
    const double x0 = s.positions[a];
    bool node = false;
    auto vel = [&](double ww, double x) {
      return local_velocity(before[a], after[a], ww, x, s.grid, peak, cfg.node_threshold, node);
    };
    const double k1 = vel(1.0, x0);
    const double k2 = vel(0.5, x0 + 0.5 * dt * k1);
    const double k3 = vel(0.5, x0 + 0.5 * dt * k2);
    const double k4 = vel(0.0, x0 + dt * k3);
    double x;
    if (node) {
      ++s.node_carries;
      x = x0 + dt * s.velocities[a];
    } else {
      x = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      s.velocities[a] = k4;
    }
    const double c = std::clamp(x, s.grid.x_min(), s.grid.x_max());
    if (c != x) ++s.boundary_hits;
    moved[a] = c;
  }
  s.positions = std::move(moved);
}

}  // namespace

ManyBodyState make_many_body_state(const std::vector<ComplexField>& packets, std::vector<double> positions,
                                   ExchangeSymmetry symmetry, const ConditionalConfig& cfg,
                                   const UnitSystem& units, double t0) {
  if (packets.empty()) throw DomainError("at least one particle is required");
  if (packets.size() != positions.size()) throw ShapeError("one packet per particle position is required");
  const Grid1D grid = packets.front().grid();
  for (const auto& p : packets) {
    if (!(p.grid() == grid)) throw ShapeError("all packets must share a grid");
  }
  for (double x : positions) {
    if (!grid.contains(x)) throw DomainError("particle position outside the grid");
  }
  check_config(cfg, grid, units);

  ManyBodyState s{grid, packets.size(), symmetry, {}, {}, std::move(positions), {}, t0};
  const std::size_t n = s.n;
  const std::size_t w = s.waves_per_particle();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t h = 0; h < w; ++h) s.curr.push_back(packets[w == 1 ? a : h]);
  }
  s.prev = s.curr;
  check_state(s);

  if (symmetry != ExchangeSymmetry::none) {
    for (std::size_t a = 0; a < n; ++a) {
      const auto phi = guiding_wave(s, a);
      double peak = 0.0;
      for (const Complex& z : phi.values()) peak = std::max(peak, abs2(z));
      double scale = 1.0;
      for (std::size_t h = 0; h < n; ++h) {
        double m = 0.0;
        for (const Complex& z : packets[h].values()) m = std::max(m, abs2(z));
        scale *= m;
      }
      if (!(peak > 1e-24 * scale)) throw DomainError("exchange wave vanishes identically; packets or positions coincide");
    }
  }

  TdseConfig tc;
  tc.dt = cfg.dt;
  tc.override_stability = cfg.override_stability;
  for (std::size_t a = 0; a < n; ++a) {
    const RealField u = conditional_potential(s, a, cfg);
    for (std::size_t h = 0; h < w; ++h) {
      auto pair = startup_euler(s.curr[a * w + h], u, tc, units, t0);
      s.prev[a * w + h] = std::move(pair.prev);
      s.curr[a * w + h] = std::move(pair.curr);
    }
  }
  // curr holds level 1; keep level 0 current until the first step.
  std::swap(s.prev, s.curr);
  s.startup_pending = true;

  s.velocities.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto frame = bohmian_velocity(guiding_wave(s, a), units, t0, cfg.node_threshold);
    s.velocities[a] = interpolate<double>(frame.velocity.values(), grid, s.positions[a]);
  }
  return s;
}

RealField conditional_potential(const ManyBodyState& s, std::size_t a, const ConditionalConfig& cfg) {
  if (a >= s.n) throw DomainError("particle index out of range");
  std::vector<double> others;
  for (std::size_t b = 0; b < s.n; ++b) {
    if (b != a) others.push_back(s.positions[b]);
  }
  RealField u = interaction_field(s.grid, others, cfg.interaction);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] += cfg.external[k];
  return u;
}

ComplexField guiding_wave(const ManyBodyState& s, std::size_t a) {
  if (a >= s.n) throw DomainError("particle index out of range");
  if (s.symmetry == ExchangeSymmetry::none) return s.wave(a);
  const auto cof = row_cofactors(s, a);
  ComplexField phi(s.grid);
  for (std::size_t h = 0; h < s.n; ++h) {
    const auto& wv = s.wave(a, h);
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] += cof[h] * wv[k];
  }
  return phi;
}

ManyBodyState conditional_step_no_exchange(ManyBodyState s, const ConditionalConfig& cfg, const UnitSystem& units) {
  if (s.symmetry != ExchangeSymmetry::none) throw UnsupportedConfigError("state carries exchange symmetry");
  advance(s, cfg, units);
  return s;
}

ManyBodyState conditional_step_exchange(ManyBodyState s, const ConditionalConfig& cfg, const UnitSystem& units) {
  if (s.symmetry == ExchangeSymmetry::none) throw UnsupportedConfigError("state has no exchange symmetry");
  advance(s, cfg, units);
  return s;
}

void conditional_step(ManyBodyState& s, const ConditionalConfig& cfg, const UnitSystem& units) { advance(s, cfg, units); }

ConditionalRun conditional_evolve(ManyBodyState s, const ConditionalConfig& cfg, const UnitSystem& units,
                                  std::size_t steps, std::size_t record_stride) {
  if (record_stride == 0) throw DomainError("record stride must be at least 1");
  ConditionalRun run{{}, std::vector<Trajectory>(s.n), std::move(s)};
  ManyBodyState& st = run.final_state;
  auto record = [&] {
    run.times.push_back(st.time);
    for (std::size_t a = 0; a < st.n; ++a) {
      run.trajectories[a].id = a;
      run.trajectories[a].x.push_back(st.positions[a]);
      run.trajectories[a].v.push_back(st.velocities[a]);
    }
  };
  record();
  for (std::size_t j = 1; j <= steps; ++j) {
    advance(st, cfg, units);
    if (j % record_stride == 0 || j == steps) record();
  }
  return run;
}

}  // namespace bohm

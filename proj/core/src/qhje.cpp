#include "bohm/qhje.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "bohm/numerics.hpp"
#include "bohm/parallel.hpp"

namespace bohm {

namespace {

using Vander = Eigen::Matrix<double, kMlsWindow, kMlsDegree + 1>;
using Coeffs = Eigen::Matrix<double, kMlsDegree + 1, 1>;

void check_ordered(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw StepSizeError("element positions are not strictly ordered");
  }
}

bool ordered(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return false;
  }
  return true;
}

std::size_t window_start(std::size_t i, std::size_t n) {
  const std::size_t half = kMlsWindow / 2;
  if (i < half) return 0;
  return std::min(i - half, n - kMlsWindow);
}

}  // namespace

ScatteredDerivatives scattered_derivatives(std::span<const double> values,
                                           std::span<const double> positions) {
  const std::size_t n = positions.size();
  if (values.size() != n) throw ShapeError("values and positions differ in length");
  if (n < kMlsWindow) throw DomainError("scattered derivatives need at least 7 elements");
  check_ordered(positions);
  ScatteredDerivatives out{std::vector<double>(n), std::vector<double>(n)};
  std::atomic<bool> degenerate{false};
  parallel_for(0, n, [&](std::size_t i) {
    const std::size_t s = window_start(i, n);
    const double xc = positions[i];
    const double h = 0.5 * (positions[s + kMlsWindow - 1] - positions[s]);
    Vander A;
    Eigen::Matrix<double, kMlsWindow, 1> b;
    for (std::size_t r = 0; r < kMlsWindow; ++r) {
      const double u = (positions[s + r] - xc) / h;
      double p = 1.0;
      for (int c = 0; c <= kMlsDegree; ++c) {
        A(static_cast<Eigen::Index>(r), c) = p;
        p *= u;
      }
      b(static_cast<Eigen::Index>(r)) = values[s + r];
    }
    Eigen::ColPivHouseholderQR<Vander> qr(A);
    if (qr.rank() < kMlsDegree + 1) {
      degenerate = true;
      return;
    }
    const Coeffs c = qr.solve(b);
    out.d1[i] = c(1) / h;
    out.d2[i] = 2.0 * c(2) / (h * h);
  }, 512);
  if (degenerate) throw StepSizeError("degenerate interpolation window");
  return out;
}

std::vector<double> scattered_derivative(std::span<const double> values,
                                         std::span<const double> positions, int order) {
  if (order != 1 && order != 2) throw DomainError("derivative order must be 1 or 2");
  auto d = scattered_derivatives(values, positions);
  return order == 1 ? std::move(d.d1) : std::move(d.d2);
}

FluidElementSet make_elements(std::vector<double> positions, const std::function<double(double)>& amplitude,
                              const std::function<double(double)>& action, const UnitSystem& units) {
  FluidElementSet e;
  e.x = std::move(positions);
  check_ordered(e.x);
  for (double x : e.x) {
    const double r = amplitude(x);
    if (!(r > 0.0)) throw DomainError("element amplitude must be positive");
    e.R.push_back(r);
    e.S.push_back(action(x));
  }
  if (e.size() >= kMlsWindow) {
    e.v = scattered_derivative(e.S, e.x, 1);
    for (double& v : e.v) v /= units.mass();
  } else {
    // Too few elements to fit; differentiate the action function directly.
    for (double x : e.x) {
      const double h = 1e-6 * std::max(1e-9, std::abs(x));
      e.v.push_back((action(x + h) - action(x - h)) / (2.0 * h * units.mass()));
    }
  }
  return e;
}

FluidElementSet make_elements(std::vector<double> positions, const PolarField& polar,
                              const UnitSystem& units) {
  const auto& g = polar.grid;
  auto amp = [&](double x) { return interpolate<double>(polar.amplitude, g, x); };
  auto act = [&](double x) { return interpolate<double>(polar.action, g, x); };
  for (double x : positions) {
    if (!g.contains(x)) throw DomainError("element outside the polar field's grid");
  }
  FluidElementSet e = make_elements(std::move(positions), amp, act, units);
  if (e.size() < kMlsWindow) {
    auto vf = gradient<double>(polar.action, g);
    for (std::size_t i = 0; i < e.size(); ++i) e.v[i] = interpolate<double>(vf, g, e.x[i]) / units.mass();
  }
  return e;
}

namespace {

// Characteristic of one element: symplectic Euler on Newton's law with the
// action accumulated as the classical Lagrangian.
FluidElementSet characteristic_step(const FluidElementSet& e, const PotentialSpec& potential, double dt,
                                    const UnitSystem& units) {
  FluidElementSet out = e;
  const double m = units.mass();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double x = e.x[i] + dt * e.v[i];
    const double v = e.v[i] - dt * potential.derivative(x) / m;
    out.S[i] = e.S[i] + dt * (0.5 * m * v * v - potential.value(x));
    out.x[i] = x;
    out.v[i] = v;
  }
  return out;
}

struct Rates {
  std::vector<double> x, S, C;
};

// Time derivatives of (x, S, ln R) along the elements.
Rates rates(const std::vector<double>& x, const std::vector<double>& S, const std::vector<double>& C,
            const PotentialSpec& potential, const UnitSystem& units, bool quantum) {
  const std::size_t n = x.size();
  const double m = units.mass();
  const double hb = units.hbar();
  const auto s = scattered_derivatives(S, x);
  ScatteredDerivatives c;
  if (quantum) c = scattered_derivatives(C, x);
  Rates r{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double sp = s.d1[i];
    r.x[i] = sp / m;
    r.S[i] = sp * sp / (2.0 * m) - potential.value(x[i]);
    if (quantum) r.S[i] += hb * hb / (2.0 * m) * (c.d2[i] + c.d1[i] * c.d1[i]);
    r.C[i] = -s.d2[i] / (2.0 * m);
  }
  return r;
}

std::optional<FluidElementSet> finish(std::vector<double> x, std::vector<double> S,
                                      const std::vector<double>& C, const UnitSystem& units) {
  if (!ordered(x)) return std::nullopt;
  FluidElementSet out;
  out.R.resize(C.size());
  for (std::size_t i = 0; i < C.size(); ++i) {
    out.R[i] = std::exp(C[i]);
    if (!std::isfinite(S[i]) || !(out.R[i] > 0.0) || !std::isfinite(out.R[i])) return std::nullopt;
  }
  out.x = std::move(x);
  out.S = std::move(S);
  out.v = scattered_derivative(out.S, out.x, 1);
  for (double& v : out.v) v /= units.mass();
  return out;
}

std::optional<FluidElementSet> euler_step(const FluidElementSet& e, const PotentialSpec& potential, double dt,
                                          const UnitSystem& units, bool quantum) {
  const std::size_t n = e.size();
  const double m = units.mass();
  const double hb = units.hbar();
  const auto s = scattered_derivatives(e.S, e.x);
  ScatteredDerivatives c;
  if (quantum) {
    std::vector<double> logr(n);
    for (std::size_t i = 0; i < n; ++i) logr[i] = std::log(e.R[i]);
    c = scattered_derivatives(logr, e.x);
  }
  std::vector<double> x(n), S(n), C(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sp = s.d1[i];
    double rhs = sp * sp / (2.0 * m) - potential.value(e.x[i]);
    if (quantum) rhs += hb * hb / (2.0 * m) * (c.d2[i] + c.d1[i] * c.d1[i]);
    S[i] = e.S[i] + dt * rhs;
    const double shrink = 1.0 - dt * s.d2[i] / (2.0 * m);
    if (!(shrink > 0.0)) return std::nullopt;
    C[i] = std::log(e.R[i] * shrink);
    x[i] = e.x[i] + dt * e.v[i];
  }
  return finish(std::move(x), std::move(S), C, units);
}

std::optional<FluidElementSet> rk4_step(const FluidElementSet& e, const PotentialSpec& potential, double dt,
                                        const UnitSystem& units, bool quantum) {
  const std::size_t n = e.size();
  std::vector<double> C0(n);
  for (std::size_t i = 0; i < n; ++i) C0[i] = std::log(e.R[i]);
  std::vector<double> x(n), S(n), C(n);
  auto stage = [&](const Rates& k, double h) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = e.x[i] + h * k.x[i];
      S[i] = e.S[i] + h * k.S[i];
      C[i] = C0[i] + h * k.C[i];
    }
    return ordered(x);
  };
  try {
    const Rates k1 = rates(e.x, e.S, C0, potential, units, quantum);
    if (!stage(k1, 0.5 * dt)) return std::nullopt;
    const Rates k2 = rates(x, S, C, potential, units, quantum);
    if (!stage(k2, 0.5 * dt)) return std::nullopt;
    const Rates k3 = rates(x, S, C, potential, units, quantum);
    if (!stage(k3, dt)) return std::nullopt;
    const Rates k4 = rates(x, S, C, potential, units, quantum);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = e.x[i] + dt / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
      S[i] = e.S[i] + dt / 6.0 * (k1.S[i] + 2.0 * k2.S[i] + 2.0 * k3.S[i] + k4.S[i]);
      C[i] = C0[i] + dt / 6.0 * (k1.C[i] + 2.0 * k2.C[i] + 2.0 * k3.C[i] + k4.C[i]);
    }
  } catch (const StepSizeError&) {
    return std::nullopt;
  }
  return finish(std::move(x), std::move(S), C, units);
}

std::optional<FluidElementSet> raw_step(const FluidElementSet& e, const PotentialSpec& potential, double dt,
                                        const UnitSystem& units, const LagrangianOptions& opts) {
  return opts.scheme == LagrangianScheme::rk4 ? rk4_step(e, potential, dt, units, opts.quantum)
                                              : euler_step(e, potential, dt, units, opts.quantum);
}

std::optional<FluidElementSet> adaptive_step(const FluidElementSet& e, const PotentialSpec& potential,
                                             double dt, const UnitSystem& units,
                                             const LagrangianOptions& opts, int halvings_left) {
  if (auto r = raw_step(e, potential, dt, units, opts)) return r;
  if (halvings_left == 0) return std::nullopt;
  auto half = adaptive_step(e, potential, 0.5 * dt, units, opts, halvings_left - 1);
  if (!half) return std::nullopt;
  return adaptive_step(*half, potential, 0.5 * dt, units, opts, halvings_left - 1);
}

}  // namespace

FluidElementSet lagrangian_step(const FluidElementSet& elems, const PotentialSpec& potential,
                                double dt, const UnitSystem& units, const LagrangianOptions& opts) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  const std::size_t n = elems.size();
  if (elems.S.size() != n || elems.R.size() != n || elems.v.size() != n) {
    throw ShapeError("fluid element arrays differ in length");
  }
  if (n < kMlsWindow) {
    if (opts.quantum) throw DomainError("the quantum potential needs at least 7 elements");
    return characteristic_step(elems, potential, dt, units);
  }
  check_ordered(elems.x);
  auto r = adaptive_step(elems, potential, dt, units, opts, opts.max_halvings);
  if (!r) throw StepSizeError("element ordering lost even after step halving");
  return std::move(*r);
}

double lagrangian_stable_dt(const FluidElementSet& elems, const UnitSystem& units, double safety) {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < elems.size(); ++i) h = std::min(h, elems.x[i] - elems.x[i - 1]);
  return safety * units.mass() * h * h / units.hbar();
}

LogPolarField to_log_polar(const ComplexField& psi, const UnitSystem& units) {
  auto p = to_polar(psi, units);
  LogPolarField f{psi.grid(), std::vector<double>(psi.size()), std::move(p.action)};
  for (std::size_t k = 0; k < psi.size(); ++k) {
    if (!(p.amplitude[k] > 0.0)) throw DomainError("log-polar form needs psi != 0 everywhere");
    f.C[k] = std::log(p.amplitude[k]);
  }
  return f;
}

ComplexField from_log_polar(const LogPolarField& f, const UnitSystem& units) {
  std::vector<Complex> v(f.C.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::polar(std::exp(f.C[k]), f.S[k] / units.hbar());
  return ComplexField(f.grid, std::move(v));
}

namespace {

// Second derivative with one-sided rows at both ends (no wall ghosts: C and
// S do not vanish at the edge).
std::vector<double> second_derivative_open(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  const double inv = 1.0 / (dx * dx);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - 2.0 * f[k] + f[k - 1]) * inv;
  d[0] = (f[0] - 2.0 * f[1] + f[2]) * inv;
  d[n - 1] = (f[n - 1] - 2.0 * f[n - 2] + f[n - 3]) * inv;
  return d;
}

}  // namespace

LogPolarField eulerian_logpolar_step(const LogPolarField& f, const RealField& potential, double dt,
                                     const UnitSystem& units) {
  const std::size_t n = f.grid.size();
  if (f.C.size() != n || f.S.size() != n || !(potential.grid() == f.grid)) {
    throw ShapeError("log-polar components and potential must share the grid");
  }
  const double m = units.mass();
  const double hb = units.hbar();
  const auto c1 = gradient<double>(f.C, f.grid);
  const auto s1 = gradient<double>(f.S, f.grid);
  const auto c2 = second_derivative_open(f.C, f.grid.dx());
  const auto s2 = second_derivative_open(f.S, f.grid.dx());
  LogPolarField out{f.grid, std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double dc = -(s2[k] + 2.0 * s1[k] * c1[k]) / (2.0 * m);
    const double ds = -s1[k] * s1[k] / (2.0 * m) + hb * hb / (2.0 * m) * (c2[k] + c1[k] * c1[k]) - potential[k];
    out.C[k] = f.C[k] + dt * dc;
    out.S[k] = f.S[k] + dt * ds;
    if (!std::isfinite(out.C[k]) || !std::isfinite(out.S[k])) {
      throw InstabilityError("non-finite log-polar field", hb * dt / (m * f.grid.dx() * f.grid.dx()));
    }
  }
  return out;
}

FluidRun fluid_ensemble_evolve(FluidElementSet elements, const PotentialSpec& potential,
                               const ClassicalConfig& cfg, const UnitSystem& units, double t0) {
  if (!(cfg.dt > 0.0)) throw DomainError("time step must be positive");
  if (cfg.record_stride == 0) throw DomainError("record stride must be at least 1");
  FluidRun run;
  auto& ens = run.ensemble;
  ens.source = cfg.quantum ? "qhje-lagrangian" : "qhje-classical";
  ens.trajectories.resize(elements.size());
  for (std::size_t j = 0; j < elements.size(); ++j) ens.trajectories[j].id = j;
  auto record = [&](double t, const FluidElementSet& e) {
    ens.times.push_back(t);
    for (std::size_t j = 0; j < e.size(); ++j) {
      ens.trajectories[j].x.push_back(e.x[j]);
      ens.trajectories[j].v.push_back(e.v[j]);
    }
  };
  record(t0, elements);
  const LagrangianOptions opts{cfg.quantum, cfg.max_halvings, cfg.scheme};
  for (std::size_t s = 1; s <= cfg.steps; ++s) {
    try {
      elements = lagrangian_step(elements, potential, cfg.dt, units, opts);
    } catch (const StepSizeError&) {
      run.caustic = true;
      run.caustic_time = t0 + static_cast<double>(s - 1) * cfg.dt;
      break;
    }
    if (s % cfg.record_stride == 0) record(t0 + static_cast<double>(s) * cfg.dt, elements);
  }
  run.final_elements = std::move(elements);
  return run;
}

FluidRun classical_ensemble_evolve(const PolarField& initial, std::vector<double> positions,
                                   const PotentialSpec& potential, ClassicalConfig cfg,
                                   const UnitSystem& units) {
  cfg.quantum = false;
  return fluid_ensemble_evolve(make_elements(std::move(positions), initial, units), potential, cfg, units);
}

}  // namespace bohm

#include "bohm/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bohm/error.hpp"
#include "bohm/numerics.hpp"

namespace bohm {

void ObservableReport::evaluate() {
  density_agrees.reset();
  ensemble_agrees.reset();
  if (orthodox_value && bohmian_density_value) {
    density_agrees = std::abs(*orthodox_value - *bohmian_density_value) <= density_tolerance;
  }
  if (bohmian_density_value && trajectory_ensemble_value) {
    ensemble_agrees = std::abs(*bohmian_density_value - *trajectory_ensemble_value) <= ensemble_tolerance;
  }
}

namespace {

double riemann_norm(const ComplexField& psi) {
  double s = 0.0;
  for (const Complex& z : psi.values()) s += abs2(z);
  return s * psi.grid().dx();
}

double peak_density(const ComplexField& psi) {
  double p = 0.0;
  for (const Complex& z : psi.values()) p = std::max(p, abs2(z));
  return p;
}

// Eighth-order central first derivative, zeros beyond the ends. Plane-wave
// error ~ (k dx)^8 / 630.
std::vector<Complex> fine_derivative(const ComplexField& psi) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const auto n = static_cast<std::ptrdiff_t>(psi.size());
  auto at = [&](std::ptrdiff_t k) { return (k < 0 || k >= n) ? Complex(0.0) : psi[static_cast<std::size_t>(k)]; };
  std::vector<Complex> d(psi.size());
  const double inv = 1.0 / psi.grid().dx();
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    Complex s(0.0);
    for (std::ptrdiff_t j = 1; j <= 4; ++j) s += c[j - 1] * (at(k + j) - at(k - j));
    d[static_cast<std::size_t>(k)] = s * inv;
  }
  return d;
}

}  // namespace

double mean_position(const ComplexField& psi) {
  const auto& g = psi.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) s += abs2(psi[k]) * g.x(k);
  const double n = riemann_norm(psi);
  if (!(n > 0.0)) throw DomainError("wave function vanishes");
  return s * g.dx() / n;
}

double mean_position(std::span<const double> positions) {
  if (positions.empty()) throw DomainError("empty ensemble");
  double s = 0.0;
  for (double x : positions) s += x;
  return s / static_cast<double>(positions.size());
}

MomentumMean mean_momentum(const ComplexField& psi, const UnitSystem& units) {
  const auto& g = psi.grid();
  const double n = riemann_norm(psi);
  if (!(n > 0.0)) throw DomainError("wave function vanishes");
  const auto d = fine_derivative(psi);
  MomentumMean out;
  double orth = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) orth += units.hbar() * std::imag(std::conj(psi[k]) * d[k]);
  out.orthodox = orth * g.dx() / n;

  const auto polar = to_polar(psi, units);
  const auto ds = gradient<double>(polar.action, g);
  double bohm = 0.0, masked = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const double r2 = polar.amplitude[k] * polar.amplitude[k];
    // The central difference reaches across a flagged phase step.
    const bool near_node = polar.node[k] || (k > 0 && polar.node[k - 1]) || (k + 1 < psi.size() && polar.node[k + 1]);
    if (near_node) {
      masked += r2;
    } else {
      bohm += r2 * ds[k];
    }
  }
  out.bohmian = bohm * g.dx() / n;
  out.masked_mass = masked * g.dx() / n;
  return out;
}

double mean_momentum(std::span<const double> velocities, const UnitSystem& units) {
  return units.mass() * mean_position(velocities);
}

KineticMean mean_kinetic(const ComplexField& psi, const UnitSystem& units) {
  const auto& g = psi.grid();
  const double n = riemann_norm(psi);
  if (!(n > 0.0)) throw DomainError("wave function vanishes");
  const double c = units.hbar() * units.hbar() / (2.0 * units.mass() * g.dx() * g.dx());
  const std::size_t len = psi.size();
  const auto lap = laplacian(psi);
  double total = 0.0;
  for (std::size_t k = 0; k < len; ++k) total += std::real(std::conj(psi[k]) * lap[k]);
  total *= -units.hbar() * units.hbar() / (2.0 * units.mass());

  // Links (k, k+1) for k = -1 .. len-1 with zero ghosts.
  double flow = 0.0, bend = 0.0;
  auto at = [&](std::ptrdiff_t k) {
    return (k < 0 || k >= static_cast<std::ptrdiff_t>(len)) ? Complex(0.0) : psi[static_cast<std::size_t>(k)];
  };
  for (std::ptrdiff_t k = -1; k < static_cast<std::ptrdiff_t>(len); ++k) {
    const Complex a = at(k), b = at(k + 1);
    const double ra = std::abs(a), rb = std::abs(b);
    bend += (rb - ra) * (rb - ra);
    flow += 2.0 * (ra * rb - std::real(std::conj(a) * b));
  }
  KineticMean out;
  out.total = total * g.dx() / n;
  out.bohmian_kinetic_part = c * flow * g.dx() / n;
  out.quantum_potential_part = c * bend * g.dx() / n;
  return out;
}

LocalOperator local_operator_from_name(const std::string& name) {
  if (name == "position") return LocalOperator::position;
  if (name == "momentum") return LocalOperator::momentum;
  if (name == "kinetic") return LocalOperator::kinetic;
  if (name == "potential") return LocalOperator::potential;
  if (name == "current") return LocalOperator::current;
  if (name == "density") return LocalOperator::density;
  throw DomainError("unsupported local operator '" + name + "'");
}

std::string to_string(LocalOperator op) {
  switch (op) {
    case LocalOperator::position: return "position";
    case LocalOperator::momentum: return "momentum";
    case LocalOperator::kinetic: return "kinetic";
    case LocalOperator::potential: return "potential";
    case LocalOperator::current: return "current";
    case LocalOperator::density: return "density";
  }
  return "unknown";
}

LocalMean local_operator_mean(const ComplexField& psi, LocalOperator op, const UnitSystem& units,
                              const RealField* potential, double node_threshold) {
  const auto& g = psi.grid();
  const std::size_t n = psi.size();
  if (op == LocalOperator::potential) {
    if (!potential) throw DomainError("potential operator needs the potential field");
    if (!(potential->grid() == g)) throw ShapeError("potential is on a different grid");
  }
  const double norm = riemann_norm(psi);
  if (!(norm > 0.0)) throw DomainError("wave function vanishes");
  const double cutoff = node_threshold * peak_density(psi);
  const double hb = units.hbar();
  const double m = units.mass();

  LocalMean out{op, RealField(g), std::vector<std::uint8_t>(n, 0)};
  // Local value psi* A psi (complex) at each point.
  std::vector<Complex> local(n);
  switch (op) {
    case LocalOperator::position:
      for (std::size_t k = 0; k < n; ++k) local[k] = abs2(psi[k]) * g.x(k);
      break;
    case LocalOperator::potential:
      for (std::size_t k = 0; k < n; ++k) local[k] = abs2(psi[k]) * (*potential)[k];
      break;
    case LocalOperator::density:
    case LocalOperator::current:
      break;
    case LocalOperator::momentum: {
      const auto d = fine_derivative(psi);
      for (std::size_t k = 0; k < n; ++k) local[k] = std::conj(psi[k]) * Complex(0.0, -hb) * d[k];
      break;
    }
    case LocalOperator::kinetic: {
      const auto l = laplacian(psi);
      for (std::size_t k = 0; k < n; ++k) local[k] = std::conj(psi[k]) * (-hb * hb / (2.0 * m)) * l[k];
      break;
    }
  }

  double mean = 0.0, masked = 0.0, imag = 0.0;
  if (op == LocalOperator::density) {
    for (std::size_t k = 0; k < n; ++k) out.values[k] = abs2(psi[k]) / norm;
    out.mean = 1.0;
    return out;
  }
  if (op == LocalOperator::current) {
    const auto j = current_density(psi, units);
    for (std::size_t k = 0; k < n; ++k) {
      out.values[k] = j[k] / norm;
      mean += j[k];
    }
    out.mean = mean * g.dx() / norm;
    return out;
  }
  const bool divides = op == LocalOperator::momentum || op == LocalOperator::kinetic;
  for (std::size_t k = 0; k < n; ++k) {
    const double r2 = abs2(psi[k]);
    imag += local[k].imag();
    if (divides && !(r2 > cutoff)) {
      out.mask[k] = 1;
      masked += r2;
      continue;
    }
    out.values[k] = op == LocalOperator::position ? g.x(k)
                    : op == LocalOperator::potential ? (*potential)[k]
                                                     : local[k].real() / r2;
    mean += local[k].real();
  }
  out.mean = mean * g.dx() / norm;
  out.masked_mass = masked * g.dx() / norm;
  out.imaginary_integral = imag * g.dx() / norm;
  return out;
}

EnsembleMean ensemble_mean(const LocalMean& local, std::span<const double> positions) {
  const auto& g = local.values.grid();
  EnsembleMean out;
  double s = 0.0, s2 = 0.0;
  for (double x : positions) {
    const std::size_t c = g.cell_of(x);
    if (local.mask[c] || local.mask[c + 1]) continue;
    const double v = interpolate<double>(local.values.values(), g, x);
    s += v;
    s2 += v * v;
    ++out.used;
  }
  if (out.used == 0) throw DomainError("no ensemble member on an unmasked cell");
  const double m = static_cast<double>(out.used);
  out.mean = s / m;
  const double var = std::max(0.0, s2 / m - out.mean * out.mean);
  out.standard_error = out.used > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
  return out;
}

RegionOccupancy::RegionOccupancy(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(hi > lo)) throw DomainError("region must have hi > lo");
}

void RegionOccupancy::add(double time, const ComplexField& psi) {
  if (!times_.empty() && !(time > times_.back())) throw DomainError("occupancy times must increase");
  const auto& g = psi.grid();
  const double norm = riemann_norm(psi);
  // Piecewise-linear density integrated exactly over [lo, hi].
  const auto rho = density(psi);
  double p = 0.0, region_peak = 0.0;
  for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
    const double a = std::max(lo_, g.x(k));
    const double b = std::min(hi_, g.x(k + 1));
    if (!(b > a)) continue;
    const double ra = interpolate<double>(rho.values(), g, a);
    const double rb = interpolate<double>(rho.values(), g, b);
    p += 0.5 * (ra + rb) * (b - a);
    region_peak = std::max({region_peak, abs2(psi[k]), abs2(psi[k + 1])});
  }
  times_.push_back(time);
  prob_.push_back(norm > 0.0 ? p / norm : 0.0);
  peak_ = std::max(peak_, peak_density(psi));
  last_region_peak_ = region_peak;
}

double RegionOccupancy::dwell_time(double decay) const {
  if (times_.size() < 2) throw InconclusiveRunError("dwell time needs at least two snapshots");
  if (last_region_peak_ >= decay * peak_) {
    throw InconclusiveRunError("density in the region has not decayed by the end of the run");
  }
  double t = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i) t += 0.5 * (prob_[i] + prob_[i - 1]) * (times_[i] - times_[i - 1]);
  return t;
}

double dwell_time(const TrajectoryEnsemble& ensemble, double lo, double hi) {
  if (!(hi > lo)) throw DomainError("region must have hi > lo");
  if (ensemble.size() == 0) return 0.0;
  const auto& t = ensemble.times;
  double total = 0.0;
  for (const auto& tr : ensemble.trajectories) {
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double xa = tr.x[i - 1], xb = tr.x[i];
      const double dt = t[i] - t[i - 1];
      if (xa == xb) {
        if (xa >= lo && xa <= hi) total += dt;
        continue;
      }
      const double a = std::min(xa, xb), b = std::max(xa, xb);
      const double overlap = std::min(b, hi) - std::max(a, lo);
      if (overlap > 0.0) total += dt * overlap / (b - a);
    }
  }
  return total / static_cast<double>(ensemble.size());
}

namespace {

ObservableReport with_ensemble(ObservableReport r, const LocalMean& local, std::span<const double> positions) {
  if (!positions.empty()) {
    const auto e = ensemble_mean(local, positions);
    r.trajectory_ensemble_value = e.mean;
    r.ensemble_tolerance = 4.0 * e.standard_error;
  }
  r.evaluate();
  return r;
}

}  // namespace

ObservableReport position_report(const ComplexField& psi, std::span<const double> positions) {
  ObservableReport r;
  r.name = "position";
  r.units = "m";
  const UnitSystem any = UnitSystem::electron();
  const auto local = local_operator_mean(psi, LocalOperator::position, any);
  r.orthodox_value = mean_position(psi);
  r.bohmian_density_value = local.mean;
  r.density_tolerance = 1e-9 * psi.grid().length();
  return with_ensemble(std::move(r), local, positions);
}

ObservableReport momentum_report(const ComplexField& psi, std::span<const double> positions,
                                 const UnitSystem& units) {
  ObservableReport r;
  r.name = "momentum";
  r.units = "kg m/s";
  const auto p = mean_momentum(psi, units);
  const auto k = mean_kinetic(psi, units);
  r.orthodox_value = p.orthodox;
  r.bohmian_density_value = p.bohmian;
  // Eighth-order stencil against second-order phase differences, measured
  // on the momentum scale sqrt(2 m <T>).
  r.density_tolerance = 1e-4 * std::sqrt(2.0 * units.mass() * std::abs(k.total));
  return with_ensemble(std::move(r), local_operator_mean(psi, LocalOperator::momentum, units), positions);
}

ObservableReport kinetic_report(const ComplexField& psi, std::span<const double> positions,
                                const UnitSystem& units) {
  ObservableReport r;
  r.name = "kinetic";
  r.units = "J";
  const auto k = mean_kinetic(psi, units);
  r.orthodox_value = k.total;
  r.bohmian_density_value = k.bohmian_kinetic_part + k.quantum_potential_part;
  r.density_tolerance = 1e-6 * std::abs(k.total);
  return with_ensemble(std::move(r), local_operator_mean(psi, LocalOperator::kinetic, units), positions);
}

namespace {

// Fornberg weights for d/dx at z.
std::vector<double> first_derivative_weights(double z, const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> d0(n, 0.0), d1(n, 0.0);
  double c1 = 1.0, c4 = x[0] - z;
  d0[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        d1[i] = c1 * (d0[i - 1] - c5 * d1[i - 1]) / c2;
        d0[i] = -c1 * c5 * d0[i - 1] / c2;
      }
      d1[j] = (c4 * d1[j] - d0[j]) / c3;
      d0[j] = c4 * d0[j] / c3;
    }
    c1 = c2;
  }
  return d1;
}

}  // namespace

VelocityGap velocity_definition_gap(const ComplexField& psi, const UnitSystem& units, const RealField* potential,
                                    double threshold) {
  constexpr std::ptrdiff_t width = 9;
  const auto& g = psi.grid();
  const auto n = static_cast<std::ptrdiff_t>(psi.size());
  if (n < width) throw DomainError("velocity_definition_gap: grid shorter than the stencil");
  if (potential && potential->size() != psi.size()) throw DomainError("velocity_definition_gap: potential size");
  const auto polar = to_polar(psi, units, threshold);
  const double peak = peak_density(psi);

  // piece id per point; cell averaging leaves rounding-level differences
  std::vector<std::ptrdiff_t> piece(psi.size(), 0);
  if (potential) {
    double vmax = 0.0;
    for (double v : potential->data()) vmax = std::max(vmax, std::abs(v));
    const double tol = 1e-9 * vmax;
    for (std::ptrdiff_t k = 1; k < n; ++k) {
      const bool same = std::abs((*potential)[k] - (*potential)[k - 1]) <= tol;
      piece[k] = piece[k - 1] + (same ? 0 : 1);
    }
  }
  auto run_of = [&](std::ptrdiff_t k) {
    std::ptrdiff_t lo = k, hi = k;
    while (lo > 0 && piece[lo - 1] == piece[k]) --lo;
    while (hi + 1 < n && piece[hi + 1] == piece[k]) ++hi;
    return std::pair{lo, hi};
  };

  VelocityGap out;
  double worst = 0.0;
  const double hm = units.hbar() / units.mass();
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    if (abs2(psi[k]) <= threshold * peak) continue;
    auto [lo, hi] = run_of(k);
    if (hi - lo + 1 < width) {
      // a short piece (a single averaged edge cell) borrows its longer neighbour
      const auto left = lo > 0 ? run_of(lo - 1) : std::pair{lo, lo};
      const auto right = hi + 1 < n ? run_of(hi + 1) : std::pair{hi, hi};
      if (lo - left.first >= right.second - hi) lo = left.first;
      else hi = right.second;
    }
    std::ptrdiff_t s = std::clamp(k - width / 2, lo, std::max(lo, hi - width + 1));
    s = std::clamp<std::ptrdiff_t>(s, 0, n - width);
    std::vector<double> xs(width);
    for (std::ptrdiff_t j = 0; j < width; ++j) xs[j] = g.x(static_cast<std::size_t>(s + j));
    const auto w = first_derivative_weights(g.x(static_cast<std::size_t>(k)), xs);
    Complex dpsi(0.0);
    double ds = 0.0;
    bool node = false;
    for (std::ptrdiff_t j = 0; j < width; ++j) {
      const auto i = static_cast<std::size_t>(s + j);
      dpsi += w[j] * psi[i];
      ds += w[j] * polar.action[i];
      node = node || polar.node[i];
    }
    if (node) continue;
    const double v_current = hm * std::imag(std::conj(psi[k]) * dpsi) / abs2(psi[k]);
    const double v_phase = ds / units.mass();
    out.max_speed = std::max(out.max_speed, std::abs(v_phase));
    ++out.points;
    if (std::abs(v_current - v_phase) > worst) {
      worst = std::abs(v_current - v_phase);
      out.worst_x = g.x(static_cast<std::size_t>(k));
    }
  }
  out.relative = out.max_speed > 0.0 ? worst / out.max_speed : 0.0;
  return out;
}

}  // namespace bohm

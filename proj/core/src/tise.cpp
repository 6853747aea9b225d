#include "bohm/tise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bohm/numerics.hpp"
#include "bohm/parallel.hpp"

namespace bohm {

namespace {

// Symmetric tridiagonal matrix: diagonal d[0..m), constant off-diagonal e.
struct Tridiag {
  std::vector<double> d;
  double e;
};

// Number of eigenvalues strictly below x (Sturm sequence).
std::size_t sturm_count(const Tridiag& t, double x) {
  std::size_t c = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < t.d.size(); ++i) {
    q = t.d[i] - x - (i ? t.e * t.e / q : 0.0);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++c;
  }
  return c;
}

double kth_eigenvalue(const Tridiag& t, std::size_t k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(t, mid) > k) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Solves (T - s I) x = b with partial pivoting; b is overwritten.
void shifted_solve(const Tridiag& t, double s, std::vector<double>& b) {
  const std::size_t m = t.d.size();
  // Row i of U holds u0 (diag), u1, u2 (fill-in from pivoting).
  std::vector<double> u0(m), u1(m, 0.0), u2(m, 0.0), lmul(m, 0.0);
  std::vector<char> swapped(m, 0);
  double a = t.d[0] - s, c = m > 1 ? t.e : 0.0, fill = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    // Current row: [a c fill]; next row: [e, d-s, e].
    const double nb = t.e, nd = t.d[i + 1] - s, nc = i + 2 < m ? t.e : 0.0;
    if (std::abs(nb) > std::abs(a)) {
      swapped[i] = 1;
      const double l = a / nb;
      u0[i] = nb; u1[i] = nd; u2[i] = nc;
      lmul[i] = l;
      a = c - l * nd;
      c = fill - l * nc;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= l * b[i];
    } else {
      if (a == 0.0) a = std::numeric_limits<double>::epsilon() * std::abs(t.e);
      const double l = nb / a;
      u0[i] = a; u1[i] = c; u2[i] = fill;
      lmul[i] = l;
      a = nd - l * c;
      c = nc - l * fill;
      b[i + 1] -= l * b[i];
    }
    fill = 0.0;
  }
  if (a == 0.0) a = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t.e));
  u0[m - 1] = a;
  for (std::size_t i = m; i-- > 0;) {
    double r = b[i];
    if (i + 1 < m) r -= u1[i] * b[i + 1];
    if (i + 2 < m) r -= u2[i] * b[i + 2];
    b[i] = r / u0[i];
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<EigenSolution> bound_states(const RealField& potential, const UnitSystem& units,
                                        std::size_t count) {
  const Grid1D& grid = potential.grid();
  const std::size_t n = grid.size();
  if (count == 0 || count > n - 2) {
    throw DomainError("requested " + std::to_string(count) + " states from " +
                      std::to_string(n - 2) + " interior points");
  }
  const double kin = units.hbar() * units.hbar() / (2.0 * units.mass() * grid.dx() * grid.dx());
  Tridiag t{std::vector<double>(n - 2), -kin};
  for (std::size_t i = 0; i < n - 2; ++i) t.d[i] = 2.0 * kin + potential[i + 1];
  const auto [dmin, dmax] = std::minmax_element(t.d.begin(), t.d.end());
  const double pad = 2.0 * kin + 1e-12 * std::max(std::abs(*dmin), std::abs(*dmax));
  const double lo = *dmin - pad, hi = *dmax + pad;

  std::vector<EigenSolution> out;
  std::vector<std::vector<double>> vecs;
  for (std::size_t k = 0; k < count; ++k) {
    const double ev = kth_eigenvalue(t, k, lo, hi);
    // Shift just off the eigenvalue so the solve stays finite.
    const double shift = ev + 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(ev), kin);
    std::vector<double> x(n - 2);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.01 * std::sin(0.7 * static_cast<double>(i) + 0.3 * k);
    for (int it = 0; it < 4; ++it) {
      shifted_solve(t, shift, x);
      for (const auto& v : vecs) {
        const double p = dot(x, v);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= p * v[i];
      }
      const double nrm = std::sqrt(dot(x, x));
      for (double& xi : x) xi /= nrm;
    }
    vecs.push_back(x);

    std::vector<double> phi(n, 0.0);
    std::copy(x.begin(), x.end(), phi.begin() + 1);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = phi[i] * phi[i];
    const double scale = 1.0 / std::sqrt(trapezoid(sq, grid.dx()));
    const double peak = *std::max_element(x.begin(), x.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    });
    const double thr = 1e-8 * std::abs(peak);
    double sign = 1.0;
    for (double v : phi) {
      if (std::abs(v) > thr) {
        sign = v > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (double& v : phi) v *= sign * scale;
    out.push_back(EigenSolution{ev, RealField(grid, std::move(phi))});
  }
  return out;
}

std::vector<EigenSolution> bound_states(const PotentialSpec& potential, const Grid1D& grid,
                                        const UnitSystem& units, std::size_t count) {
  return bound_states(potential.sample(grid), units, count);
}

template <class T>
Field<T> numerov_sweep(const RealField& f, T seed_last, T seed_before_last) {
  const Grid1D& grid = f.grid();
  const std::size_t n = grid.size();
  const double h2 = grid.dx() * grid.dx() / 12.0;
  Field<T> phi(grid);
  phi[n - 1] = seed_last;
  phi[n - 2] = seed_before_last;
  for (std::size_t k = n - 2; k >= 1; --k) {
    const double den = 1.0 - h2 * f[k - 1];
    if (std::abs(den) < 1e-12) {
      throw StepSizeError("Numerov denominator vanishes at point " + std::to_string(k - 1) +
                          "; reduce dx");
    }
    phi[k - 1] = (2.0 * (1.0 + 5.0 * h2 * f[k]) * phi[k] - (1.0 - h2 * f[k + 1]) * phi[k + 1]) / den;
  }
  return phi;
}

template Field<double> numerov_sweep<double>(const RealField&, double, double);
template Field<Complex> numerov_sweep<Complex>(const RealField&, Complex, Complex);

ScatteringSolution scattering_state(const RealField& potential, double energy,
                                    const UnitSystem& units) {
  const Grid1D& grid = potential.grid();
  const std::size_t n = grid.size();
  if (n < 6) throw DomainError("scattering grid needs at least 6 points");
  const double lead = potential[0];
  const double vscale = std::max({std::abs(lead), std::abs(energy), 1e-300});
  auto same = [&](double v) { return std::abs(v - lead) <= 1e-12 * vscale; };
  for (std::size_t k : {std::size_t{1}, std::size_t{2}, n - 3, n - 2, n - 1}) {
    if (!same(potential[k])) {
      throw UnsupportedConfigError("scattering leads must be flat and of equal height");
    }
  }
  const double ekin = energy - lead;
  if (!(energy > 0.0) || !(ekin > 0.0)) throw DomainError("scattering energy must exceed the lead potential");

  const double hb = units.hbar();
  const double c2m = 2.0 * units.mass() / (hb * hb);
  RealField f(grid);
  for (std::size_t k = 0; k < n; ++k) f[k] = c2m * (potential[k] - energy);

  // Discrete plane wave of the Numerov recursion in the leads.
  const double k = units.wave_number(ekin);
  const double h = grid.dx();
  const double h2 = h * h / 12.0;
  const double fl = -k * k;
  const double cosq = (1.0 + 5.0 * h2 * fl) / (1.0 - h2 * fl);
  if (!(std::abs(cosq) < 1.0)) throw StepSizeError("grid too coarse for this energy; reduce dx");
  const double q = std::acos(cosq) / h;
  auto wave = [&](double sign, double x) { return std::exp(Complex(0.0, sign * q * x)); };

  auto phi = numerov_sweep<Complex>(f, wave(1.0, grid.x(n - 1)), wave(1.0, grid.x(n - 2)));

  // phi = A e^{iqx} + B e^{-iqx} at the two left-most points.
  const double x0 = grid.x(0), x1 = grid.x(1);
  const Complex p0 = wave(1.0, x0), m0 = wave(-1.0, x0), p1 = wave(1.0, x1), m1 = wave(-1.0, x1);
  const Complex det = p0 * m1 - m0 * p1;
  const Complex A = (phi[0] * m1 - m0 * phi[1]) / det;
  const Complex B = (p0 * phi[1] - phi[0] * p1) / det;

  const Complex scale = 1.0 / (A * std::sqrt(2.0 * si::pi));
  for (auto& v : phi.data()) v *= scale;
  return ScatteringSolution{energy, k, B / A, 1.0 / A, std::move(phi)};
}

ScatteringSolution scattering_state(const PotentialSpec& potential, double energy,
                                    const Grid1D& grid, const UnitSystem& units) {
  return scattering_state(potential.sample(grid), energy, units);
}

std::vector<double> numerov_current(const ScatteringSolution& s, const RealField& potential,
                                    const UnitSystem& units) {
  const Grid1D& grid = potential.grid();
  if (!(s.interior.grid() == grid)) throw ShapeError("scattering state and potential grids differ");
  const std::size_t n = grid.size();
  const double hb = units.hbar();
  const double c2m = 2.0 * units.mass() / (hb * hb);
  const double h = grid.dx();
  const double h2 = h * h / 12.0;
  std::vector<Complex> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = (1.0 - h2 * c2m * (potential[k] - s.energy)) * s.interior[k];
  const double w = 1.0 + h2 * s.k * s.k;
  const double cosq = (1.0 - 5.0 * h2 * s.k * s.k) / w;
  const double scale = hb * s.k / (units.mass() * w * w * std::sqrt(1.0 - cosq * cosq));
  std::vector<double> out(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) out[k] = scale * std::imag(std::conj(y[k]) * y[k + 1]);
  return out;
}

std::vector<TransmissionPoint> transmission_scan(const PotentialSpec& potential,
                                                 const std::vector<double>& energies,
                                                 const Grid1D& grid, const UnitSystem& units) {
  for (double e : energies) {
    if (!(e > 0.0)) throw DomainError("scan energies must be positive");
  }
  const RealField v = potential.sample(grid);
  std::vector<TransmissionPoint> out(energies.size());
  parallel_for(0, energies.size(), [&](std::size_t i) {
    const auto s = scattering_state(v, energies[i], units);
    out[i] = TransmissionPoint{energies[i], std::norm(s.t), std::norm(s.r), false};
  }, 1);
  for (std::size_t i = 1; i + 1 < out.size(); ++i) {
    const double t = out[i].transmission;
    out[i].resonance = t - out[i - 1].transmission > 1e-9 && t >= out[i + 1].transmission;
  }
  return out;
}

}  // namespace bohm

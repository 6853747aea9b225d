#include <doctest.h>

#include <cmath>
#include <random>

#include "bohm/numerics.hpp"
#include "bohm/qhje.hpp"
#include "bohm/sampling.hpp"
#include "bohm/tdse.hpp"
#include "fixtures.hpp"

using namespace bohm;

namespace {

const UnitSystem kE = UnitSystem::electron();

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Packet a = 5 nm at rest; elements at stratified quantiles of |psi|^2.
struct GaussianFluid {
  GaussianParams p{5e-9, 0.0, 2e8, 0.0};
  Grid1D grid = Grid1D::spanning(-40e-9, 40e-9, 4001);
  double tscale = kE.mass() * 25e-18 / kE.hbar();

  std::vector<double> positions(std::size_t n) const {
    auto psi = gaussian_packet(p, 0.0, grid, kE);
    return quantile_positions(density(psi), n, 1e-3, 1.0 - 1e-3);
  }
  double amplitude(double x) const { return std::exp(-(x - p.x0) * (x - p.x0) / (p.a * p.a)); }
  double action(double x) const { return kE.hbar() * p.kc * (x - p.x0); }
};

}  // namespace

TEST_CASE("scattered derivatives of polynomials") {
  std::mt19937_64 rng(5);
  std::vector<double> x;
  double at = 0.0;
  for (int i = 0; i < 40; ++i) {
    at += 0.5 + canonical_uniform(rng);
    x.push_back(at);
  }
  std::vector<double> sq(x.size()), quartic(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sq[i] = x[i] * x[i];
    quartic[i] = 0.3 * std::pow(x[i] - 10.0, 4) - x[i];
  }
  auto d1 = scattered_derivative(x, x, 1);
  auto d2 = scattered_derivative(sq, x, 2);
  auto q2 = scattered_derivative(quartic, x, 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(d1[i] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d2[i] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(q2[i] == doctest::Approx(3.6 * std::pow(x[i] - 10.0, 2)).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("scattered derivative of sin on jittered points") {
  std::mt19937_64 rng(17);
  std::vector<double> x, f;
  for (int i = 0; i < 600; ++i) {
    x.push_back(1e-2 * (i + 0.4 * (canonical_uniform(rng) - 0.5)));
    f.push_back(std::sin(x.back()));
  }
  auto d = scattered_derivative(f, x, 1);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(d[i] - std::cos(x[i])));
  CHECK(err < 1e-4);
}

TEST_CASE("scattered derivative input errors") {
  std::vector<double> x{0, 1, 2, 2, 3, 4, 5, 6};
  std::vector<double> f(8, 1.0);
  CHECK_THROWS_AS(scattered_derivative(f, x, 1), StepSizeError);
  std::vector<double> few{0, 1, 2};
  CHECK_THROWS_AS(scattered_derivative(few, few, 1), DomainError);
  std::vector<double> ok{0, 1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(scattered_derivative(ok, ok, 3), DomainError);
}

TEST_CASE("classical plane-wave elements translate rigidly") {
  const double k = 1e9;
  const double v0 = kE.hbar() * k / kE.mass();
  auto e = make_elements(linspace(-5e-9, 5e-9, 21), [](double) { return 1.0; },
                         [&](double x) { return kE.hbar() * k * x; }, kE);
  const double dt = 1e-16;
  auto classical = e, quantum = e;
  for (int s = 0; s < 50; ++s) {
    classical = lagrangian_step(classical, PotentialSpec::flat(), dt, kE, {false, 20});
    quantum = lagrangian_step(quantum, PotentialSpec::flat(), dt, kE, {true, 20});
  }
  const double t = 50 * dt;
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(classical.x[i] == doctest::Approx(e.x[i] + v0 * t).epsilon(1e-10).scale(1e-9));
    CHECK(classical.v[i] == doctest::Approx(v0).epsilon(1e-8));
    // S along an element gains (m v0^2 - E) t = m v0^2 t / 2.
    CHECK(classical.S[i] - e.S[i] == doctest::Approx(0.5 * kE.mass() * v0 * v0 * t).epsilon(1e-8));
    CHECK(classical.R[i] == doctest::Approx(1.0));
    // Uniform R: no quantum potential, same motion.
    CHECK(quantum.x[i] == doctest::Approx(classical.x[i]).epsilon(1e-12));
    CHECK(quantum.S[i] == doctest::Approx(classical.S[i]).epsilon(1e-10));
  }
}

TEST_CASE("quantum elements follow the spreading packet") {
  GaussianFluid gf;
  auto x0 = gf.positions(101);
  auto e = make_elements(x0, [&](double x) { return gf.amplitude(x); }, [&](double x) { return gf.action(x); }, kE);
  ClassicalConfig cfg{gf.tscale / 4000.0, 2000, 100, true, 20};
  auto run = fluid_ensemble_evolve(e, PotentialSpec::flat(), cfg, kE);
  CHECK_FALSE(run.caustic);
  REQUIRE(run.ensemble.samples() == 21);
  CHECK(run.final_elements.size() == 101);

  // Free-packet Bohmian paths scale with the width about the moving centre.
  const double hm = kE.hbar() / kE.mass();
  const double sigma0 = gf.p.a / 2.0;
  for (std::size_t s = 0; s < run.ensemble.samples(); ++s) {
    const double t = run.ensemble.times[s];
    const double grow = std::sqrt(1.0 + 4.0 * hm * hm * t * t / std::pow(gf.p.a, 4));
    const double c = gf.p.x0 + hm * gf.p.kc * t;
    double se = 0.0;
    for (std::size_t j = 0; j < x0.size(); ++j) {
      const double want = c + (x0[j] - gf.p.x0) * grow;
      se += std::pow(run.ensemble.trajectories[j].x[s] - want, 2);
    }
    CHECK(std::sqrt(se / x0.size()) < 0.01 * sigma0);
  }
  // The packet did spread noticeably.
  CHECK(run.final_elements.x.back() - run.final_elements.x.front() > 1.05 * (x0.back() - x0.front()));
}

TEST_CASE("quantum elements in a harmonic well track the coherent state") {
  const double omega = 0.02 * si::electron_volt / kE.hbar();
  const double s0 = std::sqrt(kE.hbar() / (kE.mass() * omega));  // amplitude width a
  const double d = 2.0 * s0;
  auto pot = PotentialSpec::harmonic(kE.mass(), omega);
  // Edge windows are one-sided; their roundoff grows like exp(c hbar t / m h^2),
  // so the spacing here is kept at s0/5.
  auto x0 = linspace(d - 3.0 * s0, d + 3.0 * s0, 31);
  auto e = make_elements(x0, [&](double x) { return std::exp(-(x - d) * (x - d) / (2 * s0 * s0)); },
                         [](double) { return 0.0; }, kE);
  const double period = 2 * si::pi / omega;
  ClassicalConfig cfg{period / 20000.0, 20000, 1000, true, 20};
  auto run = fluid_ensemble_evolve(e, pot, cfg, kE);
  CHECK_FALSE(run.caustic);
  for (std::size_t s = 0; s < run.ensemble.samples(); ++s) {
    const double shift = d * (std::cos(omega * run.ensemble.times[s]) - 1.0);
    double se = 0.0;
    for (std::size_t j = 0; j < x0.size(); ++j) se += std::pow(run.ensemble.trajectories[j].x[s] - x0[j] - shift, 2);
    CHECK(std::sqrt(se / x0.size()) < 0.02 * s0 / std::sqrt(2.0));
  }
}

TEST_CASE("classical single element oscillates with the classical period") {
  const double omega = 1e14;
  auto pot = PotentialSpec::harmonic(kE.mass(), omega);
  auto e = make_elements({3e-9}, [](double) { return 1.0; }, [](double) { return 0.0; }, kE);
  const double period = 2 * si::pi / omega;
  ClassicalConfig cfg{period / 2000.0, 7000, 1, false, 20};
  auto run = fluid_ensemble_evolve(e, pot, cfg, kE);
  // Upward zero crossings of x.
  const auto& x = run.ensemble.trajectories[0].x;
  const auto& t = run.ensemble.times;
  std::vector<double> up;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i - 1] < 0.0 && x[i] >= 0.0) up.push_back(t[i - 1] + (t[i] - t[i - 1]) * (-x[i - 1]) / (x[i] - x[i - 1]));
  }
  REQUIRE(up.size() >= 3);
  CHECK((up[2] - up[0]) / 2.0 == doctest::Approx(period).epsilon(0.01));
  double amp = 0.0;
  for (double xi : x) amp = std::max(amp, std::abs(xi));
  CHECK(amp == doctest::Approx(3e-9).epsilon(0.01));
}

TEST_CASE("classical paths ignore the amplitude, quantum paths do not") {
  GaussianFluid gf;
  auto x0 = gf.positions(41);
  auto act = [&](double x) { return gf.action(x); };
  auto narrow = [&](double x) { return gf.amplitude(x); };
  auto lumpy = [&](double x) { return gf.amplitude(x) * (1.5 + std::cos(x / 2e-9)); };
  ClassicalConfig cfg{gf.tscale / 4000.0, 400, 400, false, 20};
  auto c1 = fluid_ensemble_evolve(make_elements(x0, narrow, act, kE), PotentialSpec::flat(), cfg, kE);
  auto c2 = fluid_ensemble_evolve(make_elements(x0, lumpy, act, kE), PotentialSpec::flat(), cfg, kE);
  cfg.quantum = true;
  auto q1 = fluid_ensemble_evolve(make_elements(x0, narrow, act, kE), PotentialSpec::flat(), cfg, kE);
  auto q2 = fluid_ensemble_evolve(make_elements(x0, lumpy, act, kE), PotentialSpec::flat(), cfg, kE);
  double qdiff = 0.0;
  for (std::size_t j = 0; j < x0.size(); ++j) {
    CHECK(c1.final_elements.x[j] == c2.final_elements.x[j]);
    qdiff = std::max(qdiff, std::abs(q1.final_elements.x[j] - q2.final_elements.x[j]));
  }
  CHECK(qdiff > 1e-3 * gf.p.a);
}

TEST_CASE("classical ensemble from rest in a harmonic well hits a caustic") {
  const double omega = 1e14;
  auto pot = PotentialSpec::harmonic(kE.mass(), omega);
  Grid1D g = Grid1D::spanning(-10e-9, 10e-9, 2001);
  PolarField pol{g, std::vector<double>(g.size(), 1.0), std::vector<double>(g.size(), 0.0),
                 std::vector<std::uint8_t>(g.size(), 0)};
  const double period = 2 * si::pi / omega;
  ClassicalConfig cfg{period / 400.0, 400, 10, false, 20};
  auto run = classical_ensemble_evolve(pol, linspace(-5e-9, 5e-9, 11), pot, cfg, kE);
  CHECK(run.caustic);
  CHECK(run.caustic_time == doctest::Approx(period / 4).epsilon(0.05));
  CHECK(run.final_elements.size() == 11);
}

TEST_CASE("Eulerian log-polar: plane wave and uniform field") {
  Grid1D g = Grid1D::spanning(0.0, 10e-9, 201);
  const double k = 1e9;
  const double E = kE.kinetic_energy(k);
  LogPolarField f{g, std::vector<double>(g.size(), 0.0), std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) f.S[i] = kE.hbar() * k * g.x(i);
  const double dt = 1e-17;
  auto next = eulerian_logpolar_step(f, RealField(g), dt, kE);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(next.C[i]) < 1e-12);
    CHECK(next.S[i] - f.S[i] == doctest::Approx(-E * dt).epsilon(1e-9));
  }
  LogPolarField u{g, std::vector<double>(g.size(), -0.3), std::vector<double>(g.size(), 2e-34)};
  auto same = eulerian_logpolar_step(u, RealField(g), dt, kE);
  CHECK(same.C == u.C);
  CHECK(same.S == u.S);
}

TEST_CASE("Eulerian log-polar reproduces the free packet over a short horizon") {
  fixture::FreePacket fp;
  fp.packet = GaussianParams{3e-9, 0.0, 3e8, 0.0};
  fp.grid = Grid1D::spanning(-12e-9, 12e-9, 481);
  const double dt = fp.dt_for(0.05);
  auto f = to_log_polar(gaussian_packet(fp.packet, 0.0, fp.grid, fp.units), fp.units);
  for (int s = 0; s < 100; ++s) f = eulerian_logpolar_step(f, RealField(fp.grid), dt, fp.units);
  auto psi = from_log_polar(f, fp.units);
  auto exact = gaussian_packet(fp.packet, 100 * dt, fp.grid, fp.units);
  double err = 0.0;
  for (std::size_t k = 0; k < fp.grid.size(); ++k) err = std::max(err, std::abs(psi[k] - exact[k]));
  CHECK(err < 1e-3 * fixture::max_abs(exact.data()));
}

namespace {

// Smoothed histogram peaks that stand out from the dips on both sides.
std::size_t fringe_count(const std::vector<double>& xs, double lo, double hi, std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  for (double x : xs) {
    if (x < lo || x >= hi) continue;
    h[static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins))] += 1.0;
  }
  std::vector<double> s(bins, 0.0);
  for (std::size_t i = 1; i + 1 < bins; ++i) s[i] = (h[i - 1] + h[i] + h[i + 1]) / 3.0;
  const double top = *std::max_element(s.begin(), s.end());
  std::size_t peaks = 0;
  double dip = 0.0;  // lowest value since the last peak
  bool rising = false;
  for (std::size_t i = 1; i + 1 < bins; ++i) {
    dip = peaks == 0 && !rising ? s[i] : std::min(dip, s[i]);
    if (s[i] >= s[i - 1] && s[i] > s[i + 1] && s[i] > 0.2 * top) {
      // Look ahead for the next dip.
      double after = s[i];
      for (std::size_t j = i + 1; j < bins && s[j] <= after; ++j) after = s[j];
      if (after < 0.7 * s[i] && (peaks == 0 || dip < 0.7 * s[i])) {
        ++peaks;
        dip = s[i];
      }
    }
    rising = true;
  }
  return peaks;
}

}  // namespace

TEST_CASE("two slits: quantum paths form fringes, classical paths do not") {
  const double d = 8e-9;
  const double a = 1e-9;
  const GaussianParams left{a, -d, 0.0, 0.0}, right{a, d, 0.0, 0.0};
  const Grid1D g = Grid1D::with_step(-90e-9, 90e-9, 0.15e-9);
  const double horizon = 1.7e-13;
  const double dt = 0.1 * kE.mass() * g.dx() * g.dx() / kE.hbar();
  const std::size_t steps = static_cast<std::size_t>(horizon / dt);

  // Quantum: both slits in one wave.
  TdseConfig cfg{dt, steps, 0.0, 1, false};
  auto start = startup_from_gaussians({left, right}, {1.0, 1.0}, g, dt, kE);
  auto x0 = quantile_positions(density(start.prev), 2000, 1e-3, 1.0 - 1e-3);
  TrajectoryIntegrator integ(x0);
  evolve(start, RealField(g), cfg, kE, [&](const Snapshot& s) { integ.push(bohmian_velocity(s.psi, kE, s.time)); });
  const auto quantum = integ.positions();

  // Classical: each slit's paths are independent, so the slits run separately.
  // They start a short time tau after the slit with the packet's own
  // diverging phase, which is the velocity spread they need to reach the screen.
  const double tau = 2e-15;
  const double th = 2.0 * kE.hbar() * tau / (kE.mass() * a * a);
  std::vector<double> classical;
  for (const auto& slit : {left, right}) {
    auto later = gaussian_packet(slit, tau, g, kE);
    auto pos = quantile_positions(density(later), 1000, 1e-3, 1.0 - 1e-3);
    auto e = make_elements(
        pos, [&](double x) { return std::exp(-std::pow(x - slit.x0, 2) / (a * a * (1.0 + th * th))); },
        [&](double x) { return kE.hbar() * th / (1.0 + th * th) * std::pow(x - slit.x0, 2) / (a * a); }, kE);
    ClassicalConfig cc{(horizon - tau) / 1000.0, 1000, 1000, false, 20};
    auto run = fluid_ensemble_evolve(e, PotentialSpec::flat(), cc, kE, tau);
    REQUIRE_FALSE(run.caustic);
    classical.insert(classical.end(), run.final_elements.x.begin(), run.final_elements.x.end());
  }

  CHECK(fringe_count(quantum, -60e-9, 60e-9, 120) >= 4);
  CHECK(fringe_count(classical, -60e-9, 60e-9, 120) <= 2);
}

#include <doctest.h>

#include <cmath>

#include "bohm/numerics.hpp"
#include "bohm/tise.hpp"
#include "bohm/trajectory.hpp"

using namespace bohm;

namespace {

const UnitSystem kE = UnitSystem::electron();
const UnitSystem kGaAs = UnitSystem::electron(0.067);
constexpr double eV = si::electron_volt;

int sign_changes(const RealField& f) {
  int c = 0;
  double prev = 0.0;
  const double thr = 1e-9 * std::abs(*std::max_element(f.data().begin(), f.data().end(),
                                                       [](double a, double b) { return std::abs(a) < std::abs(b); }));
  for (double v : f.values()) {
    if (std::abs(v) <= thr) continue;
    if (prev != 0.0 && (v > 0) != (prev > 0)) ++c;
    prev = v;
  }
  return c;
}

double barrier_transmission(double e, double v0, double d, const UnitSystem& u) {
  const double kappa = std::sqrt(2.0 * u.mass() * (v0 - e)) / u.hbar();
  const double s = std::sinh(kappa * d);
  return 1.0 / (1.0 + v0 * v0 * s * s / (4.0 * e * (v0 - e)));
}

PotentialSpec rtd() {
  return PotentialSpec::piecewise({{15e-9, 17e-9, 0.3 * eV}, {24e-9, 26e-9, 0.3 * eV}});
}

}  // namespace

TEST_CASE("infinite well spectrum") {
  const double L = 10e-9;
  auto grid = Grid1D::spanning(0.0, L, 2000);
  auto states = bound_states(PotentialSpec::flat(), grid, kE, 5);
  REQUIRE(states.size() == 5);
  for (std::size_t n = 1; n <= 5; ++n) {
    const double want = n * n * si::pi * si::pi * kE.hbar() * kE.hbar() / (2.0 * kE.mass() * L * L);
    CHECK(std::abs(states[n - 1].energy / want - 1.0) < 5e-3);
    CHECK(sign_changes(states[n - 1].wavefunction) == static_cast<int>(n - 1));
    CHECK(trapezoid(states[n - 1].wavefunction.values(), grid.dx()) != 0.0);
  }
  CHECK(states[0].wavefunction[1] > 0.0);
}

TEST_CASE("harmonic oscillator spectrum, orthonormality") {
  const double omega = 0.1 * eV / kE.hbar();
  auto grid = Grid1D::spanning(-10e-9, 10e-9, 2000);
  auto states = bound_states(PotentialSpec::harmonic(kE.mass(), omega), grid, kE, 6);
  for (std::size_t n = 0; n < 6; ++n) {
    CHECK(std::abs(states[n].energy / ((n + 0.5) * kE.hbar() * omega) - 1.0) < 5e-3);
    CHECK(states[n].energy > (n ? states[n - 1].energy : 0.0));
  }
  for (std::size_t m = 0; m < 6; ++m) {
    for (std::size_t n = 0; n < 6; ++n) {
      std::vector<double> prod(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) prod[k] = states[m].wavefunction[k] * states[n].wavefunction[k];
      const double o = trapezoid(prod, grid.dx());
      if (m == n) CHECK(o == doctest::Approx(1.0).epsilon(1e-12));
      else CHECK(std::abs(o) < 1e-8);
    }
  }
  CHECK(sign_changes(states[0].wavefunction) == 0);
  CHECK_THROWS_AS(bound_states(PotentialSpec::flat(), Grid1D(0.0, 1.0, 10), kE, 9), DomainError);
  CHECK_THROWS_AS(bound_states(PotentialSpec::flat(), Grid1D(0.0, 1.0, 10), kE, 0), DomainError);
}

TEST_CASE("Numerov sweep on closed-form cases") {
  Grid1D g(0.0, 0.01, 200);
  auto flat = numerov_sweep<double>(RealField(g), 1.0, 1.0);
  for (double v : flat.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  const double kappa = 3.0;
  RealField up(g);
  for (auto& v : up.data()) v = kappa * kappa;
  auto grow = numerov_sweep<double>(up, std::exp(-kappa * g.x(199)), std::exp(-kappa * g.x(198)));
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(grow[k] == doctest::Approx(std::exp(-kappa * g.x(k))).epsilon(1e-7));
  }
  CHECK(grow[0] > 100.0 * grow[199]);

  RealField bad(g);
  for (auto& v : bad.data()) v = 12.0 / (0.01 * 0.01);
  CHECK_THROWS_AS(numerov_sweep<double>(bad, 1.0, 1.0), StepSizeError);
}

TEST_CASE("Numerov plane wave phase error is fourth order") {
  const double k = 5.0, L = 3.0;
  std::vector<double> errs;
  for (double h : {0.02, 0.01, 0.005}) {
    auto g = Grid1D::with_step(0.0, L, h);
    RealField f(g);
    for (auto& v : f.data()) v = -k * k;
    const std::size_t n = g.size();
    auto phi = numerov_sweep<Complex>(f, std::exp(Complex(0, k * g.x(n - 1))), std::exp(Complex(0, k * g.x(n - 2))));
    errs.push_back(std::abs(phi[0] - 1.0));
  }
  CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("scattering without a scatterer") {
  auto g = Grid1D::spanning(0.0, 40e-9, 1601);
  for (double e : {0.01, 0.1, 0.5}) {
    auto s = scattering_state(PotentialSpec::flat(), e * eV, g, kE);
    CHECK(std::abs(std::abs(s.t) - 1.0) < 1e-10);
    CHECK(std::abs(s.r) < 1e-10);
    CHECK(std::abs(s.interior[0]) == doctest::Approx(1.0 / std::sqrt(2.0 * si::pi)).epsilon(1e-10));
  }
}

TEST_CASE("rectangular barrier against the closed form") {
  const double v0 = 0.3 * eV, d = 1e-9;
  auto g = Grid1D::with_step(0.0, 20e-9, 0.25e-10);
  auto pot = PotentialSpec::piecewise({{10e-9, 10e-9 + d, v0}});
  for (double e : {0.05, 0.1, 0.2, 0.25}) {
    auto s = scattering_state(pot, e * eV, g, kE);
    CHECK(std::abs(std::norm(s.t) - barrier_transmission(e * eV, v0, d, kE)) < 1e-3);
    CHECK(std::abs(std::norm(s.t) + std::norm(s.r) - 1.0) < 1e-6);
  }
}

TEST_CASE("resonant tunnelling diode") {
  auto g = Grid1D::with_step(0.0, 40e-9, 0.1e-9);
  std::vector<double> es;
  for (int i = 1; i <= 100; ++i) es.push_back(i * 1e-3 * eV);
  auto scan = transmission_scan(rtd(), es, g, kGaAs);
  REQUIRE(scan.size() == 100);
  int flagged = 0;
  double peak_e = 0.0, peak_t = 0.0;
  for (const auto& p : scan) {
    CHECK(std::abs(p.transmission + p.reflection - 1.0) < 1e-6);
    if (p.resonance) {
      ++flagged;
      peak_e = p.energy;
      peak_t = p.transmission;
    }
  }
  CHECK(flagged == 1);
  CHECK(peak_e > 0.03 * eV);
  CHECK(peak_e < 0.07 * eV);
  CHECK(peak_t > 0.5);
}

TEST_CASE("stationary current is the same on every link") {
  auto g = Grid1D::with_step(0.0, 40e-9, 0.1e-9);
  const auto v = rtd().sample(g);
  for (double e : {0.02, 0.05537, 0.12}) {
    auto s = scattering_state(v, e * eV, kGaAs);
    const auto j = numerov_current(s, v, kGaAs);
    const double lead = kGaAs.hbar() * s.k * std::norm(s.t) / (2.0 * si::pi * kGaAs.mass());
    double worst = 0.0;
    for (double x : j) worst = std::max(worst, std::abs(x - lead) / lead);
    CHECK(worst < 1e-9);
    // The plain central-difference current agrees up to its O(dx^2) error.
    const auto jc = current_density(s.interior, kGaAs);
    for (std::size_t k = 1; k + 1 < g.size(); ++k) CHECK(std::abs(jc[k] - lead) < 1e-2 * lead);
  }
}

TEST_CASE("transmission approaches one above a barrier") {
  auto g = Grid1D::with_step(0.0, 20e-9, 0.25e-10);
  auto pot = PotentialSpec::piecewise({{9e-9, 10e-9, 0.1 * eV}});
  std::vector<double> es{1.0 * eV, 2.0 * eV, 4.0 * eV, 8.0 * eV};
  auto scan = transmission_scan(pot, es, g, kE);
  for (std::size_t i = 1; i < scan.size(); ++i) CHECK(scan[i].transmission > scan[i - 1].transmission);
  CHECK(scan.back().transmission > 0.999);
  auto flat = transmission_scan(PotentialSpec::flat(), es, g, kE);
  for (const auto& p : flat) {
    CHECK(p.transmission == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_FALSE(p.resonance);
  }
}

TEST_CASE("scattering input validation") {
  auto g = Grid1D::spanning(0.0, 40e-9, 401);
  CHECK_THROWS_AS(scattering_state(PotentialSpec::flat(), 0.0, g, kE), DomainError);
  CHECK_THROWS_AS(scattering_state(PotentialSpec::flat(), -1.0 * eV, g, kE), DomainError);
  auto step = PotentialSpec::piecewise({{20e-9, 41e-9, 0.1 * eV}});
  CHECK_THROWS_AS(scattering_state(step, 0.2 * eV, g, kE), UnsupportedConfigError);
  auto ramp = PotentialSpec::tabulated(RealField::from_function(g, [](double x) { return x * 1e-12; }));
  CHECK_THROWS_AS(scattering_state(ramp, 0.2 * eV, g, kE), UnsupportedConfigError);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bohm/numerics.hpp"
#include "bohm/potential.hpp"
#include "bohm/sampling.hpp"

using namespace bohm;

namespace {

const UnitSystem kElectron = UnitSystem::electron();

double max_abs_interior(const std::vector<double>& got, const Grid1D& g, double (*want)(double)) {
  double e = 0.0;
  for (std::size_t k = 1; k + 1 < got.size(); ++k) e = std::max(e, std::abs(got[k] - want(g.x(k))));
  return e;
}

double slope(double e1, double e2, double h1, double h2) {
  return std::log(e1 / e2) / std::log(h1 / h2);
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid1D(0.0, 0.0, 10), DomainError);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 2), DomainError);
  Grid1D g(2.0, 0.5, 5);
  CHECK(g.x(4) == doctest::Approx(4.0));
  CHECK(g.cell_of(100.0) == 3);
  CHECK(g.cell_of(-3.0) == 0);
  CHECK(Grid1D::spanning(-1.0, 1.0, 201).dx() == doctest::Approx(0.01));
}

TEST_CASE("gradient of linear and constant fields") {
  Grid1D g(-3.0, 0.37, 40);
  auto lin = RealField::from_function(g, [](double x) { return x; });
  auto c = RealField::from_function(g, [](double) { return 4.2; });
  auto dl = gradient(lin);
  auto dc = gradient(c);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(dl[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dc[k] == 0.0);
  }
}

TEST_CASE("gradient of sin against cos") {
  Grid1D g(0.0, 1e-3, 6284);
  auto f = RealField::from_function(g, [](double x) { return std::sin(x); });
  auto d = gradient<double>(f.values(), g);
  CHECK(max_abs_interior(d, g, [](double x) { return std::cos(x); }) < 1e-6);
}

TEST_CASE("laplacian of quadratic and constant fields") {
  Grid1D g(-1.0, 0.05, 41);
  auto q = RealField::from_function(g, [](double x) { return x * x; });
  auto c = RealField::from_function(g, [](double) { return 3.0; });
  auto lq = laplacian(q);
  auto lc = laplacian(c);
  for (std::size_t k = 1; k + 1 < g.size(); ++k) {
    CHECK(lq[k] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(lc[k]) < 1e-9);
  }
  // Ghost points are zero: the end rows see the wall.
  CHECK(lc[0] == doctest::Approx(-3.0 / (0.05 * 0.05)));
}

TEST_CASE("second-order convergence of both stencils") {
  const double k = 3.0;
  std::vector<double> eg, el;
  std::vector<double> hs{0.02, 0.01, 0.005};
  for (double h : hs) {
    auto g = Grid1D::with_step(0.0, 2.0, h);
    auto f = RealField::from_function(g, [&](double x) { return std::sin(k * x); });
    auto d = gradient(f);
    auto l = laplacian(f);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      e1 = std::max(e1, std::abs(d[i] - k * std::cos(k * g.x(i))));
      e2 = std::max(e2, std::abs(l[i] + k * k * f[i]));
    }
    eg.push_back(e1);
    el.push_back(e2);
  }
  for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
    const double sg = slope(eg[i], eg[i + 1], hs[i], hs[i + 1]);
    const double sl = slope(el[i], el[i + 1], hs[i], hs[i + 1]);
    CHECK(sg >= 1.8);
    CHECK(sg <= 2.2);
    CHECK(sl >= 1.8);
    CHECK(sl <= 2.2);
  }
}

TEST_CASE("operators reject mismatched lengths") {
  Grid1D g(0.0, 1.0, 10);
  std::vector<double> f(9, 1.0);
  CHECK_THROWS_AS(gradient<double>(f, g), ShapeError);
  CHECK_THROWS_AS(laplacian<double>(f, g), ShapeError);
  CHECK_THROWS_AS(RealField(g, f), ShapeError);
}

TEST_CASE("to_polar on constant, pure-phase and plane-wave fields") {
  Grid1D g(0.0, 1e-10, 500);
  const double hb = kElectron.hbar();

  auto one = ComplexField::from_function(g, [](double) { return Complex(1.0, 0.0); });
  auto p1 = to_polar(one, kElectron);
  auto i = ComplexField::from_function(g, [](double) { return Complex(0.0, 1.0); });
  auto pi = to_polar(i, kElectron);
  const double k = 2.0e9;
  auto pw = ComplexField::from_function(g, [&](double x) { return std::exp(Complex(0.0, k * x)); });
  auto pp = to_polar(pw, kElectron);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(p1.amplitude[j] == doctest::Approx(1.0));
    CHECK(p1.action[j] == 0.0);
    CHECK(pi.action[j] == doctest::Approx(0.5 * si::pi * hb).epsilon(1e-14));
    CHECK(pp.amplitude[j] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pp.action[j] == doctest::Approx(hb * k * g.x(j)).epsilon(1e-10).scale(hb));
    CHECK(pp.node[j] == 0);
  }
}

TEST_CASE("from_polar inverts to_polar away from nodes") {
  Grid1D g(-5e-9, 1e-11, 1001);
  auto psi = ComplexField::from_function(g, [](double x) {
    const double u = x / 1e-9;
    return std::exp(-u * u) * std::exp(Complex(0.0, 3.0 * u + 0.7 * u * u)) * (1.0 + 0.2 * std::sin(4 * u));
  });
  auto pol = to_polar(psi, kElectron);
  auto back = from_polar(pol, kElectron);
  double peak = 0.0;
  for (const auto& v : psi.values()) peak = std::max(peak, std::norm(v));
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::norm(psi[k]) > kNodeThreshold * peak) {
      CHECK(std::abs(back[k] - psi[k]) <= 1e-12 * std::abs(psi[k]));
    }
  }
  // And the other direction: polar -> psi -> polar keeps R and S.
  auto again = to_polar(back, kElectron);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (pol.node[k]) continue;
    CHECK(again.amplitude[k] == doctest::Approx(pol.amplitude[k]).epsilon(1e-12));
    CHECK(std::abs(again.action[k] - pol.action[k]) <= 1e-12 * kElectron.hbar() * (1.0 + std::abs(pol.action[k] / kElectron.hbar())));
  }
}

TEST_CASE("unwrapped action has no jump above pi hbar") {
  Grid1D g(0.0, 1e-11, 4000);
  auto psi = ComplexField::from_function(g, [](double x) {
    const double u = x / 1e-9;
    return std::exp(Complex(0.0, 25.0 * u * u)) * (1.1 + std::cos(2 * u));
  });
  auto pol = to_polar(psi, kElectron);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    if (pol.node[k] || pol.node[k + 1]) continue;
    CHECK(std::abs(pol.action[k + 1] - pol.action[k]) <= si::pi * kElectron.hbar());
  }
  // Phase rises well beyond 2 pi so unwrapping did real work.
  CHECK(pol.action.back() / kElectron.hbar() > 100.0);
}

TEST_CASE("sign changes of a real field are flagged as nodes") {
  Grid1D g(0.0, 0.01, 301);
  auto psi = ComplexField::from_function(g, [](double x) { return Complex(std::sin(si::pi * x), 0.0); });
  auto pol = to_polar(psi, kElectron);
  // Zeros at x = 0, 1, 2, 3.
  CHECK(pol.node[0] != 0);
  CHECK(pol.node[100] != 0);
  CHECK(pol.node[200] != 0);
  CHECK(pol.node[50] == 0);
}

TEST_CASE("norm by trapezoid") {
  Grid1D g(0.0, 0.01, 101);
  CHECK(norm(ComplexField(g)) == 0.0);
  auto one = ComplexField::from_function(g, [](double) { return Complex(1.0, 0.0); });
  CHECK(norm(one) == doctest::Approx(1.0).epsilon(1e-12));

  // Normalized Gaussian with amplitude width a: sigma_x = a / sqrt(2).
  const double a = 2e-9;
  const double sx = a / std::sqrt(2.0);
  auto gg = Grid1D::spanning(-8 * sx, 8 * sx, 2001);
  auto psi = ComplexField::from_function(gg, [&](double x) {
    return std::pow(2.0 / (si::pi * a * a), 0.25) * std::exp(-x * x / (a * a));
  });
  CHECK(std::abs(norm(psi) - 1.0) < 1e-6);
}

TEST_CASE("piecewise potentials sample cell averages") {
  auto v = PotentialSpec::piecewise({{1.0, 2.0, 3.0}}, 0.5);
  Grid1D g(0.0, 0.5, 7);
  auto s = v.sample(g);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[2] == doctest::Approx(1.75));  // edge at x = 1 takes the mean
  CHECK(s[3] == doctest::Approx(3.0));
  CHECK(s[4] == doctest::Approx(1.75));
  CHECK(s[6] == doctest::Approx(0.5));
  CHECK(v.value(1.5) == 3.0);
  CHECK_THROWS_AS(PotentialSpec::piecewise({{0.0, 2.0, 1.0}, {1.0, 3.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(PotentialSpec::piecewise({{2.0, 3.0, 1.0}, {0.0, 1.0, 1.0}}), DomainError);

  auto h = PotentialSpec::harmonic(2.0, 3.0, 1.0);
  CHECK(h.value(2.0) == doctest::Approx(9.0));
  CHECK(h.derivative(2.0) == doctest::Approx(18.0));

  auto tab = PotentialSpec::tabulated(RealField::from_function(g, [](double x) { return x * x; }));
  CHECK(tab.value(0.75) == doctest::Approx(0.625));
  CHECK_THROWS_AS(tab.sample(Grid1D(0.0, 0.25, 13)), ShapeError);
}

TEST_CASE("equilibrium sampling: degenerate support") {
  Grid1D g(0.0, 1.0, 11);
  RealField d(g);
  d[4] = 1.0;
  auto xs = sample_quantum_equilibrium(d, 1000, 7);
  for (double x : xs) {
    CHECK(x >= 3.0);
    CHECK(x <= 5.0);
  }
  // Density is a hat on [3, 5]: no sample can fall in a zero-probability cell.
  CHECK_THROWS_AS(sample_quantum_equilibrium(RealField(g), 10, 1), DomainError);
  CHECK_THROWS_AS(sample_quantum_equilibrium(d, 0, 1), DomainError);
}

TEST_CASE("equilibrium sampling: KS distance and determinism") {
  Grid1D g(-1.0, 0.002, 1001);
  auto uni = RealField::from_function(g, [](double) { return 1.0; });
  auto xs = sample_quantum_equilibrium(uni, 100000, 42);
  CHECK(ks_distance(xs, uni) < 0.01);
  for (double x : xs) CHECK(g.contains(x));
  CHECK(sample_quantum_equilibrium(uni, 100, 42) == std::vector<double>(xs.begin(), xs.begin() + 100));

  auto gauss = RealField::from_function(g, [](double x) { return std::exp(-x * x / (2 * 0.01)); });
  auto gs = sample_quantum_equilibrium(gauss, 100000, 3);
  CHECK(ks_distance(gs, gauss) < 0.02);

  auto m = sample_quantum_equilibrium(gauss, 10000, 11);
  const double mean = std::accumulate(m.begin(), m.end(), 0.0) / 1e4;
  CHECK(std::abs(mean) < 4.0 * 0.1 / std::sqrt(1e4));
}

TEST_CASE("quantile placement is stratified") {
  Grid1D g(0.0, 0.01, 101);
  auto uni = RealField::from_function(g, [](double) { return 1.0; });
  auto q = quantile_positions(uni, 4);
  CHECK(q[0] == doctest::Approx(0.125));
  CHECK(q[3] == doctest::Approx(0.875));
  auto r = quantile_positions(uni, 2, 0.5, 1.0);
  CHECK(r[0] == doctest::Approx(0.625));
}

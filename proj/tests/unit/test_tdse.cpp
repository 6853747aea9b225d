#include <doctest.h>

#include <cmath>

#include "bohm/numerics.hpp"
#include "bohm/tdse.hpp"
#include "bohm/trajectory.hpp"
#include "fixtures.hpp"

using namespace bohm;
using fixture::FreePacket;

TEST_CASE("Gaussian packet at its reference time") {
  FreePacket fp;
  const auto& p = fp.packet;
  auto psi = gaussian_packet(p, p.t1, fp.grid, fp.units);
  for (std::size_t k = 0; k < fp.grid.size(); k += 7) {
    const double x = fp.grid.x(k);
    const Complex want = std::pow(2.0 / (si::pi * p.a * p.a), 0.25) *
                         std::exp(Complex(-(x - p.x0) * (x - p.x0) / (p.a * p.a), p.kc * (x - p.x0)));
    CHECK(std::abs(psi[k] - want) < 1e-12 * std::abs(std::pow(2.0 / (si::pi * p.a * p.a), 0.25)));
  }
  CHECK(fixture::density_std(psi) == doctest::Approx(p.a / 2.0).epsilon(1e-6));
}

TEST_CASE("Gaussian packet stays normalized and spreads") {
  FreePacket fp;
  const double tscale = fp.units.mass() * fp.packet.a * fp.packet.a / fp.units.hbar();
  double last = 0.0;
  auto wide = Grid1D::spanning(-200e-9, 400e-9, 6001);
  for (double t : {-0.3 * tscale, 0.0, 0.2 * tscale, 0.7 * tscale, 1.5 * tscale}) {
    auto psi = gaussian_packet(fp.packet, t, wide, fp.units);
    CHECK(std::abs(norm(psi) - 1.0) < 1e-6);
    const double s = fixture::density_std(psi);
    if (t >= 0.0) {
      // sigma(t)^2 = (a^2 + 4 hbar^2 t^2 / (m^2 a^2)) / 4
      const double a = fp.packet.a;
      const double hm = fp.units.hbar() / fp.units.mass();
      CHECK(s == doctest::Approx(0.5 * std::sqrt(a * a + 4 * hm * hm * t * t / (a * a))).epsilon(1e-6));
      CHECK(s > last);
      last = s;
    }
  }
  CHECK(gaussian_truncation(fp.packet, 0.0, Grid1D::spanning(-10e-9, 10e-9, 201), fp.units) > 1e-3);
}

TEST_CASE("stability factor arithmetic and the gate") {
  const auto e = UnitSystem::electron();
  CHECK(stability_factor(1e-16, Grid1D(0.0, 1e-10, 10), e) == doctest::Approx(1.1577).epsilon(1e-3));
  CHECK(stability_factor(1e-17, Grid1D(0.0, 2e-10, 10), e) == doctest::Approx(0.02894).epsilon(1e-3));
  CHECK(stability_factor(0.0, Grid1D(0.0, 2e-10, 10), e) == 0.0);

  FreePacket fp;
  TdseConfig cfg{fp.dt_for(0.3), 10, 0.0, 1, false};
  auto start = startup_from_gaussian(fp.packet, fp.grid, cfg.dt, fp.units);
  RealField v(fp.grid);
  CHECK_THROWS_AS(evolve(start, v, cfg, fp.units, nullptr), InstabilityError);
  cfg.override_stability = true;
  CHECK_NOTHROW(evolve(start, v, cfg, fp.units, nullptr));

  // Beyond the leapfrog limit of 0.5 the run blows up and says so.
  TdseConfig wild{fp.dt_for(0.7), 4000, 0.0, 4000, true};
  try {
    evolve(startup_from_gaussian(fp.packet, fp.grid, wild.dt, fp.units), v, wild, fp.units, nullptr);
    FAIL("unstable run finished");
  } catch (const InstabilityError& err) {
    CHECK(err.stability_factor() == doctest::Approx(0.7));
  }
}

TEST_CASE("leapfrog step on a zero field") {
  Grid1D g(0.0, 1e-10, 50);
  TdseConfig cfg{1e-18, 1, 0.0, 1, false};
  ComplexField z(g);
  auto next = step_explicit(z, z, RealField(g), cfg, UnitSystem::electron());
  for (const auto& v : next.values()) CHECK(v == Complex(0.0, 0.0));
}

TEST_CASE("free Gaussian matches the closed form after 2000 steps") {
  FreePacket fp;
  TdseConfig cfg{fp.dt_for(0.05), 2000, 0.0, 2000, false};
  auto snaps = evolve_collect(startup_from_gaussian(fp.packet, fp.grid, cfg.dt, fp.units),
                              RealField(fp.grid), cfg, fp.units);
  REQUIRE(snaps.size() == 2);
  const auto& last = snaps.back();
  auto exact = gaussian_packet(fp.packet, last.time, fp.grid, fp.units);
  double err = 0.0;
  for (std::size_t k = 0; k < fp.grid.size(); ++k) err = std::max(err, std::abs(last.psi[k] - exact[k]));
  CHECK(err < 1e-4 * fixture::max_abs(exact.data()));

  // Polar round trip on the propagated field.
  auto pol = to_polar(last.psi, fp.units);
  auto back = from_polar(pol, fp.units);
  const double peak = fixture::max_abs(last.psi.data());
  for (std::size_t k = 0; k < fp.grid.size(); ++k) {
    if (std::norm(last.psi[k]) > kNodeThreshold * peak * peak) {
      CHECK(std::abs(back[k] - last.psi[k]) < 1e-12 * std::abs(last.psi[k]));
    }
  }
}

TEST_CASE("norm drift over 5000 steps") {
  FreePacket fp;
  TdseConfig cfg{fp.dt_for(0.1), 5000, 0.0, 500, false};
  EvolveSummary sum;
  auto snaps = evolve_collect(startup_from_gaussian(fp.packet, fp.grid, cfg.dt, fp.units),
                              RealField(fp.grid), cfg, fp.units, &sum);
  CHECK(snaps.size() == 11);
  CHECK(sum.max_norm_drift < 1e-4);
  CHECK_FALSE(sum.euler_bootstrap);
}

TEST_CASE("Gross-Pitaevskii evolution conserves the norm") {
  FreePacket fp;
  TdseConfig cfg{fp.dt_for(0.05), 2000, 1e-29, 2000, false};
  EvolveSummary sum;
  auto snaps = evolve_collect(startup_euler(gaussian_packet(fp.packet, 0.0, fp.grid, fp.units),
                                            RealField(fp.grid), cfg, fp.units),
                              RealField(fp.grid), cfg, fp.units, &sum);
  CHECK(sum.euler_bootstrap);
  CHECK(std::abs(norm(snaps.back().psi) - 1.0) < 1e-4);
  // The nonlinearity matters: compare against the linear run.
  TdseConfig lin = cfg;
  lin.nonlinearity_g = 0.0;
  auto ref = evolve_collect(startup_euler(gaussian_packet(fp.packet, 0.0, fp.grid, fp.units),
                                          RealField(fp.grid), lin, fp.units),
                            RealField(fp.grid), lin, fp.units);
  double diff = 0.0;
  for (std::size_t k = 0; k < fp.grid.size(); ++k) diff = std::max(diff, std::abs(snaps.back().psi[k] - ref.back().psi[k]));
  CHECK(diff > 1e-3 * fixture::max_abs(ref.back().psi.data()));
}

TEST_CASE("linearity of the g = 0 scheme") {
  FreePacket fp;
  TdseConfig cfg{fp.dt_for(0.1), 300, 0.0, 300, false};
  GaussianParams p2{6e-9, 15e-9, -3e8, 0.0};
  auto v = PotentialSpec::piecewise({{5e-9, 7e-9, 0.05 * si::electron_volt}}).sample(fp.grid);
  const Complex a(0.3, -1.2), b(2.0, 0.5);
  auto s1 = startup_from_gaussian(fp.packet, fp.grid, cfg.dt, fp.units);
  auto s2 = startup_from_gaussian(p2, fp.grid, cfg.dt, fp.units);
  auto s12 = startup_from_gaussians({fp.packet, p2}, {a, b}, fp.grid, cfg.dt, fp.units);
  auto r1 = evolve_collect(s1, v, cfg, fp.units).back().psi;
  auto r2 = evolve_collect(s2, v, cfg, fp.units).back().psi;
  auto r12 = evolve_collect(s12, v, cfg, fp.units).back().psi;
  const double scale = fixture::max_abs(r12.data());
  for (std::size_t k = 0; k < fp.grid.size(); ++k) {
    CHECK(std::abs(r12[k] - (a * r1[k] + b * r2[k])) < 1e-10 * scale);
  }
}

TEST_CASE("zero steps returns the input") {
  FreePacket fp;
  TdseConfig cfg{fp.dt_for(0.1), 0, 0.0, 1, false};
  auto start = startup_from_gaussian(fp.packet, fp.grid, cfg.dt, fp.units);
  auto snaps = evolve_collect(start, RealField(fp.grid), cfg, fp.units);
  REQUIRE(snaps.size() == 1);
  CHECK(snaps[0].psi.data() == start.prev.data());
}

TEST_CASE("density spreads monotonically in a flat potential") {
  FreePacket fp;
  fp.packet.a = 2e-9;
  fp.grid = Grid1D::spanning(-40e-9, 40e-9, 801);
  TdseConfig cfg{fp.dt_for(0.1), 4000, 0.0, 200, false};
  auto snaps = evolve_collect(startup_from_gaussian(fp.packet, fp.grid, cfg.dt, fp.units),
                              RealField(fp.grid), cfg, fp.units);
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    CHECK(fixture::density_std(snaps[i].psi) > fixture::density_std(snaps[i - 1].psi));
  }
}

namespace {

// Max over interior points of |d rho/dt + dJ/dx| at the middle of three
// consecutive levels, relative to max |d rho/dt|.
double continuity_residual(double dx, double factor, double g) {
  FreePacket fp;
  fp.packet.a = 3e-9;
  fp.grid = Grid1D::with_step(-20e-9, 20e-9, dx);
  TdseConfig cfg{fp.dt_for(factor), 201, g, 1, false};
  std::vector<Snapshot> s;
  // The free closed form is not a valid second level once g != 0.
  evolve(startup_euler(gaussian_packet(fp.packet, 0.0, fp.grid, fp.units), RealField(fp.grid), cfg, fp.units),
         RealField(fp.grid), cfg, fp.units,
         [&](const Snapshot& snap) {
           if (snap.step >= 199) s.push_back(snap);
         });
  auto r0 = density(s[0].psi), r2 = density(s[2].psi);
  auto dj = gradient(current_density(s[1].psi, fp.units));
  double res = 0.0, scale = 0.0;
  for (std::size_t k = 1; k + 1 < fp.grid.size(); ++k) {
    const double drho = (r2[k] - r0[k]) / (2.0 * cfg.dt);
    res = std::max(res, std::abs(drho + dj[k]));
    scale = std::max(scale, std::abs(drho));
  }
  return res / scale;
}

}  // namespace

TEST_CASE("discrete continuity residual converges at second order") {
  for (double g : {0.0, 5e-29}) {
    const double e1 = continuity_residual(2e-10, 0.1, g);
    const double e2 = continuity_residual(1e-10, 0.1, g);
    const double e3 = continuity_residual(0.5e-10, 0.1, g);
    CHECK(e1 < 5e-2);
    CHECK(std::log2(e1 / e2) > 1.8);
    CHECK(std::log2(e2 / e3) > 1.8);
  }
}

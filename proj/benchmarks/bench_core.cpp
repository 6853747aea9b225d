#include <benchmark/benchmark.h>

#include "bohm/observables.hpp"
#include "bohm/sampling.hpp"
#include "bohm/tdse.hpp"
#include "bohm/tise.hpp"
#include "bohm/trajectory.hpp"

namespace {

const bohm::UnitSystem kElectron = bohm::UnitSystem::electron();

bohm::Grid1D grid_of(std::int64_t n) { return bohm::Grid1D::spanning(-60e-9, 80e-9, static_cast<std::size_t>(n)); }

bohm::ComplexField packet(const bohm::Grid1D& g) {
  return bohm::gaussian_packet({5e-9, -20e-9, 5e8, 0.0}, 0.0, g, kElectron);
}

void BM_LeapfrogStep(benchmark::State& st) {
  const auto g = grid_of(st.range(0));
  bohm::TdseConfig cfg{0.1 * kElectron.mass() * g.dx() * g.dx() / kElectron.hbar(), 1};
  const bohm::RealField v(g);
  auto start = bohm::startup_from_gaussian({5e-9, -20e-9, 5e8, 0.0}, g, cfg.dt, kElectron);
  for (auto _ : st) {
    bohm::step_explicit_inplace(start.prev, start.curr, v, cfg, kElectron);
    std::swap(start.prev, start.curr);
    benchmark::DoNotOptimize(start.curr.data().data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_LeapfrogStep)->Arg(1401)->Arg(14001);

void BM_BohmianVelocity(benchmark::State& st) {
  const auto g = grid_of(st.range(0));
  const auto psi = packet(g);
  for (auto _ : st) benchmark::DoNotOptimize(bohm::bohmian_velocity(psi, kElectron));
}
BENCHMARK(BM_BohmianVelocity)->Arg(1401)->Arg(14001);

void BM_TrajectoryPush(benchmark::State& st) {
  const auto g = grid_of(1401);
  const auto psi = packet(g);
  auto f0 = bohm::bohmian_velocity(psi, kElectron, 0.0);
  auto f1 = f0;
  const auto x0 = bohm::sample_quantum_equilibrium(bohm::density(psi), static_cast<std::size_t>(st.range(0)), 1);
  bohm::IntegratorConfig ic;
  ic.record_stride = 1u << 30;
  bohm::TrajectoryIntegrator integ(x0, ic);
  integ.push(f0);
  double t = 0.0;
  for (auto _ : st) {
    t += 1e-17;
    f1.time = t;
    integ.push(f1);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_TrajectoryPush)->Arg(1000)->Arg(20000);

void BM_BoundStates(benchmark::State& st) {
  const auto g = bohm::Grid1D::spanning(0.0, 10e-9, static_cast<std::size_t>(st.range(0)));
  const bohm::RealField v(g);
  for (auto _ : st) benchmark::DoNotOptimize(bohm::bound_states(v, kElectron, 5));
}
BENCHMARK(BM_BoundStates)->Arg(500)->Arg(2000);

void BM_KineticDecomposition(benchmark::State& st) {
  const auto g = grid_of(st.range(0));
  const auto psi = packet(g);
  for (auto _ : st) benchmark::DoNotOptimize(bohm::mean_kinetic(psi, kElectron));
}
BENCHMARK(BM_KineticDecomposition)->Arg(14001);

}  // namespace
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "csprop/airy.hpp"
#include "csprop/experiments.hpp"
#include "csprop/reference.hpp"
#include "csprop/shooting.hpp"

using namespace csprop;

namespace {

const ExperimentSetup& quartic() {
  static const ExperimentSetup q = quartic_setup();
  return q;
}

void BM_AiryAi(benchmark::State& state) {
  const cplx z(state.range(0) * 0.5, 1.3);
  for (auto _ : state) benchmark::DoNotOptimize(airy_ai(z));
}
BENCHMARK(BM_AiryAi)->Arg(1)->Arg(6)->Arg(20);

void BM_AiryContour(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(airy_F(c, cplx(0.8, -0.4)));
}
BENCHMARK(BM_AiryContour)->DenseRange(1, 3);

void BM_Shoot(benchmark::State& state) {
  const auto& q = quartic();
  Shooter sh(q.make(), q.initial, q.final_label, q.shooting);
  const PhaseVec w = sh.affine_root();
  const bool tangent = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(sh.shoot(w, 1.0, tangent));
}
BENCHMARK(BM_Shoot)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_RefineRoot(benchmark::State& state) {
  const auto& q = quartic();
  Shooter sh(q.make(), q.initial, q.final_label, q.shooting);
  const Root seed = sh.refine_root(0.5, sh.affine_root());
  PhaseVec w = seed.w;
  w[0] += cplx(0.05, -0.05);
  for (auto _ : state) benchmark::DoNotOptimize(sh.refine_root(0.5, w));
}
BENCHMARK(BM_RefineRoot)->Unit(benchmark::kMicrosecond);

void BM_WPlaneScan(benchmark::State& state) {
  const auto& q = quartic();
  Shooter sh(q.make(), q.initial, q.final_label, q.shooting);
  WGrid g = q.wgrid;
  g.n_alpha = g.n_beta = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sh.scan_wplane(0.7, g));
}
BENCHMARK(BM_WPlaneScan)->Arg(21)->Unit(benchmark::kMillisecond);

void BM_FockPropagate(benchmark::State& state) {
  const auto& q = quartic();
  FockEngine1D fock(q.make(), q.n_max);
  const PhaseVec zi = label_to_z(q.initial, q.hbar), zf = label_to_z(q.final_label, q.hbar);
  for (auto _ : state) benchmark::DoNotOptimize(fock.propagate(zi, zf, 1.7));
}
BENCHMARK(BM_FockPropagate)->Unit(benchmark::kMicrosecond);

void BM_GridStep(benchmark::State& state) {
  const ExperimentSetup n = nelson_setup(true);
  GridEngine grid(n.make(), n.grid);
  auto psi = grid.coherent_wavefunction(n.initial);
  for (auto _ : state) {
    grid.evolve(psi, n.grid.dt, 1);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_GridStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <cmath>
#include <random>

#include "csprop/experiments.hpp"
#include "doctest.h"

using namespace csprop;

namespace {

GridSpec box(double half, int n) {
  GridSpec g;
  g.lo = {-half, -half};
  g.hi = {half, half};
  g.points = {n, n};
  g.dt = 1e-3;
  return g;
}

}  // namespace

TEST_SUITE("reference") {

TEST_CASE("Fock engine") {
  auto h = make_system("harmonic", {}, 1.0, {1.0});
  FockEngine1D fock(h, 60);
  const auto li = CoherentLabel::from_widths({1.0}, {0.5}, {1.0}, 1.0);
  const auto lf = CoherentLabel::from_widths({0.3}, {-0.7}, {1.0}, 1.0);
  const PhaseVec zi = label_to_z(li, 1.0), zf = label_to_z(lf, 1.0);
  CHECK(std::abs(fock.propagate(zi, zf, 0.0) - overlap_normalized(zf, zi)) < 1e-12);
  const cplx I(0, 1);
  for (double T : {0.5, 2.0, 7.0}) {
    PhaseVec moved = zi * std::exp(-I * T);
    const cplx want = std::exp(-I * T / 2.0) * overlap_normalized(zf, moved);
    CHECK(std::abs(fock.propagate(zi, zf, T) - want) < 1e-12);
    CHECK(std::abs(exact_k_fock(fock, zi, zf, T) - want) < 1e-12);
  }
  CHECK_NOTHROW(fock.require_converged(zi, zf));

  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  FockEngine1D tiny(q, 12);
  const auto far = CoherentLabel::from_widths({0.0}, {-2.0}, {1.0}, 1.0);
  CHECK_THROWS_AS(tiny.require_converged(label_to_z(far, 1.0), label_to_z(far, 1.0)),
                  AccuracyError);
  FockEngine1D big(q, 120);
  for (double T : {0.3, 1.7, 4.2})
    CHECK(std::abs(big.propagate(zi, zf, T)) <= 1.0 + 1e-12);
}

TEST_CASE("coherent wavefunctions on the grid") {
  auto free2 = make_system("free", {}, 1.0, {1.0, 1.0});
  GridEngine g(free2, box(10.0, 256));
  const auto l = CoherentLabel::from_widths({0.5, -1.0}, {0.0, 0.0}, {1.0, 1.0}, 1.0);
  const auto psi = g.coherent_wavefunction(l);
  CHECK(std::abs(g.norm(psi) - 1.0) < 1e-10);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    CHECK(std::abs(psi[k].imag()) <= 1e-15 * std::abs(psi[k]) + 1e-300);
    CHECK(psi[k].real() >= 0.0);
    if (std::abs(psi[k]) > std::abs(psi[peak])) peak = k;
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int k = 0; k < 10; ++k) {
    const auto a = CoherentLabel::from_widths({U(rng), U(rng)}, {U(rng), U(rng)}, {1.0, 1.0}, 1.0);
    const auto b = CoherentLabel::from_widths({U(rng), U(rng)}, {U(rng), U(rng)}, {1.0, 1.0}, 1.0);
    const cplx grid = g.overlap(g.coherent_wavefunction(a), g.coherent_wavefunction(b));
    CHECK(std::abs(grid - overlap_normalized(label_to_z(a, 1.0), label_to_z(b, 1.0))) < 1e-8);
  }
  CHECK(std::abs(exact_k_grid(g, l, l, 0.0) - 1.0) < 1e-10);
}

TEST_CASE("resolution and box gates") {
  auto free2 = make_system("free", {}, 1.0, {1.0, 1.0});
  const auto l = CoherentLabel::from_widths({0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, 1.0);
  GridEngine coarse(free2, box(10.0, 64));
  CHECK_THROWS_AS(coarse.coherent_wavefunction(l), ResolutionError);
  GridEngine small(free2, box(5.0, 128));
  CHECK_THROWS_AS(small.coherent_wavefunction(l), DomainError);
  GridSpec relaxed = box(5.0, 64);
  relaxed.enforce_resolution = false;
  GridEngine loose(free2, relaxed);
  CHECK_NOTHROW(loose.coherent_wavefunction(l));
  GridDiagnostics bad;
  bad.max_edge_density = 1e-3;
  CHECK_THROWS_AS(GridEngine::check(bad), DomainError);
}

TEST_CASE("free particle spreading matches the closed form") {
  auto free2 = make_system("free", {}, 1.0, {1.0, 1.0});
  GridEngine g(free2, box(12.0, 256));
  const auto li = CoherentLabel::from_widths({-0.5, 0.2}, {0.8, -0.3}, {1.0, 1.0}, 1.0);
  const auto lf = CoherentLabel::from_widths({0.4, 0.0}, {0.6, -0.1}, {1.0, 1.0}, 1.0);
  // Quadratic Hamiltonian: the second-order term is exact.
  Shooter sh(free2, li, lf);
  const PhaseVec zi = label_to_z(li, 1.0), zf = label_to_z(lf, 1.0);
  const double T = 1.0;
  const Root r = sh.refine_root(T, sh.affine_root());
  const cplx want = k2_contribution(r, zi, zf, 1.0);
  GridDiagnostics d;
  const auto K = g.sweep(li, lf, {0.0, T}, &d);
  CHECK(std::abs(K[1] - want) < 1e-8);
  CHECK(std::abs(K[0] - overlap_normalized(zf, zi)) < 1e-8);
  CHECK(d.max_norm_drift < 1e-10);
}

}

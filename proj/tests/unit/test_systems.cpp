#include <cmath>
#include <random>

#include "csprop/systems.hpp"
#include "doctest.h"

using namespace csprop;

namespace {

ComplexPhasePoint random_point(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> U(-scale, scale);
  ComplexPhasePoint x;
  x.u.resize(n);
  x.v.resize(n);
  for (int k = 0; k < n; ++k) {
    x.u[k] = cplx(U(rng), U(rng));
    x.v[k] = cplx(U(rng), U(rng));
  }
  return x;
}

ComplexPhasePoint point1(cplx u, cplx v) {
  ComplexPhasePoint x;
  x.u.resize(1);
  x.v.resize(1);
  x.u[0] = u;
  x.v[0] = v;
  return x;
}

}  // namespace

TEST_SUITE("systems") {

TEST_CASE("closed-form values") {
  auto h = make_system("harmonic", {{"omega", 1.0}}, 1.0, {1.0});
  CHECK(std::abs(h->H(point1(0.0, 0.0)) - 0.5) < 1e-15);
  const cplx u(0.3, -0.2), v(1.1, 0.4);
  CHECK(std::abs(h->H(point1(u, v)) - (u * v + 0.5)) < 1e-14);
  const auto d = h->derivatives(point1(u, v));
  CHECK(std::abs(d.Hv[0] - u) < 1e-14);
  CHECK(std::abs(d.Huv(0, 0) - 1.0) < 1e-14);

  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  CHECK(std::abs(q->H(point1(0.0, 0.0)) - 0.575) < 1e-14);
  CHECK(std::abs(q->derivatives(point1(0.0, 0.0)).Huv(0, 0) - 1.3) < 1e-14);
}

TEST_CASE("unknown systems and parameters are config errors") {
  CHECK_THROWS_AS(make_system("morse", {}, 1.0, {1.0}), ConfigError);
  CHECK_THROWS_AS(make_system("quartic", {{"C", 1.0}}, 1.0, {1.0}), ConfigError);
  CHECK_THROWS_AS(make_system("nelson", {}, 0.05, {0.2}), ConfigError);
}

TEST_CASE("derivatives agree with finite differences") {
  std::mt19937_64 rng(5);
  for (auto sys : {make_system("quartic", {{"B", 0.1}}, 1.0, {1.0}),
                   make_system("nelson", {}, 0.05, {0.2, 0.2})}) {
    const int n = sys->dof();
    for (int s = 0; s < 5; ++s) {
      const auto x = random_point(rng, n, 1.0);
      const auto d = sys->derivatives(x);
      const double h = 1e-6;
      for (int k = 0; k < n; ++k) {
        auto xp = x, xm = x;
        xp.u[k] += h;
        xm.u[k] -= h;
        const cplx fu = (sys->H(xp) - sys->H(xm)) / (2 * h);
        CHECK(std::abs(fu - d.Hu[k]) <= 1e-6 * std::max(1.0, std::abs(d.Hu[k])));
        // Holomorphy: the derivative along i h is i times the one along h.
        xp = x;
        xm = x;
        xp.u[k] += cplx(0, h);
        xm.u[k] -= cplx(0, h);
        const cplx fi = (sys->H(xp) - sys->H(xm)) / (2 * h);
        CHECK(std::abs(fi - cplx(0, 1) * d.Hu[k]) <= 1e-6 * std::max(1.0, std::abs(d.Hu[k])));
        xp = x;
        xm = x;
        xp.v[k] += h;
        xm.v[k] -= h;
        const cplx fv = (sys->H(xp) - sys->H(xm)) / (2 * h);
        CHECK(std::abs(fv - d.Hv[k]) <= 1e-6 * std::max(1.0, std::abs(d.Hv[k])));
        for (int j = 0; j < n; ++j) {
          const auto dp = sys->derivatives(xp), dm = sys->derivatives(xm);
          const cplx fuv = (dp.Hu[j] - dm.Hu[j]) / (2 * h);
          CHECK(std::abs(fuv - d.Huv(j, k)) <= 1e-6 * std::max(1.0, std::abs(d.Huv(j, k))));
        }
      }
    }
  }
}

TEST_CASE("real phase-space points give real energies") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  auto nel = make_system("nelson", {}, 0.05, {0.2, 0.2});
  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  FockOracle oracle(nel, 40);
  for (int s = 0; s < 10; ++s) {
    auto l = CoherentLabel::from_widths({U(rng), U(rng)}, {U(rng), U(rng)}, {0.2, 0.2}, 0.05);
    const auto x = real_point(l, 0.05);
    const cplx H = nel->H(x);
    CHECK(std::abs(H.imag()) < 1e-10 * std::max(1.0, std::abs(H)));
    // Classical value plus a width correction.
    double pos[2] = {l.q[0], l.q[1]};
    const double classical = 0.5 * (l.p[0] * l.p[0] + l.p[1] * l.p[1]) + nel->potential(pos);
    CHECK(std::abs(H.real() - classical) < 0.2);
    auto l1 = CoherentLabel::from_widths({U(rng)}, {U(rng)}, {1.0}, 1.0);
    CHECK(std::abs(q->H(real_point(l1, 1.0)).imag()) < 1e-10);
  }
  auto l = CoherentLabel::from_widths({0.5, 0.3}, {-0.4, 0.2}, {0.2, 0.2}, 0.05);
  const cplx o = oracle.evaluate(real_point(l, 0.05)).value;
  CHECK(std::abs(o.imag()) < 1e-9);
}

TEST_CASE("Fock oracle reproduces the closed forms") {
  auto h = make_system("harmonic", {}, 1.0, {1.0});
  std::mt19937_64 rng(7);
  for (int s = 0; s < 5; ++s) {
    const auto x = random_point(rng, 1, 1.4);
    CHECK(std::abs(fock_oracle(h, x, 40, 1e-6) - (x.u[0] * x.v[0] + 0.5)) < 1e-10);
  }
  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  const auto x = point1(cplx(0.3, 0.1), cplx(0.0, -0.2));
  CHECK(std::abs(fock_oracle(q, x, 60) - q->H(x)) < 1e-10);
  // Convergence in n_max.
  const auto far = point1(cplx(1.5, 0.5), cplx(-1.0, 1.2));
  FockOracle small(q, 10), big(q, 60);
  CHECK(std::abs(big.evaluate(far).value - q->H(far)) <
        std::abs(small.evaluate(far).value - q->H(far)));
  CHECK(std::abs(big.evaluate(far).value - q->H(far)) < 1e-9);
}

TEST_CASE("smoothed moments") {
  // <Q^2> for the vacuum with b = 1: s = 1/2.
  CHECK(std::abs(smoothed_moment(2, 0.0, 0.5) - 0.5) < 1e-15);
  CHECK(std::abs(smoothed_moment(4, 0.0, 0.5) - 0.75) < 1e-15);
  CHECK(std::abs(smoothed_moment(3, cplx(1.0, 1.0), 0.0) - std::pow(cplx(1.0, 1.0), 3)) < 1e-14);
}

}

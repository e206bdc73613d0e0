#include <cmath>

#include <Eigen/LU>

#include "csprop/dynamics.hpp"
#include "csprop/shooting.hpp"
#include "doctest.h"

using namespace csprop;

namespace {
PhaseVec one(cplx a) {
  PhaseVec v(1);
  v[0] = a;
  return v;
}
}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("harmonic flow in closed form") {
  auto h = make_system("harmonic", {}, 1.0, {1.0});
  const cplx u0(0.4, -0.3), v0(1.2, 0.7);
  const double T = 2.3;
  const auto r = integrate(*h, one(u0), one(v0), T);
  const cplx I(0, 1);
  CHECK(std::abs(r.uT[0] - u0 * std::exp(-I * T)) < 1e-9);
  CHECK(std::abs(r.vT[0] - v0 * std::exp(I * T)) < 1e-9);
  CHECK(std::abs(r.M(0, 0) - std::exp(-I * T)) < 1e-9);
  CHECK(std::abs(r.M(1, 1) - std::exp(I * T)) < 1e-9);
  CHECK(std::abs(r.M(0, 1)) < 1e-9);
  CHECK(std::abs(r.G - T / 2) < 1e-9);
  const TangentMat fd = tangent_fd_oracle(*h, one(u0), one(v0), T, 1e-4);
  CHECK((fd - r.M).norm() < 1e-8);
}

TEST_CASE("zero time is the identity") {
  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  const PhaseVec u0 = one({0.2, 0.1}), v0 = one({-0.5, 0.3});
  const auto r = integrate(*q, u0, v0, 0.0);
  CHECK((r.uT - u0).norm() == 0.0);
  CHECK((r.M - TangentMat::Identity(2, 2)).norm() == 0.0);
  CHECK(std::abs(r.G) == 0.0);
  const PhaseVec zi = one({0.1, 0.0}), zbf = one({0.3, -0.2});
  const cplx S = full_action(r, zi, zbf, 1.0);
  const cplx want = -cplx(0, 0.5) * (u0[0] * zbf[0] + zi[0] * v0[0]);
  CHECK(std::abs(S - want) < 1e-15);
  CHECK((tangent_fd_oracle(*q, u0, v0, 0.0, 1e-4) - TangentMat::Identity(2, 2)).norm() < 1e-8);
}

TEST_CASE("real quartic trajectory stays real") {
  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  const auto l = CoherentLabel::from_widths({0.0}, {-2.0}, {1.0}, 1.0);
  const auto x = real_point(l, 1.0);
  IntegrationOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  o.record_samples = true;
  const auto r = integrate(*q, x.u, x.v, 6.0, o);
  double worst = 0.0;
  for (const auto& s : r.samples) worst = std::max(worst, std::abs(s.v[0] - std::conj(s.u[0])));
  CHECK(worst < 1e-9);
  CHECK(r.energy_drift < 1e-9);
  CHECK(std::abs(r.M.determinant() - 1.0) < 1e-8);
}

TEST_CASE("variational tangent matches finite differences") {
  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  const PhaseVec u0 = one({0.3, -0.6}), v0 = one({0.5, 0.9});
  const auto r = integrate(*q, u0, v0, 1.0);
  const TangentMat fd = tangent_fd_oracle(*q, u0, v0, 1.0, 1e-5);
  CHECK((fd - r.M).norm() / r.M.norm() < 1e-5);

  auto n = make_system("nelson", {}, 0.05, {0.2, 0.2});
  const auto l = CoherentLabel::from_widths({0.72, 0.24}, {-0.75, -0.63}, {0.2, 0.2}, 0.05);
  auto x = real_point(l, 0.05);
  x.v[0] += cplx(0.1, 0.2);
  const auto rn = integrate(*n, x.u, x.v, 3.0);
  CHECK(std::abs(rn.M.determinant() - 1.0) < 1e-8);
  const TangentMat fdn = tangent_fd_oracle(*n, x.u, x.v, 3.0, 1e-5);
  CHECK((fdn - rn.M).norm() / rn.M.norm() < 1e-5);
}

TEST_CASE("escape to infinity is reported") {
  // Far from the real section the quartic flow reaches infinity in finite time.
  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  const auto out = try_integrate(*q, one({2.0, 2.0}), one({2.0, 2.0}), 50.0);
  CHECK_FALSE(out.ok());
  CHECK(out.stop_time < 50.0);
  CHECK_THROWS_AS(integrate(*q, one({2.0, 2.0}), one({2.0, 2.0}), 50.0), std::runtime_error);
}

TEST_CASE("action derivatives") {
  auto h = make_system("harmonic", {}, 1.0, {1.0});
  Shooter sh(h, CoherentLabel::from_widths({1.0}, {0.5}, {1.0}, 1.0),
             CoherentLabel::from_widths({-0.3}, {0.2}, {1.0}, 1.0));
  const Root r = sh.refine_root(1.7, sh.affine_root());
  const auto c = action_derivative_check(sh, r);
  CHECK_FALSE(c.skipped);
  CHECK(c.residual_final < 1e-6);
  CHECK(c.residual_initial < 1e-6);

  auto q = make_system("quartic", {{"B", 0.1}}, 1.0, {1.0});
  ShootingOptions so;
  so.caustic_threshold = 0.6;
  Shooter sq(q, CoherentLabel::from_widths({0.0}, {-2.0}, {1.0}, 1.0),
             CoherentLabel::from_widths({0.5}, {0.5}, {1.0}, 1.0), so);
  const Root r1 = sq.refine_root(0.06, sq.affine_root());
  const auto c1 = action_derivative_check(sq, r1);
  CHECK_FALSE(c1.skipped);
  CHECK(c1.residual_final < 1e-5);
}

}

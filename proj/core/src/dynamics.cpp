#include "csprop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace csprop {

namespace {

constexpr int kMaxState = 2 * kMaxDof + 2 + 4 * kMaxDof * kMaxDof;
using State = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxState, 1>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

class Flow {
 public:
  Flow(const SmoothedSystem& sys, bool tangent)
      : sys_(sys), n_(sys.dof()), tangent_(tangent), hbar_(sys.hbar()) {}

  int size() const { return tangent_ ? 2 * n_ + 2 + 4 * n_ * n_ : 2 * n_ + 1; }
  int s_index() const { return 2 * n_; }
  int g_index() const { return 2 * n_ + 1; }
  int m_index() const { return 2 * n_ + 2; }

  ComplexPhasePoint point(const State& y) const {
    ComplexPhasePoint x;
    x.u = y.segment(0, n_);
    x.v = y.segment(n_, n_);
    return x;
  }

  TangentMat tangent(const State& y) const {
    const int m = 2 * n_;
    TangentMat M(m, m);
    for (int col = 0; col < m; ++col)
      for (int row = 0; row < m; ++row) M(row, col) = y[m_index() + col * m + row];
    return M;
  }

  cplx mvv(const State& y) const {
    const TangentMat M = tangent(y);
    const DofMat vv = M.bottomRightCorner(n_, n_);
    return n_ == 1 ? vv(0, 0) : vv.determinant();
  }

  void rhs(const State& y, State& dy) const {
    const ComplexPhasePoint x = point(y);
    const SmoothedDerivs d = sys_.derivatives(x, tangent_);
    const cplx mi_h(0.0, -1.0 / hbar_);  // 1/(i hbar)
    dy.resize(size());
    const PhaseVec du = mi_h * d.Hv;
    const PhaseVec dv = -mi_h * d.Hu;
    dy.segment(0, n_) = du;
    dy.segment(n_, n_) = dv;
    const cplx ih2(0.0, 0.5 * hbar_);
    dy[s_index()] = ih2 * (du.transpose() * x.v - x.u.transpose() * dv).value() - d.H;
    if (!tangent_) return;
    dy[g_index()] = 0.5 * d.Huv.trace();
    const int m = 2 * n_;
    TangentMat A(m, m);
    A.topLeftCorner(n_, n_) = mi_h * d.Huv.transpose();
    A.topRightCorner(n_, n_) = mi_h * d.Hvv;
    A.bottomLeftCorner(n_, n_) = -mi_h * d.Huu;
    A.bottomRightCorner(n_, n_) = -mi_h * d.Huv;
    const TangentMat dM = A * tangent(y);
    for (int col = 0; col < m; ++col)
      for (int row = 0; row < m; ++row) dy[m_index() + col * m + row] = dM(row, col);
  }

  double uv_norm(const State& y) const {
    double r = 0.0;
    for (int i = 0; i < 2 * n_; ++i) r = std::max(r, std::abs(y[i]));
    return r;
  }

 private:
  const SmoothedSystem& sys_;
  int n_;
  bool tangent_;
  double hbar_;
};

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

DofMat TrajectoryResult::Muu() const { return M.topLeftCorner(dof(), dof()); }
DofMat TrajectoryResult::Muv() const { return M.topRightCorner(dof(), dof()); }
DofMat TrajectoryResult::Mvu() const { return M.bottomLeftCorner(dof(), dof()); }
DofMat TrajectoryResult::Mvv() const { return M.bottomRightCorner(dof(), dof()); }

cplx TrajectoryResult::mvv() const {
  const DofMat b = Mvv();
  return dof() == 1 ? b(0, 0) : b.determinant();
}

cplx TrajectoryResult::muv() const {
  const DofMat b = Muv();
  return dof() == 1 ? b(0, 0) : b.determinant();
}

IntegrationOutcome try_integrate(const SmoothedSystem& system, const PhaseVec& u0,
                                 const PhaseVec& v0, double T, const IntegrationOptions& opts) {
  if (T < 0.0) throw std::invalid_argument("integrate: T must be non-negative");
  const int n = system.dof();
  if (u0.size() != n || v0.size() != n)
    throw std::invalid_argument("integrate: initial point dimension mismatch");

  Flow flow(system, opts.tangent);
  State y = State::Zero(flow.size());
  y.segment(0, n) = u0;
  y.segment(n, n) = v0;
  if (opts.tangent)
    for (int k = 0; k < 2 * n; ++k) y[flow.m_index() + k * 2 * n + k] = 1.0;

  IntegrationOutcome out;
  TrajectoryResult& r = out.result;
  r.T = T;
  r.u0 = u0;
  r.v0 = v0;
  if (opts.record_samples) r.samples.push_back({0.0, u0, v0});
  const cplx H0 = system.H(flow.point(y));

  double t = 0.0;
  double h = std::min(opts.initial_step, T);
  double phase = 0.0;
  cplx mvv_prev = 1.0;
  State k1, k2, k3, k4, k5, k6, k7, ynew, tmp;
  if (T > 0.0) flow.rhs(y, k1);

  while (t < T) {
    if (r.steps >= opts.max_steps) {
      out.status = IntegrationStatus::stiff;
      out.stop_time = t;
      return out;
    }
    const bool last = t + h >= T * (1.0 - 1e-15);
    if (last) h = T - t;

    tmp = y + h * a21 * k1;
    flow.rhs(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    flow.rhs(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    flow.rhs(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    flow.rhs(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    flow.rhs(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    flow.rhs(ynew, k7);

    double err = 0.0;
    for (int i = 0; i < flow.size(); ++i) {
      const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);
      const double scale =
          opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / scale);
    }

    if (!std::isfinite(err)) {
      if (flow.uv_norm(y) > 1e-3 * opts.blowup || h < 1e-12 * std::max(1.0, T)) {
        out.status = IntegrationStatus::diverged;
        out.stop_time = t;
        return out;
      }
      h *= 0.25;
      continue;
    }

    if (err <= 1.0) {
      double dphi = 0.0;
      cplx mvv_new = mvv_prev;
      if (opts.tangent) {
        mvv_new = flow.mvv(ynew);
        dphi = wrap_angle(std::arg(mvv_new) - std::arg(mvv_prev));
      }
      if (std::abs(dphi) >= 0.5 * std::numbers::pi) {
        h *= 0.5;
        if (h < 1e-14 * std::max(1.0, T)) {
          out.status = IntegrationStatus::stiff;
          out.stop_time = t;
          return out;
        }
        continue;
      }
      t = last ? T : t + h;
      y = ynew;
      k1 = k7;
      phase += dphi;
      mvv_prev = mvv_new;
      ++r.steps;
      if (opts.record_samples) r.samples.push_back({t, y.segment(0, n), y.segment(n, n)});
      if (flow.uv_norm(y) > opts.blowup) {
        out.status = IntegrationStatus::diverged;
        out.stop_time = t;
        return out;
      }
    }
    const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    if (h < 1e-13 * std::max(1.0, T)) {
      out.status = flow.uv_norm(y) > 1e-2 * opts.blowup ? IntegrationStatus::diverged
                                                         : IntegrationStatus::stiff;
      out.stop_time = t;
      return out;
    }
  }

  r.uT = y.segment(0, n);
  r.vT = y.segment(n, n);
  r.action_integral = y[flow.s_index()];
  if (opts.tangent) {
    r.G = y[flow.g_index()];
    r.M = flow.tangent(y);
  } else {
    r.M = TangentMat::Identity(2 * n, 2 * n);
  }
  r.mvv_phase = phase;
  r.energy_drift = std::abs(system.H(flow.point(y)) - H0);
  return out;
}

TrajectoryResult integrate(const SmoothedSystem& system, const PhaseVec& u0, const PhaseVec& v0,
                           double T, const IntegrationOptions& opts) {
  IntegrationOutcome out = try_integrate(system, u0, v0, T, opts);
  switch (out.status) {
    case IntegrationStatus::diverged:
      throw DivergenceError("trajectory escaped to infinity at t = " +
                                std::to_string(out.stop_time),
                            out.stop_time);
    case IntegrationStatus::stiff:
      throw StiffnessError("step size underflow at t = " + std::to_string(out.stop_time));
    case IntegrationStatus::ok:
      break;
  }
  return std::move(out.result);
}

cplx full_action(const TrajectoryResult& traj, const PhaseVec& z_initial,
                 const PhaseVec& zbar_final, double hbar) {
  const cplx boundary =
      (traj.uT.transpose() * zbar_final).value() + (z_initial.transpose() * traj.v0).value();
  return traj.action_integral - cplx(0.0, 0.5 * hbar) * boundary;
}

TangentMat tangent_fd_oracle(const SmoothedSystem& system, const PhaseVec& u0,
                             const PhaseVec& v0, double T, double eps,
                             const IntegrationOptions& opts) {
  const int n = system.dof();
  IntegrationOptions o = opts;
  o.tangent = false;
  o.record_samples = false;
  TangentMat M(2 * n, 2 * n);
  for (int col = 0; col < 2 * n; ++col) {
    PhaseVec up = u0, um = u0, vp = v0, vm = v0;
    if (col < n) {
      up[col] += eps;
      um[col] -= eps;
    } else {
      vp[col - n] += eps;
      vm[col - n] -= eps;
    }
    const TrajectoryResult plus = integrate(system, up, vp, T, o);
    const TrajectoryResult minus = integrate(system, um, vm, T, o);
    for (int row = 0; row < n; ++row) {
      M(row, col) = (plus.uT[row] - minus.uT[row]) / (2.0 * eps);
      M(n + row, col) = (plus.vT[row] - minus.vT[row]) / (2.0 * eps);
    }
  }
  return M;
}

}  // namespace csprop

#pragma once

// Complex Hamilton equations
//   du/dt = (1/(i hbar)) dH/dv,   dv/dt = -(1/(i hbar)) dH/du
// integrated together with the tangent matrix M, the action integral and the
// G correction by an adaptive Dormand-Prince 5(4) scheme.

#include <stdexcept>
#include <vector>

#include "csprop/coherent.hpp"
#include "csprop/systems.hpp"

namespace csprop {

struct IntegrationOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  // ||(u, v)||_inf above this bound counts as escape to infinity.
  double blowup = 1e3;
  long max_steps = 1'000'000;
  double initial_step = 1e-2;
  // Integrate M, G and the unwound M_vv phase. Disabled for cheap map scans.
  bool tangent = true;
  bool record_samples = false;
};

struct TrajectorySample {
  double t;
  PhaseVec u;
  PhaseVec v;
};

struct TrajectoryResult {
  double T = 0.0;
  std::vector<TrajectorySample> samples;
  PhaseVec u0, v0;
  PhaseVec uT, vT;
  // Integral of (i hbar/2)(u' v - u v') - H over [0, T]; no boundary term.
  cplx action_integral = 0.0;
  // (1/2) integral of sum_k d2H/du_k dv_k.
  cplx G = 0.0;
  // Blocks [[M_uu, M_uv], [M_vu, M_vv]] mapping (du(0), dv(0)) to (du(T), dv(T)).
  TangentMat M;
  // Continuously unwound arg of M_vv (one dof) or det M_vv (two dof), 0 at t = 0.
  double mvv_phase = 0.0;
  double energy_drift = 0.0;
  long steps = 0;

  int dof() const { return static_cast<int>(u0.size()); }
  DofMat Muu() const;
  DofMat Muv() const;
  DofMat Mvu() const;
  DofMat Mvv() const;
  // M_vv for one dof, det M_vv for two.
  cplx mvv() const;
  // Same quantity for the M_uv block.
  cplx muv() const;
};

enum class IntegrationStatus { ok, diverged, stiff };

struct IntegrationOutcome {
  IntegrationStatus status = IntegrationStatus::ok;
  // Time at which the trajectory left the blow-up bound or the step underflowed.
  double stop_time = 0.0;
  TrajectoryResult result;

  bool ok() const { return status == IntegrationStatus::ok; }
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double escape_time)
      : std::runtime_error(what), escape_time_(escape_time) {}
  double escape_time() const { return escape_time_; }

 private:
  double escape_time_;
};

class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

IntegrationOutcome try_integrate(const SmoothedSystem& system, const PhaseVec& u0,
                                 const PhaseVec& v0, double T,
                                 const IntegrationOptions& opts = {});

// Throws DivergenceError or StiffnessError instead of returning a status.
TrajectoryResult integrate(const SmoothedSystem& system, const PhaseVec& u0, const PhaseVec& v0,
                           double T, const IntegrationOptions& opts = {});

// Full action including the boundary term -(i hbar/2)[u(T) zbar_final + z_initial v(0)].
cplx full_action(const TrajectoryResult& traj, const PhaseVec& z_initial,
                 const PhaseVec& zbar_final, double hbar);

// Tangent matrix from central differences of the endpoint under +-eps
// perturbations of each initial u_k and v_k.
TangentMat tangent_fd_oracle(const SmoothedSystem& system, const PhaseVec& u0,
                             const PhaseVec& v0, double T, double eps,
                             const IntegrationOptions& opts = {});

}  // namespace csprop

#pragma once

// Boundary-value trajectories with u(0) = z' and v(T) = conj(z'').
//
// Initial conditions are parametrized by one complex number per degree of
// freedom, Q_k(0) = q'_k + w_k and P_k(0) = p'_k + i (c_k/b_k) w_k, which keeps
// u(0) = z' for every w and moves v(0) = conj(z') + sqrt(2) w / b. The
// remaining condition v(T) = conj(z'') becomes a root-finding problem in w.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csprop/coherent.hpp"
#include "csprop/dynamics.hpp"
#include "csprop/systems.hpp"

namespace csprop {

struct ShootingOptions {
  IntegrationOptions integration{};
  // Looser tolerance used only for w-plane scans.
  double scan_rtol = 1e-8;
  double newton_tol = 1e-10;
  int newton_max_iter = 40;
  // |M_vv| (or |det M_vv|) below this flags caustic proximity.
  double caustic_threshold = 0.05;
  // Roots with |w| beyond this are recorded but left out of families.
  double w_cutoff = 3.0;
  // Largest accepted |w_{k+1} - w_k| between consecutive continuation steps.
  double continuation_jump = 0.35;
  // Tolerance on the real part of the normalized exponent for is_contributing.
  double contributing_tol = 1e-6;
  // A family is kept when, somewhere inside |w| < near_radius, it has a
  // contributing root with |k2| >= min_contribution. Families further out are
  // more complex trajectories whose contributions are negligible or cut off
  // by the Stokes phenomenon.
  double near_radius = 1.5;
  double min_contribution = 0.1;
  int threads = 1;
};

struct WGrid {
  double alpha_min = -3.0, alpha_max = 3.0;
  double beta_min = -3.0, beta_max = 3.0;
  int n_alpha = 201, n_beta = 201;

  double alpha(int i) const;
  double beta(int j) const;
};

// Real labels (Q'', P'') defined by v(T) = (Q''/b - i P''/c)/sqrt(2), sampled on a w grid.
struct WMap {
  double T = 0.0;
  WGrid grid;
  // Row-major in beta: index = j * n_alpha + i.
  std::vector<double> Qpp, Ppp;
  std::vector<bool> diverged;

  std::size_t index(int i, int j) const { return std::size_t(j) * grid.n_alpha + i; }
};

struct Root {
  PhaseVec w;
  double T = 0.0;
  TrajectoryResult trajectory;
  PhaseVec residual;  // v(T) - conj(z'')
  std::string family_id;
  bool contributing = true;
  double caustic_distance = 0.0;  // |M_vv| or |det M_vv|
  double exponent_re = 0.0;       // Re[i(S+G)/hbar] - (|z'|^2+|z''|^2)/2
  double magnitude = 0.0;         // |k2| = exp(exponent_re) / sqrt(caustic_distance)
  std::vector<double> newton_history;
  bool caustic_proximate = false;

  cplx action = 0.0;  // full action with boundary term
};

struct Family {
  std::string id;
  std::vector<Root> roots;  // T strictly increasing
  std::vector<double> gaps;  // T values where continuation failed
  bool truncated = false;
  // Largest |k2| among contributing roots inside the near radius, and the
  // first T where it reaches the selection threshold.
  double near_magnitude = 0.0;
  double first_significant_T = 0.0;

  const Root* at(double T, double tol = 1e-9) const;
};

struct CausticEvent {
  double T_star = 0.0;
  cplx w_star = 0.0;
  std::string family_a, family_b;
  // Minimum over T of sqrt(|M_vv|_a |M_vv|_b).
  double min_abs_mvv = 0.0;
  double min_w_distance = 0.0;
  double T_min_mvv = 0.0;       // T of the smallest |M_vv| along either family
  double T_min_distance = 0.0;  // T of the closest approach in w
};

class RootNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Shooter {
 public:
  Shooter(std::shared_ptr<const SmoothedSystem> system, CoherentLabel initial,
          CoherentLabel final_label, ShootingOptions opts = {});

  const SmoothedSystem& system() const { return *system_; }
  const ShootingOptions& options() const { return opts_; }
  const PhaseVec& z_initial() const { return z_initial_; }
  const PhaseVec& zbar_final() const { return zbar_final_; }
  const CoherentLabel& initial() const { return initial_; }
  const CoherentLabel& final_label() const { return final_; }

  PhaseVec v0_from_w(const PhaseVec& w) const;
  PhaseVec w_from_v0(const PhaseVec& v0) const;
  // d v(0) / d w_k, diagonal.
  PhaseVec dv0_dw() const;

  IntegrationOutcome shoot(const PhaseVec& w, double T, bool tangent) const;

  // T = 0 root of the linear problem.
  PhaseVec affine_root() const;

  // Scan of (Q'', P'') over the grid; one degree of freedom only.
  WMap scan_wplane(double T, const WGrid& grid) const;
  // Cells where both Q''-q'' and P''-p'' change sign.
  std::vector<cplx> seeds(const WMap& map) const;

  // Newton refinement of v(T) = conj(z''); throws RootNotFound.
  Root refine_root(double T, const PhaseVec& w_seed) const;
  std::optional<Root> try_refine_root(double T, const PhaseVec& w_seed) const;

  // Fills action, contribution diagnostics and caustic distance for a converged trajectory.
  void annotate(Root& root) const;

  // Predictor-corrector continuation along T_grid (monotone, either direction).
  Family continue_family(const Root& root0, const std::vector<double>& T_grid) const;

 private:
  std::shared_ptr<const SmoothedSystem> system_;
  CoherentLabel initial_, final_;
  ShootingOptions opts_;
  PhaseVec z_initial_, zbar_final_, z_final_, v_ref_;
};

struct ContributionCheck {
  bool contributing;
  double exponent_re;
};

ContributionCheck is_contributing(const Root& root, const PhaseVec& z_initial,
                                  const PhaseVec& z_final, double hbar, double tol = 1e-6);

// Makes mvv_phase continuous in T along the family. Integrating the phase in
// t jumps by 2 pi whenever M_vv(t) sweeps through zero at an intermediate time
// as T varies, while the contribution itself is analytic in T. The root
// nearest the w origin keeps its integrated phase and anchors the rest.
void unwrap_family_phase(Family& family);

// Smallest |M_vv| and closest approach between two families on their common
// T range, refined by golden-section search on the continued families.
std::optional<CausticEvent> locate_caustic(const Shooter& shooter, const Family& a,
                                           const Family& b, double threshold);

// Residuals of dS/dzbar'' = -i hbar u(T) and dS/dz' = -i hbar v(0), from
// central differences with re-solved boundary-value problems.
struct ActionDerivativeCheck {
  bool skipped = false;  // caustic proximity or re-solve failure
  std::string reason;
  double residual_final = 0.0;
  double residual_initial = 0.0;
};

ActionDerivativeCheck action_derivative_check(const Shooter& shooter, const Root& root,
                                              double eps = 1e-5);

// Solves u(0) = z_initial, v(T) = zbar_final for arbitrary complex boundary
// data starting from v(0) = v0_guess. Returns the trajectory or nullopt.
std::optional<TrajectoryResult> solve_boundary(const SmoothedSystem& system,
                                               const PhaseVec& z_initial,
                                               const PhaseVec& zbar_final, double T,
                                               const PhaseVec& v0_guess,
                                               const ShootingOptions& opts);

// Solves u(0) = z_initial, u(T) = z_end (dual boundary conditions).
std::optional<TrajectoryResult> solve_dual_boundary(const SmoothedSystem& system,
                                                    const PhaseVec& z_initial,
                                                    const PhaseVec& z_end, double T,
                                                    const PhaseVec& v0_guess,
                                                    const ShootingOptions& opts);

// Discovery of root families over a T range (one degree of freedom): scans
// at `scan_times`, refines every seed inside the w cutoff and continues it
// both ways along `T_grid`. Families passing the near-origin selection are
// labelled f1, f2, ... by the T at which they first become significant.
struct FamilySearch {
  std::vector<Family> families;
  // Continued families that failed the selection (labelled r1, r2, ...).
  std::vector<Family> rejected;
  // Roots found by scans outside the w cutoff (recorded, not continued).
  std::vector<Root> distant;
};

// Applies the near-origin selection to already continued families.
void select_families(std::vector<Family>& all, const ShootingOptions& opts,
                     std::vector<Family>& kept, std::vector<Family>& rejected);

FamilySearch discover_families(const Shooter& shooter, const std::vector<double>& T_grid,
                               const std::vector<double>& scan_times, const WGrid& grid);

// Any number of degrees of freedom: Newton from a lattice around w = 0 plus
// random starts, at each seed time. Roots inside the near radius whose |k2|
// reaches continue_fraction * min_contribution are continued along T_grid;
// the rest are recorded in `distant`.
struct SeedOptions {
  int lattice_per_axis = 3;  // per real coordinate of w; odd keeps w = 0
  double lattice_spacing = 0.3;
  int n_random = 40;
  double random_scale = 0.5;
  unsigned long long rng_seed = 1;
  double continue_fraction = 0.01;
};

FamilySearch discover_families_seeded(const Shooter& shooter, const std::vector<double>& T_grid,
                                      const std::vector<double>& seed_times,
                                      const SeedOptions& seeds = {});

}  // namespace csprop

#pragma once

// Semiclassical coherent-state propagator: second-order trajectory sums, the
// dual (Legendre-transformed) diagnostic and the uniform Airy formula for
// pairs of coalescing trajectories. Everything returned here is the
// normalized K unless the name says otherwise.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csprop/airy.hpp"
#include "csprop/coherent.hpp"
#include "csprop/dynamics.hpp"
#include "csprop/shooting.hpp"

namespace csprop {

class CausticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sqrt(1/M_vv) exp{i(S+G)/hbar - (|z'|^2+|z''|^2)/2}, the square root taken
// from the unwound phase of M_vv (det M_vv for two degrees of freedom).
cplx k2_contribution(const Root& root, const PhaseVec& z_initial, const PhaseVec& z_final,
                     double hbar);

// Sum over roots; non-contributing roots are skipped unless `include_all`.
cplx k2_sum(const std::vector<const Root*>& roots, const PhaseVec& z_initial,
            const PhaseVec& z_final, double hbar, bool include_all = false);

// Second-order dual propagator (Bargmann form) for a trajectory with
// u(0) = z' and u(T) = z: sqrt(1/M_uv) exp{i(S~ + G~)/hbar} with the Legendre
// transform S~ = S + i hbar z v(T).
struct DualK2 {
  cplx value;
  cplx action;  // S~
  cplx muv;     // M_uv or det M_uv
};
DualK2 dual_k2(const TrajectoryResult& traj, const PhaseVec& z_initial, double hbar);

// Ingredients of the uniform formula for the pair (1, 2).
struct UniformInputs {
  cplx S1, S2, G1, G2;
  cplx mvv1, mvv2;         // M_vv or det M_vv
  double phase1, phase2;   // unwound arguments of mvv1, mvv2
  cplx A;                  // i (S1 + S2) / (2 hbar)
  cplx B;                  // r^2
  cplx r;                  // sqrt(B), r^3 = 3i (S2 - S1) / (4 hbar)
  cplx sqrt_r;
  // arg(r^3) = theta; r = |r^3|^(1/3) exp(i theta/3), sqrt_r = ... exp(i theta/6).
  // theta = principal arg + 2 pi * branch, so branch mod 6 selects r and sqrt(r).
  int branch = 0;
  double theta = 0.0;
  bool near_coalescence = false;
  double hbar = 1.0;
};

UniformInputs uniform_inputs(const Root& r1, const Root& r2, double hbar, int branch);
// Branch whose theta is closest to `previous_theta`, for continuity along a sweep.
int continue_branch(const Root& r1, const Root& r2, double hbar, double previous_theta);

// Bargmann-form uniform value
//   i sqrt(pi) e^A [ (g2-g1)/r F_i'(B) + (g1+g2) F_i(B) ],
//   g1 = -i sqrt(r) M1^(-1/2) e^{iG1/hbar},  g2 = sqrt(r) M2^(-1/2) e^{iG2/hbar}.
// Where only the saddle of root 1 survives in the asymptotics of F_i this
// reduces to that root's second-order term; the global phase is fixed that way.
cplx uniform_k_bargmann(const UniformInputs& in, int contour);

// Normalized uniform propagator.
cplx uniform_k(const UniformInputs& in, int contour, const PhaseVec& z_initial,
               const PhaseVec& z_final);
cplx uniform_k(const Root& r1, const Root& r2, int contour, int branch,
               const PhaseVec& z_initial, const PhaseVec& z_final, double hbar);

// Joint choice of branch and contour reproducing the two-saddle sum.
struct AsymptoticMatch {
  int branch = 0;
  int contour = 1;
  double rel_error = 0.0;
};
AsymptoticMatch match_asymptotic(const Root& r1, const Root& r2, const PhaseVec& z_initial,
                                 const PhaseVec& z_final, double hbar);

// The unwound phases of two families are each fixed only up to 2 pi, which
// leaves the relative sign of their M_vv^(-1/2) open. At the pair's closest
// approach the uniform amplitude J(x) must stay smooth, i.e. (g2 - g1)/sqrt(B)
// must not dominate g1 + g2; if the opposite sign satisfies this better, every
// phase of `partner` is shifted by 2 pi. Returns true when it flipped.
// Pairs whose closest approach still has |B| > max_abs_B are left alone: the
// saddles never merge and the test carries no information there.
bool align_pair_phase(const Family& anchor, Family& partner, double hbar,
                      double max_abs_B = 1.0);

// Contour label on the principal branch of B equivalent to `contour` on the
// branch theta = principal arg + 2 pi * branch.
int principal_contour(int contour, int branch);

// Per-T result of a comparison sweep.
struct PropagatorSample {
  double T = 0.0;
  std::optional<cplx> K_exact;
  std::map<std::string, cplx> K2_by_family;
  cplx K2_total = 0.0;
  std::optional<cplx> K_uniform;
  // Uniform values for the active pair, indexed by principal-branch contour.
  std::array<cplx, 3> K_uniform_all{};
  std::string pair;  // "fA+fB" or empty
  int contour_used = 0;  // principal-branch label, 0 when no pair is active
  bool caustic_flag = false;
  bool contour_unresolved = false;
  bool coalescence_limit = false;
};

// Contour choice for the next sample from the accepted history.
struct ContourPolicy {
  // Candidates with |K_un| above bound * reference are rejected, where the
  // reference is the recent |K_exact| (or |K_uniform| without exact data).
  double bound = 1.5;
  int history = 5;
  // A jump larger than this fraction of the reference marks a contour as
  // discontinuous.
  double max_jump = 0.5;
  // 0 = automatic, otherwise a fixed contour.
  int manual = 0;
  // Sweep assembly only.
  int seed = 1;                 // contour at the first uniform sample
  double switch_penalty = 0.5;  // cost of changing the analytically continued contour
  // Hand over from pair (a, b) to (b, c) once b alone reproduces the
  // reference to this relative accuracy.
  double handoff_tol = 0.05;
  // Fixed sequence: contour c for T >= T_from (sorted by T_from). Overrides auto.
  std::vector<std::pair<double, int>> schedule;
};

struct ContourChoice {
  int contour = 1;
  bool unresolved = false;
};

// `candidate` holds the uniform values on contours 1..3 at the new T.
ContourChoice select_contour(const std::vector<PropagatorSample>& history,
                             const std::array<cplx, 3>& candidate, const ContourPolicy& policy,
                             std::optional<cplx> K_exact = std::nullopt);

struct PairSpec {
  std::string first, second;
};

struct SweepOptions {
  ContourPolicy policy;
  // Caustic flag when sqrt(|M_vv,1| |M_vv,2|) of the active pair is below this.
  double caustic_threshold = 0.05;
};

// Full comparison sweep over `T` (ascending). `exact` is empty or one entry per
// T. Pairs are used in order, handing over as described in ContourPolicy; the
// contour along each pair is chosen globally on the analytically continued
// branch (closeness to exact data where present, continuity and a switch
// penalty otherwise) and reported with its principal-branch label.
std::vector<PropagatorSample> propagator_sweep(std::vector<Family> families,
                                               const std::vector<PairSpec>& pairs,
                                               const std::vector<double>& T,
                                               const std::vector<std::optional<cplx>>& exact,
                                               const PhaseVec& z_initial, const PhaseVec& z_final,
                                               double hbar, const SweepOptions& opts = {});

// Applies align_pair_phase along the pair list (first member is the anchor).
void align_pair_phases(std::vector<Family>& families, const std::vector<PairSpec>& pairs,
                       double hbar);

}  // namespace csprop

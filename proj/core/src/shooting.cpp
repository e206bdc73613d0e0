#include "csprop/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/LU>

namespace csprop {

namespace {

const double kSqrt2 = std::sqrt(2.0);

enum class Block { vv, uv };

struct NewtonResult {
  TrajectoryResult traj;
  std::vector<double> history;
  bool converged = false;
};

// Newton iteration on v(0) for u(0) = z_initial and either v(T) = target
// (Jacobian M_vv) or u(T) = target (Jacobian M_uv).
NewtonResult newton_v0(const SmoothedSystem& sys, const PhaseVec& z_initial,
                       const PhaseVec& target, double T, PhaseVec v0, const ShootingOptions& opts,
                       Block block) {
  NewtonResult nr;
  const int n = sys.dof();
  auto residual_of = [&](const TrajectoryResult& tr) -> PhaseVec {
    return (block == Block::vv ? tr.vT : tr.uT) - target;
  };
  IntegrationOutcome cur = try_integrate(sys, z_initial, v0, T, opts.integration);
  if (!cur.ok()) return nr;
  PhaseVec F = residual_of(cur.result);
  double fnorm = F.norm();
  nr.history.push_back(fnorm);
  for (int it = 0; it < opts.newton_max_iter && fnorm >= opts.newton_tol; ++it) {
    const DofMat J = block == Block::vv ? cur.result.Mvv() : cur.result.Muv();
    Eigen::FullPivLU<DofMat> lu(J);
    if (!lu.isInvertible()) return nr;
    const PhaseVec step = -lu.solve(F);
    if (!step.allFinite()) return nr;
    bool accepted = false;
    double lambda = 1.0;
    for (int back = 0; back < 12; ++back, lambda *= 0.5) {
      const PhaseVec trial = v0 + lambda * step;
      IntegrationOutcome next = try_integrate(sys, z_initial, trial, T, opts.integration);
      if (!next.ok()) continue;
      const PhaseVec Fn = residual_of(next.result);
      const double nn = Fn.norm();
      if (nn < fnorm || nn < opts.newton_tol) {
        v0 = trial;
        cur = std::move(next);
        F = Fn;
        fnorm = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return nr;
    nr.history.push_back(fnorm);
  }
  if (fnorm < opts.newton_tol) {
    nr.converged = true;
    nr.traj = std::move(cur.result);
  }
  (void)n;
  return nr;
}

template <class Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, rows));
  if (threads == 1) {
    for (int j = 0; j < rows; ++j) fn(j);
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int j = t; j < rows; j += threads) fn(j);
    });
}

}  // namespace

double WGrid::alpha(int i) const {
  return n_alpha == 1 ? alpha_min : alpha_min + (alpha_max - alpha_min) * i / (n_alpha - 1);
}

double WGrid::beta(int j) const {
  return n_beta == 1 ? beta_min : beta_min + (beta_max - beta_min) * j / (n_beta - 1);
}

const Root* Family::at(double T, double tol) const {
  for (const auto& r : roots)
    if (std::abs(r.T - T) <= tol) return &r;
  return nullptr;
}

Shooter::Shooter(std::shared_ptr<const SmoothedSystem> system, CoherentLabel initial,
                 CoherentLabel final_label, ShootingOptions opts)
    : system_(std::move(system)),
      initial_(std::move(initial)),
      final_(std::move(final_label)),
      opts_(std::move(opts)) {
  const double hbar = system_->hbar();
  if (initial_.dof() != system_->dof() || final_.dof() != system_->dof())
    throw ConfigError("boundary labels do not match the system dimension");
  for (int k = 0; k < system_->dof(); ++k) {
    if (std::abs(initial_.b[k] - system_->b()[k]) > 1e-12 * system_->b()[k] ||
        std::abs(final_.b[k] - system_->b()[k]) > 1e-12 * system_->b()[k])
      throw ConfigError("boundary labels must share the system widths");
  }
  z_initial_ = label_to_z(initial_, hbar);
  z_final_ = label_to_z(final_, hbar);
  zbar_final_ = z_final_.conjugate();
  v_ref_ = z_initial_.conjugate();
}

PhaseVec Shooter::dv0_dw() const {
  PhaseVec d(system_->dof());
  for (int k = 0; k < d.size(); ++k) d[k] = kSqrt2 / system_->b()[k];
  return d;
}

PhaseVec Shooter::v0_from_w(const PhaseVec& w) const {
  return v_ref_ + dv0_dw().cwiseProduct(w);
}

PhaseVec Shooter::w_from_v0(const PhaseVec& v0) const {
  return (v0 - v_ref_).cwiseQuotient(dv0_dw());
}

IntegrationOutcome Shooter::shoot(const PhaseVec& w, double T, bool tangent) const {
  IntegrationOptions o = opts_.integration;
  o.tangent = tangent;
  return try_integrate(*system_, z_initial_, v0_from_w(w), T, o);
}

PhaseVec Shooter::affine_root() const { return w_from_v0(zbar_final_); }

WMap Shooter::scan_wplane(double T, const WGrid& grid) const {
  if (system_->dof() != 1) throw std::invalid_argument("w-plane scans need one degree of freedom");
  if (grid.n_alpha < 1 || grid.n_beta < 1) throw ConfigError("scan grid must be non-empty");
  WMap map;
  map.T = T;
  map.grid = grid;
  const std::size_t cells = std::size_t(grid.n_alpha) * grid.n_beta;
  map.Qpp.assign(cells, 0.0);
  map.Ppp.assign(cells, 0.0);
  std::vector<char> div(cells, 0);
  IntegrationOptions o = opts_.integration;
  o.tangent = false;
  o.rtol = opts_.scan_rtol;
  o.atol = std::min(o.atol, 1e-2 * opts_.scan_rtol);
  const double b = system_->b()[0], c = system_->c()[0];
  parallel_rows(grid.n_beta, opts_.threads, [&](int j) {
    for (int i = 0; i < grid.n_alpha; ++i) {
      PhaseVec w(1);
      w[0] = cplx(grid.alpha(i), grid.beta(j));
      const auto out = try_integrate(*system_, z_initial_, v0_from_w(w), T, o);
      const std::size_t idx = map.index(i, j);
      if (!out.ok()) {
        div[idx] = 1;
        map.Qpp[idx] = std::nan("");
        map.Ppp[idx] = std::nan("");
        continue;
      }
      const cplx vT = out.result.vT[0];
      map.Qpp[idx] = kSqrt2 * b * vT.real();
      map.Ppp[idx] = -kSqrt2 * c * vT.imag();
    }
  });
  map.diverged.assign(div.begin(), div.end());
  bool any = false;
  for (char d : div) any = any || !d;
  if (!any) throw ConfigError("every trajectory of the w-plane scan diverged");
  return map;
}

std::vector<cplx> Shooter::seeds(const WMap& map) const {
  std::vector<cplx> out;
  const auto& g = map.grid;
  const double qt = final_.q[0], pt = final_.p[0];
  for (int j = 0; j + 1 < g.n_beta; ++j) {
    for (int i = 0; i + 1 < g.n_alpha; ++i) {
      const std::size_t idx[4] = {map.index(i, j), map.index(i + 1, j), map.index(i, j + 1),
                                  map.index(i + 1, j + 1)};
      bool bad = false;
      double fmin = 1e300, fmax = -1e300, gmin = 1e300, gmax = -1e300;
      for (auto k : idx) {
        if (map.diverged[k]) {
          bad = true;
          break;
        }
        fmin = std::min(fmin, map.Qpp[k] - qt);
        fmax = std::max(fmax, map.Qpp[k] - qt);
        gmin = std::min(gmin, map.Ppp[k] - pt);
        gmax = std::max(gmax, map.Ppp[k] - pt);
      }
      if (bad) continue;
      if (fmin <= 0.0 && fmax >= 0.0 && gmin <= 0.0 && gmax >= 0.0)
        out.emplace_back(0.5 * (g.alpha(i) + g.alpha(i + 1)), 0.5 * (g.beta(j) + g.beta(j + 1)));
    }
  }
  return out;
}

void Shooter::annotate(Root& root) const {
  const double hbar = system_->hbar();
  root.action = full_action(root.trajectory, z_initial_, zbar_final_, hbar);
  root.residual = root.trajectory.vT - zbar_final_;
  root.caustic_distance = std::abs(root.trajectory.mvv());
  root.caustic_proximate = root.caustic_distance < opts_.caustic_threshold;
  const auto check = is_contributing(root, z_initial_, z_final_, hbar, opts_.contributing_tol);
  root.contributing = check.contributing;
  root.exponent_re = check.exponent_re;
  root.magnitude = root.caustic_distance > 0.0
                       ? std::exp(root.exponent_re) / std::sqrt(root.caustic_distance)
                       : std::numeric_limits<double>::infinity();
}

std::optional<Root> Shooter::try_refine_root(double T, const PhaseVec& w_seed) const {
  NewtonResult nr =
      newton_v0(*system_, z_initial_, zbar_final_, T, v0_from_w(w_seed), opts_, Block::vv);
  if (!nr.converged) return std::nullopt;
  Root root;
  root.T = T;
  root.w = w_from_v0(nr.traj.v0);
  root.trajectory = std::move(nr.traj);
  root.newton_history = std::move(nr.history);
  annotate(root);
  return root;
}

Root Shooter::refine_root(double T, const PhaseVec& w_seed) const {
  auto r = try_refine_root(T, w_seed);
  if (!r) throw RootNotFound("Newton refinement did not converge at T = " + std::to_string(T));
  return std::move(*r);
}

Family Shooter::continue_family(const Root& root0, const std::vector<double>& T_grid) const {
  Family fam;
  fam.id = root0.family_id;
  std::vector<Root> path{root0};
  int misses = 0;
  double t_prev = root0.T;
  for (double T : T_grid) {
    if (std::abs(T - root0.T) < 1e-12) continue;
    if ((T - root0.T) * (T_grid.back() - T_grid.front()) < 0.0) continue;  // wrong side
    // Sub-stepping from the last accepted root towards T.
    bool reached = false;
    double from = path.back().T;
    double step = T - from;
    int depth = 0;
    while (!reached && depth <= 6) {
      const double target = from + step;
      const Root& last = path.back();
      PhaseVec guess = last.w;
      if (path.size() >= 2) {
        const Root& prev = path[path.size() - 2];
        const double dt = last.T - prev.T;
        if (std::abs(dt) > 1e-14) guess = last.w + (last.w - prev.w) * ((target - last.T) / dt);
      }
      auto r = try_refine_root(target, guess);
      if (r && (r->w - last.w).norm() < opts_.continuation_jump &&
          (r->w - guess).norm() < 0.5 * opts_.continuation_jump + 1e-3) {
        r->family_id = fam.id;
        path.push_back(std::move(*r));
        from = target;
        if (std::abs(from - T) < 1e-12) reached = true;
        // enlarge again after success
        step = T - from;
      } else {
        step *= 0.5;
        ++depth;
      }
    }
    if (!reached) {
      fam.gaps.push_back(T);
      if (++misses >= 3) {
        fam.truncated = true;
        break;
      }
      continue;
    }
    misses = 0;
    (void)t_prev;
    t_prev = T;
    if (path.back().w.norm() > 3.0 * opts_.w_cutoff) {
      fam.truncated = true;
      break;
    }
  }
  // Keep only grid points plus the starting root.
  for (auto& r : path) {
    bool on_grid = std::abs(r.T - root0.T) < 1e-12;
    for (double T : T_grid) on_grid = on_grid || std::abs(r.T - T) < 1e-12;
    if (on_grid) fam.roots.push_back(std::move(r));
  }
  std::sort(fam.roots.begin(), fam.roots.end(),
            [](const Root& a, const Root& b) { return a.T < b.T; });
  std::sort(fam.gaps.begin(), fam.gaps.end());
  return fam;
}

ContributionCheck is_contributing(const Root& root, const PhaseVec& z_initial,
                                  const PhaseVec& z_final, double hbar, double tol) {
  const cplx S = full_action(root.trajectory, z_initial, z_final.conjugate(), hbar);
  const cplx e = cplx(0.0, 1.0 / hbar) * (S + root.trajectory.G);
  const double re = e.real() - 0.5 * (z_initial.squaredNorm() + z_final.squaredNorm());
  return {re <= tol, re};
}

std::optional<TrajectoryResult> solve_boundary(const SmoothedSystem& system,
                                               const PhaseVec& z_initial,
                                               const PhaseVec& zbar_final, double T,
                                               const PhaseVec& v0_guess,
                                               const ShootingOptions& opts) {
  NewtonResult nr = newton_v0(system, z_initial, zbar_final, T, v0_guess, opts, Block::vv);
  if (!nr.converged) return std::nullopt;
  return std::move(nr.traj);
}

std::optional<TrajectoryResult> solve_dual_boundary(const SmoothedSystem& system,
                                                    const PhaseVec& z_initial,
                                                    const PhaseVec& z_end, double T,
                                                    const PhaseVec& v0_guess,
                                                    const ShootingOptions& opts) {
  NewtonResult nr = newton_v0(system, z_initial, z_end, T, v0_guess, opts, Block::uv);
  if (!nr.converged) return std::nullopt;
  return std::move(nr.traj);
}

ActionDerivativeCheck action_derivative_check(const Shooter& shooter, const Root& root,
                                              double eps) {
  ActionDerivativeCheck out;
  if (root.caustic_proximate) {
    out.skipped = true;
    out.reason = "caustic proximity";
    return out;
  }
  const SmoothedSystem& sys = shooter.system();
  const double hbar = sys.hbar();
  const int n = sys.dof();
  const auto& opts = shooter.options();
  const PhaseVec& zi = shooter.z_initial();
  const PhaseVec& zf = shooter.zbar_final();
  const TrajectoryResult& tr = root.trajectory;

  double res_f = 0.0, res_i = 0.0;
  for (int k = 0; k < n; ++k) {
    PhaseVec zp = zf, zm = zf;
    zp[k] += eps;
    zm[k] -= eps;
    auto tp = solve_boundary(sys, zi, zp, root.T, tr.v0, opts);
    auto tm = solve_boundary(sys, zi, zm, root.T, tr.v0, opts);
    if (!tp || !tm) {
      out.skipped = true;
      out.reason = "boundary re-solve failed";
      return out;
    }
    const cplx d = (full_action(*tp, zi, zp, hbar) - full_action(*tm, zi, zm, hbar)) / (2.0 * eps);
    const cplx expect = cplx(0.0, -hbar) * tr.uT[k];
    res_f = std::max(res_f, std::abs(d - expect) / std::max(1.0, std::abs(expect)));

    PhaseVec ip = zi, im = zi;
    ip[k] += eps;
    im[k] -= eps;
    auto sp = solve_boundary(sys, ip, zf, root.T, tr.v0, opts);
    auto sm = solve_boundary(sys, im, zf, root.T, tr.v0, opts);
    if (!sp || !sm) {
      out.skipped = true;
      out.reason = "boundary re-solve failed";
      return out;
    }
    const cplx di = (full_action(*sp, ip, zf, hbar) - full_action(*sm, im, zf, hbar)) / (2.0 * eps);
    const cplx expect_i = cplx(0.0, -hbar) * tr.v0[k];
    res_i = std::max(res_i, std::abs(di - expect_i) / std::max(1.0, std::abs(expect_i)));
  }
  out.residual_final = res_f;
  out.residual_initial = res_i;
  return out;
}

std::optional<CausticEvent> locate_caustic(const Shooter& shooter, const Family& a,
                                           const Family& b, double threshold) {
  // Common grid points.
  std::vector<std::pair<const Root*, const Root*>> common;
  for (const auto& ra : a.roots)
    if (const Root* rb = b.at(ra.T)) common.emplace_back(&ra, rb);
  if (common.size() < 3) return std::nullopt;

  auto dist = [](const Root& x, const Root& y) { return (x.w - y.w).norm(); };
  // Both |M_vv| vanish where the pair coalesces; the geometric mean measures
  // the pair's distance from that point.
  auto mvv_min = [](const Root& x, const Root& y) {
    return std::sqrt(x.caustic_distance * y.caustic_distance);
  };

  std::size_t kd = 0, km = 0;
  for (std::size_t k = 0; k < common.size(); ++k) {
    if (dist(*common[k].first, *common[k].second) <
        dist(*common[kd].first, *common[kd].second))
      kd = k;
    if (mvv_min(*common[k].first, *common[k].second) <
        mvv_min(*common[km].first, *common[km].second))
      km = k;
  }

  // Golden-section refinement of a scalar function of T over [lo, hi], with
  // both roots re-solved from interpolated seeds.
  auto refine = [&](std::size_t k, bool by_distance, double& T_best, double& f_best,
                    cplx& w_best) {
    const std::size_t lo_i = k == 0 ? 0 : k - 1;
    const std::size_t hi_i = std::min(k + 1, common.size() - 1);
    double lo = common[lo_i].first->T, hi = common[hi_i].first->T;
    auto seed = [&](const Family& fam, double T) {
      const Root* r0 = nullptr;
      const Root* r1 = nullptr;
      for (const auto& r : fam.roots) {
        if (r.T <= T) r0 = &r;
        if (r.T >= T && !r1) r1 = &r;
      }
      if (!r0) return r1->w;
      if (!r1 || r1 == r0) return r0->w;
      const double s = (T - r0->T) / (r1->T - r0->T);
      return PhaseVec(r0->w + s * (r1->w - r0->w));
    };
    auto eval = [&](double T, cplx& wmid) -> double {
      auto ra = shooter.try_refine_root(T, seed(a, T));
      auto rb = shooter.try_refine_root(T, seed(b, T));
      if (!ra || !rb) return 1e300;
      wmid = 0.5 * (ra->w[0] + rb->w[0]);
      return by_distance ? (ra->w - rb->w).norm()
                         : std::sqrt(ra->caustic_distance * rb->caustic_distance);
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    cplx wc, wd;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = eval(c, wc), fd = eval(d, wd);
    for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        wd = wc;
        c = hi - gr * (hi - lo);
        fc = eval(c, wc);
      } else {
        lo = c;
        c = d;
        fc = fd;
        wc = wd;
        d = lo + gr * (hi - lo);
        fd = eval(d, wd);
      }
    }
    if (fc < fd) {
      T_best = c;
      f_best = fc;
      w_best = wc;
    } else {
      T_best = d;
      f_best = fd;
      w_best = wd;
    }
    // Fall back to the grid value when the refinement failed.
    const double grid_val = by_distance ? dist(*common[k].first, *common[k].second)
                                        : mvv_min(*common[k].first, *common[k].second);
    if (!(f_best <= grid_val)) {
      T_best = common[k].first->T;
      f_best = grid_val;
      w_best = 0.5 * (common[k].first->w[0] + common[k].second->w[0]);
    }
  };

  CausticEvent ev;
  ev.family_a = a.id;
  ev.family_b = b.id;
  cplx w_d, w_m;
  refine(kd, true, ev.T_min_distance, ev.min_w_distance, w_d);
  refine(km, false, ev.T_min_mvv, ev.min_abs_mvv, w_m);
  if (ev.min_abs_mvv >= threshold) return std::nullopt;
  ev.T_star = ev.T_min_distance;
  ev.w_star = w_d;
  return ev;
}

namespace {

// Continues `seed` both ways along T_grid into one family.
Family grow_family(const Shooter& shooter, const Root& seed, const std::vector<double>& T_grid) {
  std::vector<double> fwd, bwd;
  for (double t : T_grid) {
    if (t > seed.T + 1e-12) fwd.push_back(t);
    if (t < seed.T - 1e-12) bwd.push_back(t);
  }
  std::reverse(bwd.begin(), bwd.end());
  Family f1 = shooter.continue_family(seed, fwd);
  Family f0 = shooter.continue_family(seed, bwd);
  Family fam;
  for (auto& r : f0.roots)
    if (r.T < seed.T - 1e-12) fam.roots.push_back(std::move(r));
  for (auto& r : f1.roots) fam.roots.push_back(std::move(r));
  fam.gaps = f0.gaps;
  fam.gaps.insert(fam.gaps.end(), f1.gaps.begin(), f1.gaps.end());
  std::sort(fam.gaps.begin(), fam.gaps.end());
  fam.truncated = f0.truncated || f1.truncated;
  return fam;
}

bool on_family(const std::vector<Family>& fams, const Root& r) {
  for (const auto& f : fams)
    if (const Root* x = f.at(r.T))
      if ((x->w - r.w).norm() < 1e-5) return true;
  return false;
}

// Merges families that coincide on a common T, then applies the selection.
void finish_search(FamilySearch& out, const ShootingOptions& opts) {
  std::vector<Family> merged;
  for (auto& f : out.families) {
    bool absorbed = false;
    for (auto& m : merged) {
      bool same = false;
      for (const auto& r : f.roots)
        if (const Root* x = m.at(r.T))
          if ((x->w - r.w).norm() < 1e-5) same = true;
      if (!same) continue;
      for (auto& r : f.roots)
        if (!m.at(r.T)) m.roots.push_back(std::move(r));
      std::sort(m.roots.begin(), m.roots.end(),
                [](const Root& x, const Root& y) { return x.T < y.T; });
      absorbed = true;
      break;
    }
    if (!absorbed) merged.push_back(std::move(f));
  }
  std::vector<Family> kept, rejected;
  select_families(merged, opts, kept, rejected);
  out.families = std::move(kept);
  out.rejected = std::move(rejected);
}

double snap_to(const std::vector<double>& T_grid, double T) {
  double best = T_grid.front();
  for (double t : T_grid)
    if (std::abs(t - T) < std::abs(best - T)) best = t;
  return best;
}

}  // namespace

FamilySearch discover_families(const Shooter& shooter, const std::vector<double>& T_grid,
                               const std::vector<double>& scan_times, const WGrid& grid) {
  FamilySearch out;
  if (T_grid.empty()) return out;
  const double cutoff = shooter.options().w_cutoff;
  // The T = 0 problem is linear; its root seeds the first family.
  if (std::abs(T_grid.front()) < 1e-12) {
    if (auto r = shooter.try_refine_root(0.0, shooter.affine_root()))
      out.families.push_back(grow_family(shooter, *r, T_grid));
  }
  for (double Ts : scan_times) {
    const double T = snap_to(T_grid, Ts);
    const WMap map = shooter.scan_wplane(T, grid);
    std::vector<Root> roots;
    for (const cplx& s : shooter.seeds(map)) {
      PhaseVec w(1);
      w[0] = s;
      auto r = shooter.try_refine_root(T, w);
      if (!r) continue;
      bool dup = false;
      for (const auto& x : roots) dup = dup || (x.w - r->w).norm() < 1e-6;
      if (!dup) roots.push_back(std::move(*r));
    }
    std::sort(roots.begin(), roots.end(),
              [](const Root& x, const Root& y) { return x.w.norm() < y.w.norm(); });
    for (auto& r : roots) {
      if (r.w.norm() >= cutoff) {
        out.distant.push_back(std::move(r));
        continue;
      }
      if (!on_family(out.families, r)) out.families.push_back(grow_family(shooter, r, T_grid));
    }
  }
  finish_search(out, shooter.options());
  return out;
}

FamilySearch discover_families_seeded(const Shooter& shooter, const std::vector<double>& T_grid,
                                      const std::vector<double>& seed_times,
                                      const SeedOptions& seeds) {
  FamilySearch out;
  if (T_grid.empty()) return out;
  const int n = shooter.system().dof();
  const double cutoff = shooter.options().w_cutoff;

  // Lattice over the 2n real coordinates of w, centred on w = 0 (the
  // trajectory leaving from the real initial point), then random offsets.
  std::vector<PhaseVec> starts;
  const int L = std::max(1, seeds.lattice_per_axis);
  long cells = 1;
  for (int k = 0; k < 2 * n; ++k) cells *= L;
  for (long idx = 0; idx < cells; ++idx) {
    PhaseVec w(n);
    long rest = idx;
    std::vector<double> coord(2 * n);
    for (int k = 0; k < 2 * n; ++k) {
      coord[k] = (double(rest % L) - 0.5 * (L - 1)) * seeds.lattice_spacing;
      rest /= L;
    }
    for (int k = 0; k < n; ++k) w[k] = cplx(coord[2 * k], coord[2 * k + 1]);
    starts.push_back(w);
  }
  std::mt19937_64 rng(seeds.rng_seed);
  std::normal_distribution<double> gauss(0.0, seeds.random_scale);
  for (int j = 0; j < seeds.n_random; ++j) {
    PhaseVec w(n);
    for (int k = 0; k < n; ++k) {
      const double re = gauss(rng);
      w[k] = cplx(re, gauss(rng));
    }
    starts.push_back(w);
  }

  for (double Ts : seed_times) {
    const double T = snap_to(T_grid, Ts);
    std::vector<std::optional<Root>> found(starts.size());
    parallel_rows(int(starts.size()), shooter.options().threads,
                  [&](int j) { found[j] = shooter.try_refine_root(T, starts[j]); });
    std::vector<Root> roots;
    for (auto& r : found) {
      if (!r) continue;
      bool dup = false;
      for (const auto& x : roots) dup = dup || (x.w - r->w).norm() < 1e-6;
      if (!dup) roots.push_back(std::move(*r));
    }
    std::sort(roots.begin(), roots.end(),
              [](const Root& x, const Root& y) { return x.w.norm() < y.w.norm(); });
    for (auto& r : roots) {
      if (r.w.norm() >= cutoff) {
        out.distant.push_back(std::move(r));
        continue;
      }
      // Far-off or negligible roots are recorded without continuation.
      if (r.w.norm() >= shooter.options().near_radius ||
          r.magnitude < seeds.continue_fraction * shooter.options().min_contribution) {
        out.distant.push_back(std::move(r));
        continue;
      }
      if (!on_family(out.families, r)) out.families.push_back(grow_family(shooter, r, T_grid));
    }
  }
  finish_search(out, shooter.options());
  return out;
}

void unwrap_family_phase(Family& family) {
  auto& roots = family.roots;
  if (roots.size() < 2) return;
  std::size_t anchor = 0;
  for (std::size_t k = 1; k < roots.size(); ++k)
    if (roots[k].w.norm() < roots[anchor].w.norm()) anchor = k;
  const double two_pi = 2.0 * std::numbers::pi;
  auto fix = [&](std::size_t from, std::size_t to) {
    const double ref = roots[from].trajectory.mvv_phase;
    double& ph = roots[to].trajectory.mvv_phase;
    ph -= two_pi * std::round((ph - ref) / two_pi);
  };
  for (std::size_t k = anchor + 1; k < roots.size(); ++k) fix(k - 1, k);
  for (std::size_t k = anchor; k-- > 0;) fix(k + 1, k);
}

void select_families(std::vector<Family>& all, const ShootingOptions& opts,
                     std::vector<Family>& kept, std::vector<Family>& rejected) {
  for (auto& f : all) {
    f.near_magnitude = 0.0;
    f.first_significant_T = std::numeric_limits<double>::infinity();
    for (const auto& r : f.roots) {
      if (!r.contributing || r.w.norm() >= opts.near_radius) continue;
      f.near_magnitude = std::max(f.near_magnitude, r.magnitude);
      if (r.magnitude >= opts.min_contribution)
        f.first_significant_T = std::min(f.first_significant_T, r.T);
    }
    unwrap_family_phase(f);
    (f.near_magnitude >= opts.min_contribution ? kept : rejected).push_back(std::move(f));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Family& x, const Family& y) {
    return x.first_significant_T < y.first_significant_T;
  });
  auto label = [](std::vector<Family>& v, const char* prefix) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k].id = prefix + std::to_string(k + 1);
      for (auto& r : v[k].roots) r.family_id = v[k].id;
    }
  };
  label(kept, "f");
  label(rejected, "r");
}

}  // namespace csprop

#include "csprop/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace csprop {

namespace {

constexpr double kPi = std::numbers::pi;

// M^(-1/2) from the modulus and the unwound argument.
cplx inv_sqrt(cplx m, double phase) { return std::polar(1.0 / std::sqrt(std::abs(m)), -0.5 * phase); }

double norm_exponent(const PhaseVec& zi, const PhaseVec& zf) {
  return 0.5 * (zi.squaredNorm() + zf.squaredNorm());
}

}  // namespace

cplx k2_contribution(const Root& root, const PhaseVec& z_initial, const PhaseVec& z_final,
                     double hbar) {
  const cplx m = root.trajectory.mvv();
  if (m == 0.0)
    throw CausticError("M_vv vanishes at T = " + std::to_string(root.T) +
                       "; use the uniform formula");
  const cplx e = cplx(0.0, 1.0 / hbar) * (root.action + root.trajectory.G) -
                 norm_exponent(z_initial, z_final);
  return inv_sqrt(m, root.trajectory.mvv_phase) * std::exp(e);
}

cplx k2_sum(const std::vector<const Root*>& roots, const PhaseVec& z_initial,
            const PhaseVec& z_final, double hbar, bool include_all) {
  cplx s = 0.0;
  for (const Root* r : roots)
    if (include_all || r->contributing) s += k2_contribution(*r, z_initial, z_final, hbar);
  return s;
}

DualK2 dual_k2(const TrajectoryResult& traj, const PhaseVec& z_initial, double hbar) {
  const cplx muv = traj.muv();
  if (muv == 0.0) throw CausticError("M_uv vanishes: the dual representation is singular");
  // S~ = S + i hbar z v(T) with S carrying the boundary term for v(T) itself.
  const cplx S = full_action(traj, z_initial, traj.vT, hbar);
  const cplx St = S + cplx(0.0, hbar) * (traj.uT.transpose() * traj.vT).value();
  const cplx e = cplx(0.0, 1.0 / hbar) * (St + traj.G);
  return {std::exp(e) / std::sqrt(muv), St, muv};
}

UniformInputs uniform_inputs(const Root& r1, const Root& r2, double hbar, int branch) {
  UniformInputs in;
  in.S1 = r1.action;
  in.S2 = r2.action;
  in.G1 = r1.trajectory.G;
  in.G2 = r2.trajectory.G;
  in.mvv1 = r1.trajectory.mvv();
  in.mvv2 = r2.trajectory.mvv();
  in.phase1 = r1.trajectory.mvv_phase;
  in.phase2 = r2.trajectory.mvv_phase;
  in.A = cplx(0.0, 0.5 / hbar) * (in.S1 + in.S2);
  const cplx b32 = cplx(0.0, 0.75 / hbar) * (in.S2 - in.S1);
  in.branch = branch;
  in.hbar = hbar;
  in.theta = std::arg(b32) + 2.0 * kPi * branch;
  const double mod = std::abs(b32);
  in.r = std::polar(std::cbrt(mod), in.theta / 3.0);
  in.sqrt_r = std::polar(std::pow(mod, 1.0 / 6.0), in.theta / 6.0);
  in.B = in.r * in.r;
  in.near_coalescence = mod < 1e-12;
  return in;
}

int continue_branch(const Root& r1, const Root& r2, double hbar, double previous_theta) {
  const cplx b32 = cplx(0.0, 0.75 / hbar) * (r2.action - r1.action);
  return int(std::lround((previous_theta - std::arg(b32)) / (2.0 * kPi)));
}

cplx uniform_k_bargmann(const UniformInputs& in, int contour) {
  if (in.near_coalescence)
    throw CausticError("trajectories coalesce exactly; use the one-sided limit");
  const cplx I(0.0, 1.0);
  const cplx g1 = -I * in.sqrt_r * inv_sqrt(in.mvv1, in.phase1) * std::exp(I * in.G1 / in.hbar);
  const cplx g2 = in.sqrt_r * inv_sqrt(in.mvv2, in.phase2) * std::exp(I * in.G2 / in.hbar);
  const AiryPair F = airy_F(contour, in.B);
  return I * std::sqrt(kPi) * std::exp(in.A) *
         ((g2 - g1) / in.r * F.derivative + (g1 + g2) * F.value);
}

cplx uniform_k(const UniformInputs& in, int contour, const PhaseVec& z_initial,
               const PhaseVec& z_final) {
  UniformInputs shifted = in;
  shifted.A = in.A - norm_exponent(z_initial, z_final);
  return uniform_k_bargmann(shifted, contour);
}

cplx uniform_k(const Root& r1, const Root& r2, int contour, int branch,
               const PhaseVec& z_initial, const PhaseVec& z_final, double hbar) {
  return uniform_k(uniform_inputs(r1, r2, hbar, branch), contour, z_initial, z_final);
}

AsymptoticMatch match_asymptotic(const Root& r1, const Root& r2, const PhaseVec& z_initial,
                                 const PhaseVec& z_final, double hbar) {
  const cplx target = k2_contribution(r1, z_initial, z_final, hbar) +
                      k2_contribution(r2, z_initial, z_final, hbar);
  AsymptoticMatch best;
  best.rel_error = std::numeric_limits<double>::infinity();
  for (int branch = 0; branch < 6; ++branch) {
    const UniformInputs in = uniform_inputs(r1, r2, hbar, branch);
    for (int c = 1; c <= 3; ++c) {
      double err;
      try {
        err = std::abs(uniform_k(in, c, z_initial, z_final) - target) / std::abs(target);
      } catch (const AiryOverflow&) {
        continue;
      }
      if (err < best.rel_error) best = {branch, c, err};
    }
  }
  return best;
}

ContourChoice select_contour(const std::vector<PropagatorSample>& history,
                             const std::array<cplx, 3>& candidate, const ContourPolicy& policy,
                             std::optional<cplx> K_exact) {
  if (policy.manual >= 1 && policy.manual <= 3) return {policy.manual, false};
  if (history.empty()) return {1, false};
  const PropagatorSample& prev = history.back();
  const int prev_c = prev.contour_used >= 1 ? prev.contour_used : 1;

  // Reference magnitude: current exact value if known, else recent history.
  double ref = 0.0;
  if (K_exact) {
    ref = std::abs(*K_exact);
  } else {
    int n = 0;
    for (auto it = history.rbegin(); it != history.rend() && n < policy.history; ++it, ++n) {
      if (it->K_exact)
        ref = std::max(ref, std::abs(*it->K_exact));
      else if (it->K_uniform)
        ref = std::max(ref, std::abs(*it->K_uniform));
    }
  }
  const cplx last = prev.K_uniform ? *prev.K_uniform : prev.K2_total;

  int best = 0;
  double best_jump = std::numeric_limits<double>::infinity();
  for (int c = 1; c <= 3; ++c) {
    const cplx v = candidate[c - 1];
    if (!std::isfinite(std::abs(v))) continue;
    if (ref > 0.0 && std::abs(v) > policy.bound * ref) continue;
    const double jump = std::abs(v - last);
    // Ties keep the previous contour.
    if (jump < best_jump - 1e-15 * (1.0 + best_jump) ||
        (std::abs(jump - best_jump) <= 1e-15 * (1.0 + best_jump) && c == prev_c)) {
      best = c;
      best_jump = jump;
    }
  }
  if (best == 0) return {prev_c, true};
  const double scale = std::max(ref, std::abs(last));
  const bool unresolved = scale > 0.0 && best_jump > policy.max_jump * scale;
  return {best, unresolved};
}

int principal_contour(int contour, int branch) {
  // B picks up exp(4 pi i/3) = w_2 per branch; w_j w_2 = w_(j+1) cyclically.
  return ((contour - 1 + branch) % 3 + 3) % 3 + 1;
}

namespace {

// |g2 - g1| / |r| against |g1 + g2| with root 2's square root negated or not.
double fold_mismatch(const Root& a, const Root& b, double hbar, bool flip) {
  UniformInputs in = uniform_inputs(a, b, hbar, 0);
  const cplx I(0.0, 1.0);
  const cplx g1 = -I * inv_sqrt(in.mvv1, in.phase1) * std::exp(I * in.G1 / hbar);
  cplx g2 = inv_sqrt(in.mvv2, in.phase2) * std::exp(I * in.G2 / hbar);
  if (flip) g2 = -g2;
  return std::abs(g2 - g1) / std::abs(in.r) / std::abs(g1 + g2);
}

const Family* find_family(const std::vector<Family>& fs, const std::string& id) {
  for (const auto& f : fs)
    if (f.id == id) return &f;
  return nullptr;
}

}  // namespace

bool align_pair_phase(const Family& anchor, Family& partner, double hbar, double max_abs_B) {
  const Root* ra = nullptr;
  const Root* rb = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : partner.roots) {
    const Root* a = anchor.at(r.T);
    if (!a) continue;
    const double d = std::abs(r.action - a->action);
    if (d > 0.0 && d < best) {
      best = d;
      ra = a;
      rb = &r;
    }
  }
  if (!ra) return false;
  // Well separated saddles: the fold test says nothing, keep integrated phases.
  if (std::abs(uniform_inputs(*ra, *rb, hbar, 0).B) > max_abs_B) return false;
  if (fold_mismatch(*ra, *rb, hbar, true) >= fold_mismatch(*ra, *rb, hbar, false)) return false;
  for (auto& r : partner.roots) r.trajectory.mvv_phase += 2.0 * kPi;
  return true;
}

void align_pair_phases(std::vector<Family>& families, const std::vector<PairSpec>& pairs,
                       double hbar) {
  for (const auto& p : pairs) {
    const Family* a = find_family(families, p.first);
    Family* b = const_cast<Family*>(find_family(families, p.second));
    if (a && b) align_pair_phase(*a, *b, hbar);
  }
}

namespace {

// Uniform values of one pair along the sweep on the continued branch.
struct PairTrack {
  std::vector<bool> present;
  std::vector<bool> coalesce;
  std::vector<int> branch;                     // continued branch index
  std::vector<std::array<cplx, 3>> value;      // by continued contour
  std::vector<double> geo_mvv;
};

PairTrack track_pair(const Family& fa, const Family& fb, const std::vector<double>& T,
                     const PhaseVec& zi, const PhaseVec& zf, double hbar) {
  const std::size_t n = T.size();
  PairTrack tr{std::vector<bool>(n, false), std::vector<bool>(n, false), std::vector<int>(n, 0),
               std::vector<std::array<cplx, 3>>(n), std::vector<double>(n, 0.0)};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool have_prev = false;
  double prev_theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Root* a = fa.at(T[i]);
    const Root* b = fb.at(T[i]);
    if (!a || !b) {
      have_prev = false;
      continue;
    }
    tr.present[i] = true;
    // The starting branch (mod 6) fixes the overall sign; take it from the
    // two-saddle asymptotics, then follow theta continuously.
    const int br = have_prev ? continue_branch(*a, *b, hbar, prev_theta)
                             : match_asymptotic(*a, *b, zi, zf, hbar).branch;
    const UniformInputs in = uniform_inputs(*a, *b, hbar, br);
    tr.branch[i] = br;
    prev_theta = in.theta;
    have_prev = true;
    tr.geo_mvv[i] = std::sqrt(std::abs(in.mvv1) * std::abs(in.mvv2));
    for (int c = 1; c <= 3; ++c) {
      try {
        tr.value[i][c - 1] = uniform_k(in, c, zi, zf);
      } catch (const CausticError&) {
        tr.coalesce[i] = true;
        tr.value[i][c - 1] = cplx(nan, nan);
      } catch (const AiryOverflow&) {
        tr.value[i][c - 1] = cplx(nan, nan);
      }
    }
  }
  return tr;
}

int scheduled_contour(const ContourPolicy& pol, double T) {
  if (pol.manual >= 1 && pol.manual <= 3) return pol.manual;
  int c = 0;
  for (const auto& [from, contour] : pol.schedule)
    if (T >= from) c = contour;
  return c;
}

struct Segment {
  std::vector<int> state;  // continued contour 0..2 per index
  std::vector<bool> unresolved;
  double sign = 1.0;  // branch b or b + 3 (overall sign of the continued values)
  double cost = 0.0;
};

// Global contour choice on [s, e] (inclusive, pair present throughout).
Segment assemble_signed(const PairTrack& tr0, std::size_t s, std::size_t e,
                        const std::vector<std::optional<cplx>>& exact,
                        const std::vector<double>& T, const ContourPolicy& pol,
                        std::optional<cplx> last, bool seeded, int seed_label, double sign) {
  PairTrack tr = tr0;
  for (std::size_t i = s; i <= e; ++i)
    for (auto& v : tr.value[i]) v *= sign;
  const std::size_t m = e - s + 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 3>> cost(m);
  std::vector<std::array<int, 3>> back(m);
  Segment seg{std::vector<int>(m, 0), std::vector<bool>(m, false), sign, 0.0};

  auto ex = [&](std::size_t i) -> std::optional<cplx> {
    return exact.empty() ? std::nullopt : exact[i];
  };
  // Feasible states at index i; falls back to all finite ones if none is bounded.
  auto feasible = [&](std::size_t i, std::size_t k) {
    std::array<bool, 3> ok{};
    bool any = false;
    for (int j = 0; j < 3; ++j) {
      const cplx v = tr.value[i][j];
      ok[j] = std::isfinite(v.real()) && std::isfinite(v.imag());
      if (ok[j] && ex(i) && std::abs(v) > pol.bound * std::abs(*ex(i))) ok[j] = false;
      any = any || ok[j];
    }
    if (!any) {
      seg.unresolved[k] = true;
      for (int j = 0; j < 3; ++j)
        ok[j] = std::isfinite(tr.value[i][j].real()) && std::isfinite(tr.value[i][j].imag());
    }
    const int forced = scheduled_contour(pol, T[i]);
    if (forced)
      for (int j = 0; j < 3; ++j) ok[j] = principal_contour(j + 1, tr.branch[i]) == forced;
    return ok;
  };
  auto node = [&](std::size_t i, int j) {
    return ex(i) ? std::abs(tr.value[i][j] - *ex(i)) / std::abs(*ex(i)) : 0.0;
  };
  auto scale = [&](std::size_t i, cplx prev) {
    const double r = ex(i) ? std::abs(*ex(i)) : std::abs(prev);
    return r > 0.0 ? r : 1.0;
  };

  {
    const auto ok = feasible(s, 0);
    for (int j = 0; j < 3; ++j) {
      cost[0][j] = inf;
      if (!ok[j]) continue;
      if (seeded && principal_contour(j + 1, tr.branch[s]) != seed_label &&
          !scheduled_contour(pol, T[s]))
        continue;
      cost[0][j] = node(s, j);
      if (last) cost[0][j] += std::abs(tr.value[s][j] - *last) / scale(s, *last);
    }
    // A seed contour that is not feasible must not leave the segment empty.
    if (std::all_of(cost[0].begin(), cost[0].end(), [](double c) { return std::isinf(c); }))
      for (int j = 0; j < 3; ++j)
        if (ok[j]) cost[0][j] = node(s, j);
  }
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t i = s + k;
    const auto ok = feasible(i, k);
    for (int j = 0; j < 3; ++j) {
      cost[k][j] = inf;
      back[k][j] = 0;
      if (!ok[j]) continue;
      for (int jp = 0; jp < 3; ++jp) {
        if (std::isinf(cost[k - 1][jp])) continue;
        const cplx prev = tr.value[i - 1][jp];
        const double c = cost[k - 1][jp] + std::abs(tr.value[i][j] - prev) / scale(i, prev) +
                         (j != jp ? pol.switch_penalty : 0.0);
        if (c < cost[k][j]) {
          cost[k][j] = c;
          back[k][j] = jp;
        }
      }
      if (!std::isinf(cost[k][j])) cost[k][j] += node(i, j);
    }
    if (std::all_of(cost[k].begin(), cost[k].end(), [](double c) { return std::isinf(c); })) {
      // Nothing reachable: restart the path here.
      seg.unresolved[k] = true;
      for (int j = 0; j < 3; ++j) {
        back[k][j] = -1;
        cost[k][j] = ok[j] ? node(i, j) : inf;
      }
    }
  }
  int j = int(std::min_element(cost[m - 1].begin(), cost[m - 1].end()) - cost[m - 1].begin());
  seg.cost = cost[m - 1][j];
  for (std::size_t k = m; k-- > 0;) {
    seg.state[k] = j;
    if (k == 0) break;
    const int b = back[k][j];
    if (b < 0) {
      j = int(std::min_element(cost[k - 1].begin(), cost[k - 1].end()) - cost[k - 1].begin());
    } else {
      j = b;
    }
  }
  // Large jumps along the chosen path are reported as unresolved.
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t i = s + k;
    const cplx prev = tr.value[i - 1][seg.state[k - 1]];
    if (std::abs(tr.value[i][seg.state[k]] - prev) > pol.max_jump * scale(i, prev))
      seg.unresolved[k] = true;
  }
  return seg;
}

// The asymptotic match that fixes the starting branch cannot see an
// exponentially small partner, so both overall signs are tried and the
// cheaper assembly wins.
Segment assemble(const PairTrack& tr, std::size_t s, std::size_t e,
                 const std::vector<std::optional<cplx>>& exact, const std::vector<double>& T,
                 const ContourPolicy& pol, std::optional<cplx> last, bool seeded, int seed_label) {
  Segment a = assemble_signed(tr, s, e, exact, T, pol, last, seeded, seed_label, 1.0);
  Segment b = assemble_signed(tr, s, e, exact, T, pol, last, seeded, seed_label, -1.0);
  return b.cost < a.cost ? b : a;
}

}  // namespace

std::vector<PropagatorSample> propagator_sweep(std::vector<Family> families,
                                               const std::vector<PairSpec>& pairs,
                                               const std::vector<double>& T,
                                               const std::vector<std::optional<cplx>>& exact,
                                               const PhaseVec& z_initial, const PhaseVec& z_final,
                                               double hbar, const SweepOptions& opts) {
  if (!exact.empty() && exact.size() != T.size())
    throw std::invalid_argument("exact values must match the T grid");
  for (const auto& p : pairs)
    if (!find_family(families, p.first) || !find_family(families, p.second))
      throw std::invalid_argument("unknown family in pair " + p.first + "+" + p.second);
  align_pair_phases(families, pairs, hbar);

  const std::size_t n = T.size();
  std::vector<PropagatorSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& smp = out[i];
    smp.T = T[i];
    if (!exact.empty()) smp.K_exact = exact[i];
    for (const auto& f : families) {
      const Root* r = f.at(T[i]);
      if (!r || !r->contributing) continue;
      const cplx k = k2_contribution(*r, z_initial, z_final, hbar);
      smp.K2_by_family[f.id] = k;
      smp.K2_total += k;
    }
  }

  std::vector<PairTrack> tracks;
  for (const auto& p : pairs)
    tracks.push_back(track_pair(*find_family(families, p.first), *find_family(families, p.second),
                                T, z_initial, z_final, hbar));

  std::optional<cplx> last;
  std::size_t start = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const PairTrack& tr = tracks[p];
    std::size_t s = start;
    while (s < n && !tr.present[s]) ++s;
    if (s >= n) continue;
    std::size_t e = s;
    while (e + 1 < n && tr.present[e + 1]) ++e;

    // The first pair is seeded with the policy contour and anchored to the
    // second-order sum; later pairs continue from the last accepted value.
    const bool seeded = !last;
    std::optional<cplx> anchor = last;
    if (!anchor && std::abs(out[s].K2_total) > 0.0) anchor = out[s].K2_total;
    Segment seg = assemble(tr, s, e, exact, T, opts.policy, anchor, seeded, opts.policy.seed);
    // Hand-over to the next pair once the shared family suffices alone.
    std::size_t stop = e;
    if (p + 1 < pairs.size()) {
      const auto& q = pairs[p + 1];
      const std::string shared = (q.first == pairs[p].first || q.first == pairs[p].second)
                                     ? q.first
                                     : ((q.second == pairs[p].first || q.second == pairs[p].second)
                                            ? q.second
                                            : std::string());
      if (!shared.empty()) {
        for (std::size_t i = s + 1; i <= e; ++i) {
          if (!tracks[p + 1].present[i]) continue;
          auto it = out[i].K2_by_family.find(shared);
          if (it == out[i].K2_by_family.end()) continue;
          const cplx ref = (!exact.empty() && exact[i])
                               ? *exact[i]
                               : seg.sign * tr.value[i][seg.state[i - s]];
          if (std::abs(it->second - ref) < opts.policy.handoff_tol * std::abs(ref)) {
            stop = i - 1;
            break;
          }
        }
        if (stop < e)
          seg = assemble(tr, s, stop, exact, T, opts.policy, anchor, seeded, opts.policy.seed);
      }
    }
    const std::string label = pairs[p].first + "+" + pairs[p].second;
    for (std::size_t i = s; i <= stop; ++i) {
      auto& smp = out[i];
      const int j = seg.state[i - s];
      smp.pair = label;
      smp.K_uniform = seg.sign * tr.value[i][j];
      for (int c = 0; c < 3; ++c)
        smp.K_uniform_all[principal_contour(c + 1, tr.branch[i]) - 1] = seg.sign * tr.value[i][c];
      smp.contour_used = principal_contour(j + 1, tr.branch[i]);
      smp.contour_unresolved = seg.unresolved[i - s];
      smp.caustic_flag = tr.geo_mvv[i] < opts.caustic_threshold;
      smp.coalescence_limit = tr.coalesce[i];
    }
    // Exact coalescence: one-sided limit from the neighbouring samples.
    for (std::size_t i = s; i <= stop; ++i) {
      if (!tr.coalesce[i]) continue;
      cplx acc = 0.0;
      int cnt = 0;
      for (std::size_t k : {i - 1, i + 1}) {
        if (k < s || k > stop || tr.coalesce[k]) continue;
        acc += *out[k].K_uniform;
        ++cnt;
      }
      if (cnt) out[i].K_uniform = acc / double(cnt);
      else out[i].K_uniform.reset();
    }
    last = out[stop].K_uniform;
    start = stop + 1;
    if (start >= n) break;
  }
  return out;
}

}  // namespace csprop

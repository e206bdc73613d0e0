#include "csprop/experiments.hpp"

#include <cmath>

namespace csprop {

std::shared_ptr<const PolynomialSystem> ExperimentSetup::make() const {
  return make_system(system_name, params, hbar, b);
}

std::vector<double> ExperimentSetup::T_grid() const {
  std::vector<double> T;
  const long n = std::lround((T_max - T_min) / T_step);
  for (long k = 0; k <= n; ++k) T.push_back(T_min + T_step * double(k));
  return T;
}

void ExperimentSetup::validate() const {
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (b.empty() || int(b.size()) > kMaxDof) throw ConfigError("b must have 1 or 2 entries");
  initial.validate(hbar);
  final_label.validate(hbar);
  if (initial.dof() != int(b.size()) || final_label.dof() != int(b.size()))
    throw ConfigError("label dimension does not match b");
  for (std::size_t k = 0; k < b.size(); ++k)
    if (std::abs(initial.b[k] - b[k]) > 1e-12 * b[k] ||
        std::abs(final_label.b[k] - b[k]) > 1e-12 * b[k])
      throw ConfigError("label widths must equal the system widths");
  if (!(T_step > 0.0) || !(T_max >= T_min) || T_min < 0.0)
    throw ConfigError("T range needs 0 <= min <= max and step > 0");
  if (std::abs((T_max - T_min) / T_step - std::round((T_max - T_min) / T_step)) > 1e-6)
    throw ConfigError("T range must be a whole number of steps");
  if (b.size() == 1 && n_max < 10) throw ConfigError("n_max must be at least 10");
  if (b.size() == 2) {
    if (grid.lo.size() != 2 || grid.hi.size() != 2 || grid.points.size() != 2)
      throw ConfigError("grid needs lo, hi and points for both axes");
    for (int k = 0; k < 2; ++k)
      if (!(grid.hi[k] > grid.lo[k]) || grid.points[k] < 2)
        throw ConfigError("grid box is empty");
    if (!(grid.dt > 0.0)) throw ConfigError("grid dt must be positive");
  }
  for (const auto& p : pairs)
    if (p.first.empty() || p.second.empty() || p.first == p.second)
      throw ConfigError("pairs need two distinct family ids");
  const int m = sweep.policy.manual;
  if (m < 0 || m > 3) throw ConfigError("contour must be auto, 1, 2 or 3");
  (void)make();  // unknown system or parameters
}

ExperimentSetup quartic_setup() {
  ExperimentSetup s;
  s.system_name = "quartic";
  s.params = {{"B", 0.1}, {"omega", 1.0}};
  s.hbar = 1.0;
  s.b = {1.0};
  s.initial = CoherentLabel::from_widths({0.0}, {-2.0}, {1.0}, 1.0);
  s.final_label = CoherentLabel::from_widths({0.5}, {0.5}, {1.0}, 1.0);
  s.T_min = 0.0;
  s.T_max = 6.0;
  s.T_step = 0.02;
  s.shooting.caustic_threshold = 0.6;
  s.scan_times = {0.06, 0.24, 0.7, 1.02, 1.5, 2.2, 2.7, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
  s.wgrid.n_alpha = 121;
  s.wgrid.n_beta = 121;
  s.pairs = {{"f1", "f2"}, {"f2", "f3"}};
  s.sweep.caustic_threshold = 0.6;
  s.n_max = 120;
  return s;
}

ExperimentSetup nelson_setup(bool smoke) {
  ExperimentSetup s;
  s.system_name = "nelson";
  s.params = {{"mu", 0.05}};
  s.hbar = 0.05;
  s.b = {0.2, 0.2};
  s.initial = CoherentLabel::from_widths({0.72, 0.24}, {-0.75, -0.63}, {0.2, 0.2}, 0.05);
  s.final_label = s.initial;
  s.T_min = 6.0;
  s.T_max = 8.5;
  s.T_step = 0.02;
  // |K| is ~1e-5 here and w is measured in units where b = 0.2.
  s.shooting.near_radius = 0.6;
  s.shooting.min_contribution = 2e-6;
  s.seed_times = {6.0, 7.0, 7.4, 8.0, 8.5};
  s.pairs = {{"f1", "f2"}};
  if (smoke) {
    s.grid.lo = {-3.5, -2.0};
    s.grid.hi = {3.5, 6.0};
    s.grid.points = {128, 128};
    s.grid.enforce_resolution = false;
  } else {
    s.grid.lo = {-5.0, -2.5};
    s.grid.hi = {5.0, 11.0};
    s.grid.points = {432, 576};
  }
  s.grid.dt = 5e-4;
  return s;
}

ExperimentSetup harmonic_setup() {
  ExperimentSetup s;
  s.system_name = "harmonic";
  s.params = {{"omega", 1.0}};
  s.hbar = 1.0;
  s.b = {1.0};
  s.initial = CoherentLabel::from_widths({1.0}, {0.5}, {1.0}, 1.0);
  s.final_label = CoherentLabel::from_widths({0.3}, {-0.7}, {1.0}, 1.0);
  s.T_min = 0.0;
  s.T_max = 10.0;
  s.T_step = 0.1;
  s.scan_times = {1.0};
  s.wgrid.n_alpha = 41;
  s.wgrid.n_beta = 41;
  s.n_max = 60;
  return s;
}

ExactCurve exact_curve(const ExperimentSetup& setup, const std::vector<double>& T) {
  ExactCurve out;
  out.T = T;
  auto sys = setup.make();
  if (setup.b.size() == 1) {
    FockEngine1D engine(sys, setup.n_max);
    const PhaseVec zi = label_to_z(setup.initial, setup.hbar);
    const PhaseVec zf = label_to_z(setup.final_label, setup.hbar);
    engine.require_converged(zi, zf);
    out.K = engine.propagate(zi, zf, T);
  } else {
    GridEngine engine(sys, setup.grid);
    out.K = engine.sweep(setup.initial, setup.final_label, T, &out.grid);
    if (setup.grid.enforce_resolution) {
      GridEngine::check(out.grid);
      out.grid_checked = true;
    }
  }
  return out;
}

FamilySearch find_families(const ExperimentSetup& setup) {
  Shooter shooter(setup.make(), setup.initial, setup.final_label, setup.shooting);
  const auto T = setup.T_grid();
  if (setup.b.size() == 1) return discover_families(shooter, T, setup.scan_times, setup.wgrid);
  return discover_families_seeded(shooter, T, setup.seed_times, setup.seeds);
}

ComparisonRun run_comparison(const ExperimentSetup& setup) {
  ComparisonRun run;
  const auto T = setup.T_grid();
  Shooter shooter(setup.make(), setup.initial, setup.final_label, setup.shooting);
  run.search = setup.b.size() == 1
                   ? discover_families(shooter, T, setup.scan_times, setup.wgrid)
                   : discover_families_seeded(shooter, T, setup.seed_times, setup.seeds);
  run.exact = exact_curve(setup, T);
  std::vector<PairSpec> pairs;
  for (const auto& p : setup.pairs) {
    const Family* a = nullptr;
    const Family* b = nullptr;
    for (const auto& f : run.search.families) {
      if (f.id == p.first) a = &f;
      if (f.id == p.second) b = &f;
    }
    if (!a || !b) {
      run.missing_pairs.push_back(p);
      continue;
    }
    pairs.push_back(p);
    if (auto ev = locate_caustic(shooter, *a, *b, setup.sweep.caustic_threshold))
      run.caustics.push_back(*ev);
  }
  std::vector<std::optional<cplx>> exact(run.exact.K.begin(), run.exact.K.end());
  const PhaseVec zi = label_to_z(setup.initial, setup.hbar);
  const PhaseVec zf = label_to_z(setup.final_label, setup.hbar);
  run.samples = propagator_sweep(run.search.families, pairs, T, exact, zi, zf, setup.hbar,
                                 setup.sweep);
  return run;
}

}  // namespace csprop

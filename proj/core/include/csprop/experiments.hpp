#pragma once

// Complete experiment descriptions (system, labels, grids, search and sweep
// settings) and the pipelines that run them: exact curve, family search,
// caustic location and the full comparison sweep. The bundled presets are the
// quartic oscillator, the Nelson potential and the harmonic oscillator.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csprop/propagator.hpp"
#include "csprop/reference.hpp"
#include "csprop/shooting.hpp"
#include "csprop/systems.hpp"

namespace csprop {

struct ExperimentSetup {
  std::string system_name;
  std::map<std::string, double> params;
  double hbar = 1.0;
  std::vector<double> b;
  CoherentLabel initial, final_label;

  // Sweep grid.
  double T_min = 0.0, T_max = 1.0, T_step = 0.02;

  ShootingOptions shooting;
  // One degree of freedom: w-plane scans at these times.
  std::vector<double> scan_times;
  WGrid wgrid;
  // Several degrees of freedom: seeded Newton at these times.
  std::vector<double> seed_times;
  SeedOptions seeds;

  std::vector<PairSpec> pairs;
  SweepOptions sweep;

  // Exact engine: Fock basis for one degree of freedom, grid otherwise.
  int n_max = 120;
  GridSpec grid;

  std::shared_ptr<const PolynomialSystem> make() const;
  std::vector<double> T_grid() const;
  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

ExperimentSetup quartic_setup();
// `smoke` selects the coarse 128^2 reference grid.
ExperimentSetup nelson_setup(bool smoke = false);
ExperimentSetup harmonic_setup();

struct ExactCurve {
  std::vector<double> T;
  std::vector<cplx> K;
  GridDiagnostics grid;  // grid engine only
  bool grid_checked = false;
};

// Throws AccuracyError / DomainError when the engine's own gates fail
// (grid gates are skipped when GridSpec::enforce_resolution is off).
ExactCurve exact_curve(const ExperimentSetup& setup, const std::vector<double>& T);

FamilySearch find_families(const ExperimentSetup& setup);

struct ComparisonRun {
  FamilySearch search;
  ExactCurve exact;
  std::vector<CausticEvent> caustics;  // one per configured pair when found
  std::vector<PropagatorSample> samples;
  // Configured pairs naming a family the search did not find; left out of the sweep.
  std::vector<PairSpec> missing_pairs;
};

ComparisonRun run_comparison(const ExperimentSetup& setup);

}  // namespace csprop

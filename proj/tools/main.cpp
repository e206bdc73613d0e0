// csprop: scans, family continuation, caustic location and propagator
// comparisons driven by a JSON configuration.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 partial
// results (family gaps, missing exact or uniform values, unresolved contours).

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "config.hpp"
#include "csprop/airy.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using namespace csprop;
using namespace csprop::cli;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitPartial = 3;

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  std::string contour;
  std::vector<double> T;
  std::string T_range;
  bool smoke = false;
};

struct Run {
  std::string command;
  std::vector<std::string> argv;
  Config config;
  fs::path dir;
  json files = json::array();
  std::vector<std::string> warnings;
  json timings = json::object();
  json summary = json::object();

  void add(const WrittenFile& f) { files.push_back({{"name", f.name}, {"rows", f.rows}}); }
  void warn(const std::string& w) {
    warnings.push_back(w);
    std::cerr << "warning: " << w << '\n';
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--T-range: '" + text + "' is not MIN:MAX:STEP");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0] || parts[0] < 0.0)
    throw ConfigError("--T-range: expected MIN:MAX:STEP with 0 <= MIN <= MAX and STEP > 0");
  return parts;
}

// Applies command-line overrides on top of the configuration.
void apply_overrides(Config& c, const Common& o, bool T_sets_grid) {
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.threads < 0) throw ConfigError("--threads must be positive");
  if (o.threads > 0) c.setup.shooting.threads = o.threads;
  if (!o.contour.empty()) {
    ContourPolicy& p = c.setup.sweep.policy;
    p.schedule.clear();
    if (o.contour == "auto")
      p.manual = 0;
    else if (o.contour == "1" || o.contour == "2" || o.contour == "3")
      p.manual = o.contour[0] - '0';
    else
      throw ConfigError("--contour must be auto, 1, 2 or 3");
  }
  if (!o.T_range.empty() && !o.T.empty()) throw ConfigError("use either --T or --T-range");
  if (!o.T_range.empty()) {
    const auto r = parse_range(o.T_range);
    c.setup.T_min = r[0];
    c.setup.T_max = r[1];
    c.setup.T_step = r[2];
  }
  if (T_sets_grid && !o.T.empty()) {
    if (o.T.size() != 1) throw ConfigError("--T takes one value here; use --T-range");
    c.setup.T_min = c.setup.T_max = o.T[0];
  }
  c.setup.validate();
}

Config load(const Common& o, const std::string& fallback_preset = "") {
  if (!o.config.empty()) return load_config(o.config);
  if (!fallback_preset.empty()) return preset_config(fallback_preset);
  throw ConfigError("--config is required");
}

void prepare_dir(Run& run) {
  run.dir = run.config.output_dir;
  std::error_code ec;
  fs::create_directories(run.dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + run.dir.string());
}

std::string t_tag(double T) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", T);
  return buf;
}

// --- commands ----------------------------------------------------------------

void do_scan(Run& run, const std::vector<double>& times) {
  const ExperimentSetup& s = run.config.setup;
  if (s.b.size() != 1) throw ConfigError("scan needs a system with one degree of freedom");
  Shooter sh(s.make(), s.initial, s.final_label, s.shooting);
  const auto t0 = std::chrono::steady_clock::now();
  json seeds_summary = json::object();
  for (double T : times) {
    const WMap map = sh.scan_wplane(T, s.wgrid);
    run.add(write_wmap(run.dir / ("wmap_T" + t_tag(T) + ".csv"), map));
    const auto seeds = sh.seeds(map);
    std::vector<std::optional<Root>> refined;
    int converged = 0;
    for (cplx w : seeds) {
      PhaseVec w0(1);
      w0[0] = w;
      refined.push_back(sh.try_refine_root(T, w0));
      converged += refined.back() ? 1 : 0;
    }
    run.add(write_seeds(run.dir / ("seeds_T" + t_tag(T) + ".csv"), seeds, refined));
    seeds_summary[t_tag(T)] = {{"seeds", seeds.size()}, {"converged", converged}};
  }
  run.summary["scan"] = seeds_summary;
  run.timings["scan_s"] = seconds_since(t0);
}

int family_status(Run& run, const FamilySearch& search) {
  int status = kExitOk;
  json fams = json::array();
  for (const auto& f : search.families) {
    fams.push_back({{"id", f.id},
                    {"roots", f.roots.size()},
                    {"T_first", f.roots.empty() ? 0.0 : f.roots.front().T},
                    {"T_last", f.roots.empty() ? 0.0 : f.roots.back().T},
                    {"gaps", f.gaps.size()},
                    {"truncated", f.truncated},
                    {"first_significant_T", f.first_significant_T}});
    if (!f.gaps.empty()) {
      run.warn("family " + f.id + " has " + std::to_string(f.gaps.size()) +
               " continuation gap(s)");
      status = kExitPartial;
    }
  }
  run.summary["families"] = fams;
  run.summary["rejected_families"] = search.rejected.size();
  run.summary["distant_roots"] = search.distant.size();
  if (search.families.empty()) {
    run.warn("no families found");
    status = kExitPartial;
  }
  return status;
}

json caustic_summary(const std::vector<CausticEvent>& events) {
  json a = json::array();
  for (const auto& e : events)
    a.push_back({{"pair", e.family_a + "+" + e.family_b},
                 {"T_star", e.T_star},
                 {"T_min_mvv", e.T_min_mvv},
                 {"T_min_distance", e.T_min_distance},
                 {"min_sqrt_mvv", e.min_abs_mvv}});
  return a;
}

int do_families(Run& run) {
  const ExperimentSetup& s = run.config.setup;
  auto t0 = std::chrono::steady_clock::now();
  const FamilySearch search = find_families(s);
  run.timings["families_s"] = seconds_since(t0);
  run.add(write_families(run.dir / "families.csv", search));
  t0 = std::chrono::steady_clock::now();
  Shooter sh(s.make(), s.initial, s.final_label, s.shooting);
  std::vector<CausticEvent> events;
  // Caustics are located for the configured pairs.
  for (const auto& p : s.pairs) {
    const Family* a = nullptr;
    const Family* b = nullptr;
    for (const auto& f : search.families) {
      if (f.id == p.first) a = &f;
      if (f.id == p.second) b = &f;
    }
    if (!a || !b) {
      run.warn("pair " + p.first + "+" + p.second + " skipped: family not found");
      continue;
    }
    if (auto e = locate_caustic(sh, *a, *b, s.sweep.caustic_threshold)) events.push_back(*e);
  }
  run.timings["caustics_s"] = seconds_since(t0);
  run.add(write_caustics(run.dir / "caustics.csv", events));
  run.summary["caustics"] = caustic_summary(events);
  int status = family_status(run, search);
  for (const auto& w : run.warnings)
    if (w.rfind("pair ", 0) == 0) status = kExitPartial;
  return status;
}

int do_compare(Run& run) {
  const ExperimentSetup& s = run.config.setup;
  const auto t0 = std::chrono::steady_clock::now();
  const ComparisonRun cmp = run_comparison(s);
  run.timings["compare_s"] = seconds_since(t0);
  int status = family_status(run, cmp.search);
  for (const auto& p : cmp.missing_pairs) {
    run.warn("pair " + p.first + "+" + p.second + " skipped: family not found");
    status = kExitPartial;
  }
  if (s.b.size() == 2 && !cmp.exact.grid_checked)
    run.warn("grid accuracy gates not enforced (max edge density " +
             format_number(cmp.exact.grid.max_edge_density) + ", norm drift " +
             format_number(cmp.exact.grid.max_norm_drift) + ")");
  std::vector<std::string> ids;
  for (const auto& f : cmp.search.families) ids.push_back(f.id);
  run.add(write_families(run.dir / "families.csv", cmp.search));
  run.add(write_caustics(run.dir / "caustics.csv", cmp.caustics));
  run.add(write_exact(run.dir / "exact.csv", cmp.exact));
  run.add(write_samples(run.dir / "propagator.csv", cmp.samples, ids, run.config.combinations));
  run.summary["caustics"] = caustic_summary(cmp.caustics);

  int unresolved = 0, missing_uniform = 0;
  std::vector<double> switches;
  for (std::size_t k = 0; k < cmp.samples.size(); ++k) {
    const auto& x = cmp.samples[k];
    unresolved += x.contour_unresolved ? 1 : 0;
    missing_uniform += (!x.pair.empty() && !x.K_uniform) ? 1 : 0;
    if (k > 0 && !x.pair.empty() && !cmp.samples[k - 1].pair.empty() &&
        (x.pair != cmp.samples[k - 1].pair || x.contour_used != cmp.samples[k - 1].contour_used))
      switches.push_back(x.T);
  }
  run.summary["contour_switch_T"] = switches;
  if (unresolved) {
    run.warn(std::to_string(unresolved) + " sample(s) with unresolved contour choice");
    status = kExitPartial;
  }
  if (missing_uniform) {
    run.warn(std::to_string(missing_uniform) + " sample(s) without a uniform value");
    status = kExitPartial;
  }
  return status;
}

// --- manifest ----------------------------------------------------------------

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const Run& run, int status, const std::string& error) {
  json m;
  m["tool"] = "csprop";
  m["version"] = CSPROP_VERSION;
  m["command"] = run.command;
  m["argv"] = run.argv;
  m["status"] = status;
  if (!error.empty()) m["error"] = error;
  m["finished_utc"] = utc_now();
  m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                  std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"cli11", CLI11_VERSION},
                    {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["compiler"] = __VERSION__;
  m["config"] = to_json(run.config);
  m["files"] = run.files;
  m["warnings"] = run.warnings;
  m["timings_s"] = run.timings;
  m["summary"] = run.summary;
  std::ofstream out(run.dir / "manifest.json");
  out << m.dump(2) << '\n';
}

int execute(Run& run, const std::function<int(Run&)>& body) {
  int status = kExitOk;
  std::string error;
  try {
    prepare_dir(run);
    status = body(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;  // nothing computed; no manifest
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    status = kExitNumerical;
    error = e.what();
  }
  write_manifest(run, status, error);
  std::cerr << run.command << ": " << run.files.size() << " file(s) in " << run.dir.string()
            << (status == kExitOk ? "" : " (exit " + std::to_string(status) + ")") << '\n';
  return status;
}

void add_common(CLI::App* app, Common& o, bool with_contour, bool with_T) {
  app->add_option("--config", o.config, "experiment configuration (JSON, schema_version 1)");
  app->add_option("--out", o.out, "output directory (overrides output_dir)");
  app->add_option("--threads", o.threads, "worker threads for scans and Newton refinement")
      ->check(CLI::PositiveNumber);
  if (with_contour)
    app->add_option("--contour", o.contour, "contour policy: auto, 1, 2 or 3")
        ->check(CLI::IsMember({"auto", "1", "2", "3"}));
  if (with_T) {
    app->add_option("--T", o.T, "time(s)");
    app->add_option("--T-range", o.T_range, "MIN:MAX:STEP");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csprop: semiclassical coherent-state propagators with uniform caustic repair"};
  app.require_subcommand(1);
  Common scan_o, fam_o, cmp_o, rep_o;
  std::string figure;

  auto* scan = app.add_subcommand("scan", "w-plane maps and seeds (one degree of freedom)");
  add_common(scan, scan_o, false, true);
  auto* families = app.add_subcommand("families", "discover and continue root families");
  add_common(families, fam_o, false, true);
  auto* compare = app.add_subcommand("compare", "exact vs second-order vs uniform propagator");
  add_common(compare, cmp_o, true, true);
  auto* reproduce = app.add_subcommand("reproduce", "bundled figure pipelines: fig1, fig2, fig3");
  reproduce->add_option("figure", figure, "fig1, fig2 or fig3")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  add_common(reproduce, rep_o, true, false);
  reproduce->add_flag("--smoke", rep_o.smoke, "fig3 on the coarse 128^2 reference grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Run run;
  for (int k = 1; k < argc; ++k) run.argv.push_back(argv[k]);
  try {
    if (*scan) {
      run.command = "scan";
      run.config = load(scan_o);
      apply_overrides(run.config, scan_o, false);
      std::vector<double> times = run.config.setup.scan_times;
      if (!scan_o.T.empty()) times = scan_o.T;
      if (!scan_o.T_range.empty()) times = run.config.setup.T_grid();
      if (times.empty()) throw ConfigError("no scan times (config scan.times, --T or --T-range)");
      for (double T : times)
        if (T < 0.0) throw ConfigError("scan times must be non-negative");
      return execute(run, [&](Run& r) {
        do_scan(r, times);
        return kExitOk;
      });
    }
    if (*families) {
      run.command = "families";
      run.config = load(fam_o);
      apply_overrides(run.config, fam_o, true);
      return execute(run, do_families);
    }
    if (*compare) {
      run.command = "compare";
      run.config = load(cmp_o);
      apply_overrides(run.config, cmp_o, true);
      return execute(run, do_compare);
    }
    run.command = "reproduce " + figure;
    if (figure == "fig1") {
      run.config = load(rep_o, "quartic");
      run.config.setup.wgrid.n_alpha = run.config.setup.wgrid.n_beta = 201;
      if (rep_o.out.empty() && rep_o.config.empty()) run.config.output_dir = "out/fig1";
      apply_overrides(run.config, rep_o, false);
      return execute(run, [](Run& r) {
        do_scan(r, {0.06, 0.24, 0.70, 1.02, 2.20, 2.70});
        return do_families(r);
      });
    }
    run.config = load(rep_o, figure == "fig2" ? "quartic" : (rep_o.smoke ? "nelson_smoke" : "nelson"));
    if (rep_o.out.empty() && rep_o.config.empty()) run.config.output_dir = "out/" + figure;
    apply_overrides(run.config, rep_o, false);
    return execute(run, do_compare);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace csprop::cli {

using json = nlohmann::ordered_json;

namespace {

// Strict view of one JSON object: each key must be consumed exactly once.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(at(key), "missing");
    return j_.at(key);
  }

  double num(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(key), "not finite");
    return x;
  }
  void num(const std::string& key, double& out) {
    if (has(key)) out = num(key);
  }
  double positive(const std::string& key) {
    const double x = num(key);
    if (!(x > 0.0)) fail(at(key), "must be positive");
    return x;
  }
  void positive(const std::string& key, double& out) {
    if (has(key)) out = positive(key);
  }
  long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<long>();
  }
  template <class I>
  void integer(const std::string& key, I& out, long lo) {
    if (!has(key)) return;
    const long x = integer(key);
    if (x < lo) fail(at(key), "must be at least " + std::to_string(lo));
    out = static_cast<I>(x);
  }
  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }
  void boolean(const std::string& key, bool& out) {
    if (has(key)) out = boolean(key);
  }
  std::string str(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> nums(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(at(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  Obj sub(const std::string& key) { return Obj(raw(key), at(key)); }

  // Call after reading: unknown keys are errors.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> sized(Obj& o, const std::string& key, std::size_t n) {
  auto v = o.nums(key);
  if (v.size() != n)
    Obj::fail(o.at(key), "expected " + std::to_string(n) + " entries (one per degree of freedom)");
  return v;
}

CoherentLabel read_label(Obj o, const std::vector<double>& b, double hbar) {
  auto q = sized(o, "q", b.size());
  auto p = sized(o, "p", b.size());
  o.done();
  return CoherentLabel::from_widths(q, p, b, hbar);
}

std::pair<double, double> range2(Obj& o, const std::string& key) {
  auto v = o.nums(key);
  if (v.size() != 2 || !(v[1] > v[0])) Obj::fail(o.at(key), "expected [min, max] with min < max");
  return {v[0], v[1]};
}

std::vector<std::string> id_list(const json& v, const std::string& path, std::size_t min_size) {
  if (!v.is_array() || v.size() < min_size)
    Obj::fail(path, "expected an array of at least " + std::to_string(min_size) + " family ids");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) Obj::fail(path, "family ids are strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

void read_contour(const json& v, const std::string& path, ContourPolicy& p) {
  p.manual = 0;
  p.schedule.clear();
  if (v.is_string()) {
    if (v.get<std::string>() != "auto") Obj::fail(path, "expected \"auto\", 1, 2, 3 or a schedule");
    return;
  }
  if (v.is_number_integer()) {
    const int c = v.get<int>();
    if (c < 1 || c > 3) Obj::fail(path, "contour must be 1, 2 or 3");
    p.manual = c;
    return;
  }
  if (v.is_array()) {
    double last = -1e300;
    for (std::size_t k = 0; k < v.size(); ++k) {
      Obj e(v[k], path + "[" + std::to_string(k) + "]");
      const double from = e.num("from");
      const long c = e.integer("contour");
      e.done();
      if (c < 1 || c > 3) Obj::fail(path, "contour must be 1, 2 or 3");
      if (!(from > last)) Obj::fail(path, "schedule must be sorted by 'from'");
      last = from;
      p.schedule.push_back({from, int(c)});
    }
    if (p.schedule.empty()) Obj::fail(path, "schedule is empty");
    return;
  }
  Obj::fail(path, "expected \"auto\", 1, 2, 3 or a schedule");
}

json contour_json(const ContourPolicy& p) {
  if (!p.schedule.empty()) {
    json a = json::array();
    for (const auto& [from, c] : p.schedule) a.push_back({{"from", from}, {"contour", c}});
    return a;
  }
  if (p.manual) return p.manual;
  return "auto";
}

}  // namespace

Config parse_config(const json& j) {
  Config c;
  ExperimentSetup& s = c.setup;
  Obj root(j, "config");
  const long version = root.integer("schema_version");
  if (version != kSchemaVersion)
    Obj::fail("config.schema_version", "unsupported version " + std::to_string(version) +
                                           " (expected " + std::to_string(kSchemaVersion) + ")");
  {
    Obj sys = root.sub("system");
    s.system_name = sys.str("name");
    s.params.clear();
    if (sys.has("params")) {
      const json& p = sys.raw("params");
      if (!p.is_object()) Obj::fail(sys.at("params"), "expected an object");
      for (auto it = p.begin(); it != p.end(); ++it) {
        if (!it->is_number()) Obj::fail(sys.at("params") + "." + it.key(), "expected a number");
        s.params[it.key()] = it->get<double>();
      }
    }
    sys.done();
  }
  s.hbar = root.positive("hbar");
  s.b = root.nums("b");
  if (s.b.empty() || s.b.size() > std::size_t(kMaxDof))
    Obj::fail("config.b", "expected 1 or 2 widths");
  for (double bk : s.b)
    if (!(bk > 0.0)) Obj::fail("config.b", "widths must be positive");
  s.initial = read_label(root.sub("initial"), s.b, s.hbar);
  s.final_label = read_label(root.sub("final"), s.b, s.hbar);
  {
    Obj t = root.sub("T");
    s.T_min = t.num("min");
    s.T_max = t.num("max");
    s.T_step = t.positive("step");
    t.done();
  }
  if (root.has("shooting")) {
    Obj o = root.sub("shooting");
    ShootingOptions& so = s.shooting;
    o.positive("rtol", so.integration.rtol);
    o.positive("atol", so.integration.atol);
    o.positive("blowup", so.integration.blowup);
    o.integer("max_steps", so.integration.max_steps, 1);
    o.positive("scan_rtol", so.scan_rtol);
    o.positive("newton_tol", so.newton_tol);
    o.integer("newton_max_iter", so.newton_max_iter, 1);
    o.positive("caustic_threshold", so.caustic_threshold);
    o.positive("w_cutoff", so.w_cutoff);
    o.positive("continuation_jump", so.continuation_jump);
    o.positive("contributing_tol", so.contributing_tol);
    o.positive("near_radius", so.near_radius);
    o.positive("min_contribution", so.min_contribution);
    o.done();
  }
  if (root.has("scan")) {
    Obj o = root.sub("scan");
    if (o.has("times")) s.scan_times = o.nums("times");
    if (o.has("alpha")) std::tie(s.wgrid.alpha_min, s.wgrid.alpha_max) = range2(o, "alpha");
    if (o.has("beta")) std::tie(s.wgrid.beta_min, s.wgrid.beta_max) = range2(o, "beta");
    if (o.has("points")) {
      auto n = o.nums("points");
      if (n.size() != 2 || n[0] < 2 || n[1] < 2 || n[0] != std::floor(n[0]) ||
          n[1] != std::floor(n[1]))
        Obj::fail(o.at("points"), "expected [n_alpha, n_beta], each an integer >= 2");
      s.wgrid.n_alpha = int(n[0]);
      s.wgrid.n_beta = int(n[1]);
    }
    o.done();
  }
  if (root.has("seeds")) {
    Obj o = root.sub("seeds");
    if (o.has("times")) s.seed_times = o.nums("times");
    o.integer("lattice_per_axis", s.seeds.lattice_per_axis, 1);
    o.positive("lattice_spacing", s.seeds.lattice_spacing);
    o.integer("n_random", s.seeds.n_random, 0);
    o.positive("random_scale", s.seeds.random_scale);
    o.integer("rng_seed", s.seeds.rng_seed, 0);
    o.positive("continue_fraction", s.seeds.continue_fraction);
    o.done();
  }
  if (root.has("pairs")) {
    const json& p = root.raw("pairs");
    if (!p.is_array()) Obj::fail("config.pairs", "expected an array of [a, b] pairs");
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto ids = id_list(p[k], "config.pairs[" + std::to_string(k) + "]", 2);
      if (ids.size() != 2) Obj::fail("config.pairs[" + std::to_string(k) + "]", "expected two ids");
      s.pairs.push_back({ids[0], ids[1]});
    }
  }
  if (root.has("combinations")) {
    const json& p = root.raw("combinations");
    if (!p.is_array()) Obj::fail("config.combinations", "expected an array of id lists");
    for (std::size_t k = 0; k < p.size(); ++k)
      c.combinations.push_back(id_list(p[k], "config.combinations[" + std::to_string(k) + "]", 1));
  }
  if (root.has("sweep")) {
    Obj o = root.sub("sweep");
    o.positive("caustic_threshold", s.sweep.caustic_threshold);
    if (o.has("contour")) read_contour(o.raw("contour"), o.at("contour"), s.sweep.policy);
    if (o.has("seed_contour")) {
      const long sc = o.integer("seed_contour");
      if (sc < 1 || sc > 3) Obj::fail(o.at("seed_contour"), "contour must be 1, 2 or 3");
      s.sweep.policy.seed = int(sc);
    }
    o.positive("bound", s.sweep.policy.bound);
    o.integer("history", s.sweep.policy.history, 1);
    o.positive("max_jump", s.sweep.policy.max_jump);
    o.positive("switch_penalty", s.sweep.policy.switch_penalty);
    o.positive("handoff_tol", s.sweep.policy.handoff_tol);
    o.done();
  }
  {
    Obj o = root.sub("exact");
    if (s.b.size() == 1) {
      s.n_max = int(o.integer("n_max"));
      if (s.n_max < 10) Obj::fail(o.at("n_max"), "must be at least 10");
    } else {
      Obj g = o.sub("grid");
      s.grid.lo = sized(g, "lo", 2);
      s.grid.hi = sized(g, "hi", 2);
      auto pts = sized(g, "points", 2);
      s.grid.points.clear();
      for (double n : pts) {
        if (n < 4 || n != std::floor(n)) Obj::fail(g.at("points"), "expected integers >= 4");
        s.grid.points.push_back(int(n));
      }
      s.grid.dt = g.positive("dt");
      g.boolean("enforce_resolution", s.grid.enforce_resolution);
      g.done();
    }
    o.done();
  }
  if (root.has("output_dir")) c.output_dir = root.str("output_dir");
  root.done();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const Config& c) {
  const ExperimentSetup& s = c.setup;
  const ShootingOptions& so = s.shooting;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["system"] = {{"name", s.system_name}, {"params", s.params}};
  j["hbar"] = s.hbar;
  j["b"] = s.b;
  j["initial"] = {{"q", s.initial.q}, {"p", s.initial.p}};
  j["final"] = {{"q", s.final_label.q}, {"p", s.final_label.p}};
  j["T"] = {{"min", s.T_min}, {"max", s.T_max}, {"step", s.T_step}};
  j["shooting"] = {{"rtol", so.integration.rtol},
                   {"atol", so.integration.atol},
                   {"blowup", so.integration.blowup},
                   {"max_steps", so.integration.max_steps},
                   {"scan_rtol", so.scan_rtol},
                   {"newton_tol", so.newton_tol},
                   {"newton_max_iter", so.newton_max_iter},
                   {"caustic_threshold", so.caustic_threshold},
                   {"w_cutoff", so.w_cutoff},
                   {"continuation_jump", so.continuation_jump},
                   {"contributing_tol", so.contributing_tol},
                   {"near_radius", so.near_radius},
                   {"min_contribution", so.min_contribution}};
  j["scan"] = {{"times", s.scan_times},
               {"alpha", {s.wgrid.alpha_min, s.wgrid.alpha_max}},
               {"beta", {s.wgrid.beta_min, s.wgrid.beta_max}},
               {"points", {s.wgrid.n_alpha, s.wgrid.n_beta}}};
  j["seeds"] = {{"times", s.seed_times},
                {"lattice_per_axis", s.seeds.lattice_per_axis},
                {"lattice_spacing", s.seeds.lattice_spacing},
                {"n_random", s.seeds.n_random},
                {"random_scale", s.seeds.random_scale},
                {"rng_seed", s.seeds.rng_seed},
                {"continue_fraction", s.seeds.continue_fraction}};
  json pairs = json::array();
  for (const auto& p : s.pairs) pairs.push_back({p.first, p.second});
  j["pairs"] = pairs;
  j["combinations"] = c.combinations;
  const ContourPolicy& pol = s.sweep.policy;
  j["sweep"] = {{"caustic_threshold", s.sweep.caustic_threshold},
                {"contour", contour_json(pol)},
                {"seed_contour", pol.seed},
                {"bound", pol.bound},
                {"history", pol.history},
                {"max_jump", pol.max_jump},
                {"switch_penalty", pol.switch_penalty},
                {"handoff_tol", pol.handoff_tol}};
  if (s.b.size() == 1)
    j["exact"] = {{"n_max", s.n_max}};
  else
    j["exact"] = {{"grid",
                   {{"lo", s.grid.lo},
                    {"hi", s.grid.hi},
                    {"points", s.grid.points},
                    {"dt", s.grid.dt},
                    {"enforce_resolution", s.grid.enforce_resolution}}}};
  j["output_dir"] = c.output_dir;
  return j;
}

Config preset_config(const std::string& name) {
  Config c;
  if (name == "quartic") {
    c.setup = quartic_setup();
    c.combinations = {{"f1"}, {"f1", "f2"}, {"f2", "f3"}, {"f1", "f2", "f3"}};
  } else if (name == "nelson") {
    c.setup = nelson_setup(false);
    c.combinations = {{"f1", "f2"}};
  } else if (name == "nelson_smoke") {
    c.setup = nelson_setup(true);
    c.combinations = {{"f1", "f2"}};
  } else if (name == "harmonic") {
    c.setup = harmonic_setup();
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.output_dir = "out/" + name;
  return c;
}

}  // namespace csprop::cli

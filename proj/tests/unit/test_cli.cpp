#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "doctest.h"
#include "output.hpp"

using namespace csprop;
using namespace csprop::cli;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("csprop_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CSPROP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bundled configs parse and round-trip") {
  for (const char* name : {"quartic", "nelson", "nelson_smoke", "harmonic"}) {
    const Config file = load_config(std::string(CSPROP_CONFIG_DIR) + "/" + name + ".json");
    const Config preset = preset_config(name);
    CHECK(to_json(file) == to_json(preset));
    CHECK(to_json(parse_config(to_json(file))) == to_json(file));
  }
}

TEST_CASE("strict schema") {
  const json base = to_json(preset_config("quartic"));
  auto rejects = [&](auto&& edit, const std::string& needle) {
    json j = base;
    edit(j);
    try {
      parse_config(j);
      FAIL("accepted: " << needle);
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  rejects([](json& j) { j["shooting"]["newton_tol_typo"] = 1.0; }, "newton_tol_typo");
  rejects([](json& j) { j["extra"] = 1; }, "config.extra");
  rejects([](json& j) { j["schema_version"] = 2; }, "schema_version");
  rejects([](json& j) { j.erase("schema_version"); }, "schema_version");
  rejects([](json& j) { j["hbar"] = -1.0; }, "hbar");
  rejects([](json& j) { j["hbar"] = "one"; }, "hbar");
  rejects([](json& j) { j["initial"]["q"] = json::array({0.0, 1.0}); }, "initial.q");
  rejects([](json& j) { j["T"]["step"] = 0.0; }, "T.step");
  rejects([](json& j) { j["T"]["max"] = -1.0; }, "T range");
  rejects([](json& j) { j["scan"]["points"] = json::array({1, 5}); }, "scan.points");
  rejects([](json& j) { j["sweep"]["contour"] = 4; }, "contour");
  rejects([](json& j) { j["sweep"]["contour"] = "C1"; }, "contour");
  rejects([](json& j) { j["system"]["name"] = "morse"; }, "morse");
  rejects([](json& j) { j["system"]["params"]["C"] = 1.0; }, "'C'");
  rejects([](json& j) { j["pairs"] = json::array({json::array({"f1"})}); }, "pairs[0]");
  rejects([](json& j) { j["exact"] = json::object(); }, "n_max");

  json sched = base;
  sched["sweep"]["contour"] = json::array(
      {json{{"from", 0.0}, {"contour", 1}}, json{{"from", 0.65}, {"contour", 3}}});
  const Config c = parse_config(sched);
  REQUIRE(c.setup.sweep.policy.schedule.size() == 2);
  CHECK(c.setup.sweep.policy.schedule[1].second == 3);
  json fixed = base;
  fixed["sweep"]["contour"] = 2;
  CHECK(parse_config(fixed).setup.sweep.policy.manual == 2);
}

TEST_CASE("CSV writers") {
  const fs::path dir = scratch("csv");
  const auto q = quartic_setup();
  Shooter sh(q.make(), q.initial, q.final_label, q.shooting);
  WGrid g;
  g.n_alpha = g.n_beta = 2;
  const WMap m = sh.scan_wplane(0.5, g);
  CHECK(write_wmap(dir / "a.csv", m).rows == 4);
  write_wmap(dir / "b.csv", sh.scan_wplane(0.5, g));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const std::string text = slurp(dir / "a.csv");
  CHECK(text.rfind("# ", 0) == 0);
  CHECK(text.find("\nalpha,beta,Qpp,Ppp,diverged\n") != std::string::npos);

  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("command line exit codes and determinism") {
  const fs::path dir = scratch("cli");
  const std::string cfg = std::string(CSPROP_CONFIG_DIR) + "/harmonic.json";
  CHECK(run_cli("compare --config " + cfg + " --out " + (dir / "a").string()) == 0);
  CHECK(run_cli("compare --config " + cfg + " --out " + (dir / "b").string()) == 0);
  for (const char* f : {"propagator.csv", "exact.csv", "families.csv", "caustics.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest["status"] == 0);
  CHECK(manifest["config"]["system"]["name"] == "harmonic");

  // K2 is exact for the harmonic oscillator.
  std::ifstream in(dir / "a" / "propagator.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 5 && std::getline(ss, cell, ','); ++k) v.push_back(std::stod(cell));
    CHECK(std::hypot(v[1] - v[3], v[2] - v[4]) < 1e-9);
    ++rows;
  }
  CHECK(rows == 101);

  std::ofstream(dir / "bad.json") << "{\"schema_version\": 1, \"oops\": 1}";
  CHECK(run_cli("compare --config " + (dir / "bad.json").string()) == 1);
  CHECK(run_cli("compare --config " + (dir / "missing.json").string()) == 1);
  CHECK(run_cli("compare --config " + cfg + " --contour 5") == 1);
  CHECK(run_cli("scan --config " + cfg + " --T 1 --T-range 0:1:0.5") == 1);
  CHECK(run_cli("families --config " + cfg + " --T-range 0:2:0.1 --out " +
                (dir / "f").string()) == 0);

  // A pair naming an absent family gives partial results.
  json j = to_json(load_config(cfg));
  j["pairs"] = json::array({json::array({"f1", "f2"})});
  std::ofstream(dir / "pair.json") << j.dump();
  CHECK(run_cli("compare --config " + (dir / "pair.json").string() + " --out " +
                (dir / "p").string()) == 3);
}

}

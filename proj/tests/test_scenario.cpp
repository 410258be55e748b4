#include <doctest.h>
#include <json.hpp>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "liouville/errors.hpp"
#include "liouville/scenario.hpp"

namespace fs = std::filesystem;

namespace {

lv::ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return lv::ScenarioConfig::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int lvlab(const std::string& args) {
  const std::string cmd = std::string(LVLAB_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lv_scenario_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

}  // namespace

TEST_CASE("config parsing and canonical rendering") {
  const auto c = parse(
      "scenario = green\nmodel = heisenberg\n[green]\ntrunc = 50\nelements = e,a,ab\nrmax = 6.0\nallow_recurrent = no\n");
  CHECK(c.scenario() == "green");
  CHECK(c.text("run", "model") == "heisenberg");
  CHECK(c.integer("green", "trunc") == 50);
  CHECK(c.text("green", "elements") == "e,a,ab");
  CHECK(c.real("green", "rmax") == 6.0);
  CHECK_FALSE(c.boolean("green", "allow_recurrent"));
  CHECK(c.integer("green", "domain_budget") == 1500000);
  const auto text = c.render();
  CHECK(text.find("rmax = 6\n") != std::string::npos);
  CHECK(text.find("allow_recurrent = false\n") != std::string::npos);
  CHECK(parse(text).render() == text);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse(""), lv::UsageError);
  CHECK_THROWS_AS(parse("[run]\nscenario = fly\n"), lv::UsageError);
  CHECK_THROWS_AS(parse("[run]\nscenario = green\n[green]\ntrunk = 4\n"), lv::UsageError);
  CHECK_THROWS_AS(parse("[run]\nscenario = green\n[green]\ntrunc = 0\n"), lv::UsageError);
  CHECK_THROWS_AS(parse("[run]\nscenario = green\n[green]\ntrunc = ten\n"), lv::UsageError);
  CHECK_THROWS_AS(parse("[run]\nscenario = green\n[martin]\ntrunc = 10\n"), lv::UsageError);
  CHECK_THROWS_AS(parse("[run]\nscenario = grid\n[grid]\nfrom = center\npaths = 0\n"), lv::UsageError);
  CHECK(parse("[run]\nscenario = grid\n[grid]\npaths = 1e5\n").integer("grid", "paths") == 100000);
  CHECK(parse("[grid]\ndomain = tile:4\n[run]\nscenario = grid\n").text("grid", "domain") == "tile:4");
  auto c = lv::ScenarioConfig::for_scenario("growth");
  CHECK_THROWS_AS(c.set("growth", "n", "1"), lv::UsageError);
  c.set("run", "scenario", "green");
  CHECK(c.scenario() == "green");
  c.set("green", "trunc", "30");
  CHECK_THROWS_AS(c.set("run", "scenario", "growth"), lv::UsageError);
  CHECK_THROWS_AS(c.set("growth", "n", "5"), lv::UsageError);
}

TEST_CASE("number formatting") {
  CHECK(lv::format_number(0.1) == "0.1");
  CHECK(lv::format_number(1e-300) == "1e-300");
  CHECK(lv::format_number(INFINITY) == "inf");
  CHECK(lv::format_number(-INFINITY) == "-inf");
  CHECK(lv::format_number(NAN) == "nan");
}

TEST_CASE("growth bundle") {
  auto c = lv::ScenarioConfig::for_scenario("growth");
  c.set("growth", "n", "6");
  c.finalize();
  const auto bundle = lv::run_scenario(c);
  CHECK(bundle.files.count("report.json") == 1);
  CHECK(bundle.files.count("config.ini") == 1);
  CHECK(bundle.has_series());
  const auto report = nlohmann::json::parse(bundle.files.at("report.json"));
  CHECK(report["schema_version"] == lv::kSchemaVersion);
  CHECK(report["scenario"] == "growth");
  CHECK(report["results"]["ball_sizes"].back() == 1457);
  CHECK(bundle.files.at("growth.csv").rfind("n,ball,sphere,normalized\n0,1,1,0\n", 0) == 0);
  const auto plots = lv::emit_plotdata(bundle);
  REQUIRE(plots.count("growth_curve.csv") == 1);
  CHECK(plots.at("growth_curve.csv").rfind("n,(1/n) ln|W_n|\n1,", 0) == 0);

  const auto dir = scratch("bundle");
  lv::write_bundle(bundle, dir);
  CHECK(slurp(dir / "config.ini") == c.render());
  CHECK(parse(slurp(dir / "config.ini")).render() == c.render());
  CHECK(lv::run_scenario(parse(slurp(dir / "config.ini"))).files == bundle.files);
}

TEST_CASE("bundles without series cannot be plotted") {
  auto c = lv::ScenarioConfig::for_scenario("obstruct");
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"trunc", "60"}, {"domain_budget", "100000"}, {"n0", "2"}, {"window", "4"}, {"growth_budget", "5000"}})
    c.set("obstruct", k, v);
  c.finalize();
  const auto bundle = lv::run_scenario(c);
  CHECK_FALSE(bundle.has_series());
  CHECK_THROWS_AS(lv::emit_plotdata(bundle), lv::UsageError);
  const auto report = nlohmann::json::parse(bundle.files.at("report.json"));
  CHECK(report["results"]["verdict"] == "obstruction-witnessed");
}

TEST_CASE("scenario errors carry exit codes") {
  auto c = lv::ScenarioConfig::for_scenario("green");
  c.set("run", "model", "abelian:2");
  c.finalize();
  try {
    (void)lv::run_scenario(c);
    FAIL("expected a transience error");
  } catch (const lv::TransienceError& e) {
    CHECK(e.code() == lv::ExitCode::usage);
  }
  auto g = lv::ScenarioConfig::for_scenario("grid");
  g.set("grid", "from", "0,0");
  g.set("grid", "domain", "rectangle:4x4");
  g.finalize();
  CHECK_THROWS_AS(lv::run_scenario(g), lv::UsageError);
}

TEST_CASE("command line") {
  const auto out = scratch("cli");
  CHECK(lvlab("growth --n 5 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "growth.csv"));
  CHECK_FALSE(fs::exists(out / "growth_curve.csv"));

  // Command line overrides the config file, which overrides defaults.
  const auto cfg = out.parent_path() / "cli.ini";
  std::ofstream(cfg) << "[run]\nscenario = growth\nmodel = heisenberg\n[growth]\nn = 6\n";
  const auto out2 = scratch("cli2");
  CHECK(lvlab("run --config " + cfg.string() + " --out " + out2.string() + " --plot") == 0);
  CHECK(slurp(out2 / "config.ini").find("n = 6\n") != std::string::npos);
  CHECK(fs::exists(out2 / "growth_curve.csv"));
  const auto out3 = scratch("cli3");
  CHECK(lvlab("growth --config " + cfg.string() + " --n 7 --out " + out3.string()) == 0);
  const auto echoed = slurp(out3 / "config.ini");
  CHECK(echoed.find("n = 7\n") != std::string::npos);
  CHECK(echoed.find("model = heisenberg\n") != std::string::npos);

  CHECK(lvlab("growth --bogus 1") == 2);
  CHECK(lvlab("") == 2);
  CHECK(lvlab("run") == 2);
  CHECK(lvlab("green --config " + cfg.string()) == 2);
  CHECK(lvlab("green --model abelian:2 --out " + scratch("cli4").string()) == 2);
  CHECK(lvlab("growth --n 40 --budget 1000 --out " + scratch("cli5").string()) == 3);
  CHECK(lvlab("green --model abelian:2 --allow_recurrent true --trunc 400 --domain_budget 100000 --out " +
              scratch("cli6").string()) == 4);
  CHECK(lvlab("schema") == 0);
  CHECK(lvlab("--help") == 0);
}

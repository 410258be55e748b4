// lvlab: run one scenario and write its report bundle.
#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "liouville/errors.hpp"
#include "liouville/scenario.hpp"

namespace {

struct Overrides {
  // (section, key) -> raw command-line value
  std::map<std::pair<std::string, std::string>, std::string> values;
};

void add_schema_options(CLI::App& app, const std::string& section, Overrides& overrides,
                        std::map<std::pair<std::string, std::string>, CLI::Option*>& handles) {
  for (const auto& p : lv::config_schema()) {
    if (p.section != section || (section == "run" && p.key == "scenario")) continue;
    auto& slot = overrides.values[{p.section, p.key}];
    auto* opt = app.add_option("--" + p.key, slot, p.help + " (default " + (p.fallback.empty() ? "none" : p.fallback) + ")");
    opt->delimiter('\0');
    handles[{p.section, p.key}] = opt;
  }
}

std::string schema_text() {
  std::string out, current;
  for (const auto& p : lv::config_schema()) {
    if (p.section != current) {
      out += (current.empty() ? "[" : "\n[") + p.section + "]\n";
      current = p.section;
    }
    out += "# " + p.help + "\n" + p.key + " = " + p.fallback + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk potential theory lab: growth, Green functions, Martin kernels, exit distributions"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "lvlab-out", timing_path;
  bool plot = false;
  app.add_option("--config", config_path, "INI file with [run] and one scenario section")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory of the bundle")->capture_default_str();
  app.add_option("--timing", timing_path, "write wall-clock timing JSON to this file");
  app.add_flag("--plot", plot, "also write one two-column CSV per plot series");

  Overrides overrides;
  std::map<std::pair<std::string, std::string>, CLI::Option*> handles;
  add_schema_options(app, "run", overrides, handles);

  std::map<std::string, CLI::App*> subs;
  for (const auto& name : lv::scenario_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
    add_schema_options(*sub, name, overrides, handles);
    subs[name] = sub;
  }
  auto* run = app.add_subcommand("run", "run the scenario named in --config");
  auto* schema = app.add_subcommand("schema", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(lv::ExitCode::usage);
  }

  try {
    if (schema->parsed()) {
      std::cout << schema_text();
      return 0;
    }
    std::string scenario;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) scenario = name;
    if (run->parsed() && config_path.empty()) throw lv::UsageError("run needs --config");

    // Precedence: command line over config file over defaults.
    std::optional<lv::ScenarioConfig> config;
    if (!config_path.empty()) {
      config = lv::ScenarioConfig::load(config_path);
      if (!scenario.empty() && config->scenario() != scenario)
        throw lv::UsageError("config names scenario '" + config->scenario() + "' but the command is '" + scenario + "'");
    } else {
      config = lv::ScenarioConfig::for_scenario(scenario);
    }
    for (const auto& [where, value] : overrides.values)
      if (handles.at(where)->count() > 0) config->set(where.first, where.second, value);
    config->finalize();

    if (const auto threads = config->integer("run", "threads"); threads > 0)
      omp_set_num_threads(static_cast<int>(threads));

    const auto start = std::chrono::steady_clock::now();
    auto bundle = lv::run_scenario(*config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (plot)
      for (auto& [name, content] : lv::emit_plotdata(bundle)) bundle.files[name] = content;
    lv::write_bundle(bundle, out_dir);

    if (!timing_path.empty()) {
      const nlohmann::json timing = {{"scenario", config->scenario()},
                                     {"seconds", seconds},
                                     {"threads", omp_get_max_threads()}};
      std::ofstream(timing_path) << timing.dump(2) << '\n';
    }
    std::cout << config->scenario() << ": wrote " << bundle.files.size() << " files to " << out_dir << '\n';
    std::cerr << "elapsed " << seconds << " s on " << omp_get_max_threads() << " threads\n";
    return 0;
  } catch (const lv::Error& e) {
    std::cerr << "lvlab: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "lvlab: internal error: " << e.what() << '\n';
    return static_cast<int>(lv::ExitCode::internal);
  }
}

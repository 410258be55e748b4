#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lv {

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"growth", "green", "martin", "deviation", "obstruct", "grid"};
  return names;
}

enum class ParamType { integer, real, text, boolean };

struct ParamSpec {
  std::string section;  // "run" or a scenario name
  std::string key;
  ParamType type = ParamType::text;
  std::string fallback;
  double min = 0;
  double max = 0;
  std::string help;
};

/// Every accepted key with its default and range.
const std::vector<ParamSpec>& config_schema();
const ParamSpec* find_param(std::string_view section, std::string_view key);

/// A validated scenario configuration. Values are kept as canonical text so
/// the echoed file reproduces the run exactly.
class ScenarioConfig {
 public:
  /// Parses a key=value file with [run] and [<scenario>] sections. Keys
  /// before any section belong to [run]. Unknown keys are rejected.
  static ScenarioConfig parse(std::istream& in);
  static ScenarioConfig load(const std::filesystem::path& path);
  static ScenarioConfig for_scenario(std::string scenario);

  /// Sets one value, validating type and range. `section` must be "run" or
  /// the configured scenario.
  void set(std::string_view section, std::string_view key, std::string_view value);
  /// Fills defaults and checks cross-field constraints.
  void finalize();

  const std::string& scenario() const noexcept { return scenario_; }
  std::string text(std::string_view section, std::string_view key) const;
  long integer(std::string_view section, std::string_view key) const;
  double real(std::string_view section, std::string_view key) const;
  bool boolean(std::string_view section, std::string_view key) const;

  /// Canonical INI text listing every key of [run] and the scenario section.
  std::string render() const;

 private:
  std::string scenario_;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

/// File name -> contents. Always holds report.json and config.ini.
struct ReportBundle {
  std::map<std::string, std::string> files;
  bool has_series() const;
};

ReportBundle run_scenario(const ScenarioConfig& config);

/// Adds one two-column CSV per series of the report (growth_curve.csv,
/// ball_curve.csv, deviation_curve.csv, ...). Throws UsageError when the
/// bundle has no series.
std::map<std::string, std::string> emit_plotdata(const ReportBundle& bundle);

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for the rest.
std::string format_number(double v);

}  // namespace lv

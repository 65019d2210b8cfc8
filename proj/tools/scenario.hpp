#pragma once

// Scenario files: strict JSON with a declared format version, one analysis
// section, an optional seed and optional embedded checks.
//
//   {
//     "format_version": 1,
//     "name": "two_level_stack",
//     "seed": 7,
//     "analysis": { "kind": "stack", ... },
//     "checks": [ { "quantity": "rho", "value": 0.1637, "tolerance": 1e-3 } ]
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace tse::scenario {

inline constexpr int kFormatVersion = 1;

using Value = std::variant<double, bool, std::string>;

struct Quantity {
  std::string name;
  Value value;
};

struct Artifact {
  std::string file;
  std::string content;
};

struct AnalysisResult {
  std::string kind;
  std::vector<Quantity> quantities;
  std::vector<Artifact> artifacts;
  std::string summary;

  const Value* find(const std::string& name) const;
};

struct Check {
  std::string quantity;
  Value expected;
  double tolerance = 0.0;
};

struct Scenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  std::optional<std::string> output_dir;
  nlohmann::json analysis;
  std::vector<Check> checks;
};

/// Throws ConfigError with line:column for syntax errors and a field path for
/// schema errors.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

AnalysisResult run_analysis(const Scenario& scenario);

struct CheckOutcome {
  Check check;
  std::optional<Value> measured;
  bool pass = false;
};

std::vector<CheckOutcome> evaluate_checks(const Scenario& scenario, const AnalysisResult& result);

std::string format_value(const Value& v);
std::string render_report(const Scenario& scenario, const AnalysisResult& result,
                           const std::vector<CheckOutcome>* checks);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct RunOptions {
  bool check = false;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int status = 0;
  std::filesystem::path output_dir;
  AnalysisResult result;
  std::vector<CheckOutcome> checks;
};

/// Loads, runs and writes artifacts plus report.txt. Errors propagate as
/// ConfigError / NumericalError; failed checks set status 4.
RunOutcome run_scenario(const std::filesystem::path& path, const RunOptions& options);

struct Golden {
  std::string name;
  std::string example;
  std::string asserted;
};

const std::vector<Golden>& goldens();
std::filesystem::path golden_directory();
/// A path to an existing file, or the bundled golden of that name.
std::filesystem::path resolve_scenario(const std::string& name_or_path);

}  // namespace tse::scenario

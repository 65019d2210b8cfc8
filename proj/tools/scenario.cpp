#include "scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "reader.hpp"
#include "tse/core.hpp"

namespace tse::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

Value parse_expected(const json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ConfigError(where + ": expected a number, boolean or string");
}

}  // namespace

const Value* AnalysisResult::find(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return &q.value;
  return nullptr;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ":" + line_column(text, e.byte) + ": invalid JSON");
  }
  const Reader top(doc, "", {"format_version", "name", "description", "seed", "output_dir",
                             "analysis", "checks"});
  if (!top.has("format_version")) top.fail("format_version", "missing required key");
  const auto& v = top.raw("format_version");
  if (!v.is_number_integer() || v.get<long long>() != kFormatVersion)
    top.fail("format_version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");

  Scenario s;
  s.name = top.string("name");
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    top.fail("name", "must be a non-empty plain file name");
  s.description = top.string_or("description", "");
  if (top.has("seed")) s.seed = top.count("seed");
  if (top.has("output_dir")) s.output_dir = top.string("output_dir");
  s.analysis = top.raw("analysis");
  if (!s.analysis.is_object() || s.analysis.empty()) top.fail("analysis", "empty analysis section");
  if (!s.analysis.contains("kind")) top.fail("analysis.kind", "missing required key");
  if (top.has("checks")) {
    for (const auto& c : top.objects("checks", {"quantity", "value", "tolerance"})) {
      Check check;
      check.quantity = c.string("quantity");
      check.expected = parse_expected(c.raw("value"), c.path() + ".value");
      check.tolerance = c.number_or("tolerance", 0.0);
      if (check.tolerance < 0.0) c.fail("tolerance", "must be >= 0");
      s.checks.push_back(std::move(check));
    }
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string format_value(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<std::string>(v);
}

std::vector<CheckOutcome> evaluate_checks(const Scenario& scenario, const AnalysisResult& result) {
  std::vector<CheckOutcome> out;
  for (const auto& c : scenario.checks) {
    CheckOutcome o{c, std::nullopt, false};
    if (const Value* m = result.find(c.quantity)) {
      o.measured = *m;
      if (const auto* e = std::get_if<double>(&c.expected)) {
        if (const auto* d = std::get_if<double>(m))
          o.pass = std::isfinite(*d) && std::abs(*d - *e) <= c.tolerance;
      } else {
        o.pass = c.expected == *m;
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::string render_report(const Scenario& scenario, const AnalysisResult& result,
                          const std::vector<CheckOutcome>* checks) {
  std::ostringstream out;
  out << "scenario=" << scenario.name << '\n'
      << "kind=" << result.kind << '\n'
      << "seed=" << scenario.seed << '\n';
  for (const auto& q : result.quantities) out << q.name << '=' << format_value(q.value) << '\n';
  if (checks) {
    std::size_t failed = 0;
    for (const auto& c : *checks) {
      failed += !c.pass;
      out << "check " << c.check.quantity << ": " << (c.pass ? "pass" : "FAIL") << " (measured "
          << (c.measured ? format_value(*c.measured) : "missing") << ", expected "
          << format_value(c.check.expected) << ", tolerance " << format_double(c.check.tolerance)
          << ")\n";
    }
    out << "checks_failed=" << failed << '\n';
  }
  return out.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunOutcome run_scenario(const fs::path& path, const RunOptions& options) {
  Scenario s = load_scenario(path);
  if (options.seed) s.seed = *options.seed;
  RunOutcome o;
  o.result = run_analysis(s);
  o.output_dir = options.out ? *options.out : fs::path(s.output_dir.value_or("out/" + s.name));
  if (options.check) o.checks = evaluate_checks(s, o.result);
  for (const auto& a : o.result.artifacts) write_atomic(o.output_dir / a.file, a.content);
  write_atomic(o.output_dir / "report.txt",
               render_report(s, o.result, options.check ? &o.checks : nullptr));
  if (options.check)
    for (const auto& c : o.checks)
      if (!c.pass) o.status = 4;
  return o;
}

const std::vector<Golden>& goldens() {
  static const std::vector<Golden> table{
      {"act_full", "Agentic Capital Tipping (ACT) Model: Full Walkthrough",
       "S_myo, T, beta_crit, T_spawn, gamma(5), protection bits, delta*, queue-neutral beta_crit"},
      {"barbell_frontier", "ROC Frontier and Barbell Distribution",
       "normalized (a, b), G dominated, unit mix at load cap 3, shadow prices"},
      {"constitutional_amendment", "Constitutional Amendment Game",
       "fork viability, total loss, fork-game equilibria"},
      {"continuous_intelligence", "Continuous Intelligence Distribution",
       "single cluster near 4^(-2/5), empty middle band"},
      {"coordination_game", "Symmetric Coordination Game",
       "interior equilibrium b/(a+b), mean fitness nondecreasing, convergence to pure A"},
      {"governance", "Numerical Symbiosis Analysis; Constitutional Design for AI Governance",
       "coalition minimum, symbiosis minimum, optimal entrenchment bits, institutional floor"},
      {"hamilton_ai", "Hamilton's Rule for AI Lineage Cooperation",
       "invasion for r = 0.1, 0.5, 1.0"},
      {"hopf_biased_rps", "Biased rock-paper-scissors Hopf bifurcation",
       "kappa_c, first Lyapunov coefficient, amplitude exponent"},
      {"kramers_double_well", "Kramers escape on a double well",
       "ln E[tau] against 1/sigma slope near the barrier"},
      {"pdmp_sample", "Innovation PDMP Sample Path",
       "phase-1 mean fitness rise, stationary mean active-set size"},
      {"protection_bits", "Protection Bits in Constitutional Selection", "12 and 25 bits at sigma 0.1"},
      {"rps_swirl", "Rock-Paper-Scissors and Swirl",
       "zero symmetric part, constant zero mean fitness"},
      {"slack_budget", "Slack Budget for the G8-G13 Stack",
       "total cost, budget, remaining slack, verdict, uniform depth"},
      {"spawn_manipulation", "Spawn manipulation of a plurality electorate",
       "one spawned ballot flips the winner"},
      {"two_level_stack", "Two-Level Poiesis: Lineages and Utilities",
       "gain entries, spectral radius, weight residual"},
      {"umpire_game", "Umpire Public Good Provision",
       "Nash and constrained social optimum, efficiency loss"},
  };
  return table;
}

fs::path golden_directory() {
  if (const char* env = std::getenv("TSE_SCENARIO_DIR")) return env;
  return TSE_SCENARIO_DIR;
}

fs::path resolve_scenario(const std::string& name_or_path) {
  const fs::path p(name_or_path);
  if (fs::exists(p)) return p;
  for (const auto& g : goldens())
    if (g.name == name_or_path) return golden_directory() / (g.name + ".json");
  throw ConfigError(name_or_path + ": no such scenario file or bundled golden");
}

}  // namespace tse::scenario

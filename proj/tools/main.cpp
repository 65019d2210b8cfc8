#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "scenario.hpp"
#include "tse/core.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kIo = 1;
constexpr int kInvalid = 2;
constexpr int kNumerical = 3;

int run_command(const std::string& file, bool check, const std::optional<std::string>& out,
                const std::optional<std::uint64_t>& seed) {
  namespace sc = tse::scenario;
  sc::RunOptions opts;
  opts.check = check;
  if (out) opts.out = *out;
  opts.seed = seed;
  const auto o = sc::run_scenario(sc::resolve_scenario(file), opts);
  std::cout << o.result.summary << '\n';
  if (check) {
    std::size_t failed = 0;
    for (const auto& c : o.checks) {
      if (c.pass) continue;
      ++failed;
      std::cerr << "check failed: " << c.check.quantity << " measured "
                << (c.measured ? sc::format_value(*c.measured) : "missing") << ", expected "
                << sc::format_value(c.check.expected) << " +/- "
                << tse::format_double(c.check.tolerance) << '\n';
    }
    std::cout << o.checks.size() - failed << "/" << o.checks.size() << " checks passed\n";
  }
  std::cout << "wrote " << o.output_dir.string() << '\n';
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toolkit for selection dynamics, frontiers and governance scenarios"};
  app.require_subcommand(1);

  std::string file;
  bool check = false;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario file or a bundled golden by name");
  run->add_option("file", file, "Scenario JSON path or golden name")->required();
  run->add_flag("--check", check, "Compare results with the scenario's embedded checks");
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* list = app.add_subcommand("goldens", "List bundled golden scenarios");
  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*version) {
      std::cout << "tse " << TSE_VERSION << " (scenario format " << tse::scenario::kFormatVersion
                << ")\n";
      return kOk;
    }
    if (*list) {
      for (const auto& g : tse::scenario::goldens())
        std::cout << g.name << "\t" << g.example << "\t" << g.asserted << '\n';
      return kOk;
    }
    return run_command(file, check, out, seed);
  } catch (const tse::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const tse::ConfigError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dwt/aha.hpp"
#include "dwt/laplace.hpp"
#include "dwt/synth.hpp"

namespace dwt::cli {

namespace fs = std::filesystem;

struct MeasureCommand {
  fs::path input;
  fs::path output;
  std::optional<double> spacing;
  std::optional<fs::path> dump_psi;
  std::optional<fs::path> dump_flags;
  std::optional<fs::path> boundaries;
  SolverConfig cfg;
};

struct SynthCommand {
  int count = 0;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  ShapeRecipe recipe;
  SolverConfig cfg;
};

struct EvalCommand {
  fs::path pred;
  fs::path gt;
  fs::path manifest;
  std::optional<fs::path> report;
  bool whole = false;
  int jobs = 1;
};

struct AhaCommand {
  std::array<fs::path, 3> maps;
  double apex = 0.0;
  double angle = kDefaultReferenceAngle;
  Sense sense = Sense::counterclockwise;
  fs::path output;
  std::optional<fs::path> csv;
  /// Color range; defaults to [0, largest segment mean].
  std::optional<std::array<double, 2>> range;
};

struct BenchCommand {
  fs::path input;
  std::optional<double> spacing;
  SolverConfig cfg;
};

struct InfoCommand {
  fs::path manifest;
  double bin_width = 4.0;
  double lo = 0.0;
  double hi = 64.0;
};

using Command =
    std::variant<MeasureCommand, SynthCommand, EvalCommand, AhaCommand, BenchCommand, InfoCommand>;

/// Bad arguments; `exit_code` is 2, or 0 for --help (message holds the help text).
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& message, int exit_code = 2)
      : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

/// argv[0] is the program name.
Command parse_args(const std::vector<std::string>& argv);

/// 0 on success, 1 when the pipeline reports an error (printed to `err` as
/// one `error=<Kind> detail=...` line).
int run(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse_args + run, mapping usage errors to exit code 2.
int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

SolverConfig load_solver_config(const std::string& json_text, SolverConfig base = {});
ShapeRecipe load_recipe(const std::string& json_text, ShapeRecipe base = {});

}  // namespace dwt::cli

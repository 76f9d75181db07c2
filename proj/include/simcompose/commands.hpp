#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "simcompose/abstraction.hpp"
#include "simcompose/compose.hpp"
#include "simcompose/project.hpp"
#include "simcompose/simulate.hpp"

namespace simcompose::commands {

/// Everything up to the small-gain test, built in-process from a project.
struct Pipeline {
  systems::Interconnection ic;
  std::vector<abstraction::AbstractionResult> abstractions;
  compose::GainMatrices gm;
  compose::SmallGainResult small_gain;
};

/// Throws ValidationError on channel violations or construction failures.
Pipeline build_pipeline(const project::ProjectFile& project);

struct Options {
  std::optional<Vector> eta;
  std::optional<double> epsilon;
  std::optional<double> t_final;
  std::optional<double> dt;
  std::optional<double> v0;
};

struct Composition {
  compose::OmegaPath path;
  compose::ComposedSimFn composed;
  bool overridden = false;
  /// False when an override violates the strict Omega-path inequality.
  bool certified = true;
};

/// Recomputed path unless eta/epsilon are overridden (by `opts` first, then
/// by the project's compose block). Returns nullopt if small-gain fails.
std::optional<Composition> choose_composition(const Pipeline& pl,
                                              const project::ProjectFile& project,
                                              const Options& opts);

struct SimulationOutcome {
  simulate::RefinementRun run;
  simulate::BoundReport report;
  simulate::Signal uhat = simulate::Signal::zero(0);
};

SimulationOutcome run_simulation(const Pipeline& pl, const project::ProjectFile& project,
                                 const compose::ComposedSimFn& composed, const Options& opts);

/// Bound violations beyond this tolerance give exit code 1.
inline constexpr double kBoundTolerance = 1e-6;

int cmd_check(const project::ProjectFile& project, std::ostream& out);
int cmd_abstract(const project::ProjectFile& project, const std::filesystem::path& out_dir,
                 std::ostream& out);
int cmd_compose(const project::ProjectFile& project, const Options& opts, std::ostream& out);
int cmd_simulate(const project::ProjectFile& project, const std::filesystem::path& csv,
                 const Options& opts, std::ostream& out);
int cmd_bounds(const project::ProjectFile& project, const Options& opts, std::ostream& out);
int cmd_reproduce_example(std::ostream& out);

/// 1 validation, 2 parse, 3 numerical; anything else is treated as numerical.
int exit_code(const std::exception& e);

/// Matrix file: rows of comma-separated 17-significant-digit values.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

}  // namespace simcompose::commands

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simcompose/abstraction.hpp"
#include "simcompose/simulate.hpp"
#include "simcompose/systems.hpp"

namespace simcompose::project {

using Parameters = std::map<std::string, double>;

/// Matrix entry: either a literal (param empty) or coeff * parameter.
struct Entry {
  double coeff = 0.0;
  std::string param;

  bool operator==(const Entry&) const = default;
};

/// Parses "d1", "-d2", "2d2", "0.5*d1", "+3 d4". Returns nullopt otherwise.
std::optional<Entry> parse_entry(std::string_view text);
std::string format_entry(const Entry& e);

class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(Eigen::Index rows, Eigen::Index cols, std::vector<Entry> entries);
  static ExprMatrix literal(const Matrix& m);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Entry>& entries() const { return entries_; }
  /// Substitutes parameters; `where` names the matrix in error messages.
  Matrix eval(const Parameters& params, std::string_view where) const;

  bool operator==(const ExprMatrix&) const = default;

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Entry> entries_;  // row-major
};

enum class PMethod { Given, MinimalInvariant, Identity };

struct AbstractionDirective {
  PMethod method = PMethod::Identity;
  std::optional<ExprMatrix> P;
  // Injected decay certificate; all three or none.
  std::optional<ExprMatrix> M;
  std::optional<ExprMatrix> K1;
  std::optional<double> lambda;
};

struct SubsystemSpec {
  std::string name;
  ExprMatrix A, B, D, C;
  std::map<int, ExprMatrix> outputs;                 // 0-based peer
  std::vector<systems::InternalInput> inputs;        // 0-based peer
  bool has_B = false;
  bool has_D = false;
  AbstractionDirective abstraction;
};

struct SignalSpec {
  enum class Kind { Zero, Constant, Square, Samples };
  Kind kind = Kind::Zero;
  Vector amplitude;  // Constant and Square
  double period = 1.0;
  std::vector<double> times;
  std::vector<Vector> values;

  simulate::Signal build(Eigen::Index width, double t_final) const;
};

struct SimulationSpec {
  double t_final = 20.0;
  double dt = 1e-3;
  bool x0_on_manifold = true;
  Vector x0;
  Vector xhat0;  // empty means zero
  std::map<int, SignalSpec> inputs;  // abstract input of subsystem (0-based)
};

struct ComposeSpec {
  std::optional<Vector> eta;
  std::optional<double> epsilon;
};

struct ProjectFile {
  std::string name;
  Parameters parameters;
  std::vector<SubsystemSpec> subsystems;
  ComposeSpec compose;
  SimulationSpec simulation;

  /// Evaluates all matrices; throws ParseError on unknown parameters or bad
  /// shapes. Channel constraints are left to systems::validate.
  systems::Interconnection interconnection() const;
  /// P for subsystem i from its directive.
  Matrix resolve_P(int i, const systems::LinearSystem& sys) const;
  std::optional<abstraction::DecayCertificate> injected_certificate(
      int i, const systems::LinearSystem& sys) const;
};

/// Throws ParseError; syntax errors carry "line L, column C".
ProjectFile parse(std::string_view text);
ProjectFile load(const std::filesystem::path& path);
std::string serialize(const ProjectFile& project);

/// JSON text of the bundled two-triple-integrator example.
std::string_view bundled_example();

}  // namespace simcompose::project

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simcompose/linalg.hpp"

namespace simcompose::systems {

/// One block of the internal input partition: columns of D fed by `peer`.
struct InternalInput {
  int peer = 0;
  int width = 0;
};

struct ColumnBlock {
  Eigen::Index offset = 0;
  Eigen::Index width = 0;
};

/// x' = A x + B u + D w,  y_ii = C_ext x,  y_ij = C_ij x.
///
/// Peers are 0-based indices into the owning interconnection. `internal_inputs`
/// is kept sorted by peer and partitions the columns of D; an absent channel
/// has width zero.
struct LinearSystem {
  std::string name;
  Matrix A;
  Matrix B;
  Matrix D;
  Matrix C_ext;
  std::map<int, Matrix> internal_outputs;
  std::vector<InternalInput> internal_inputs;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return D.cols(); }

  /// Columns of D fed by `peer`, if that channel exists.
  std::optional<ColumnBlock> input_block(int peer) const;
  /// Output matrix towards `peer` (empty 0 x n if absent).
  Matrix output_to(int peer) const;
  /// [C_ext; C_ij for j ascending].
  Matrix stacked_outputs() const;
  /// C_ext followed by every internal output block, in stacked order.
  std::vector<Matrix> output_blocks() const;

  /// Checks matrix shapes and the D partition; throws DimensionError.
  void check_shapes() const;
};

struct Interconnection {
  std::vector<LinearSystem> subsystems;

  int size() const { return static_cast<int>(subsystems.size()); }
};

struct Violation {
  int receiver = 0;  // i of w_ij
  int sender = 0;    // j of w_ij
  std::string message;
};

/// Interconnection constraints: width of w_ij equals rows of C_ji for all
/// i != j, referenced peers exist, no self channels.
std::vector<Violation> validate(const Interconnection& ic);

struct MonolithicSystem {
  Matrix A;
  Matrix B;
  Matrix C;
  std::vector<Eigen::Index> state_offsets;
  std::vector<Eigen::Index> input_offsets;
  std::vector<Eigen::Index> output_offsets;
};

/// Closes the loop w_ij = y_ji. Throws ValidationError listing violations.
MonolithicSystem build_monolithic(const Interconnection& ic);

/// Internal input vector w_i assembled from peer outputs (signal-level form of
/// w_ij = y_ji, used when subsystems are simulated side by side).
Vector gather_internal_inputs(const Interconnection& ic, int i, const std::vector<Vector>& states);

}  // namespace simcompose::systems

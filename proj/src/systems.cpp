#include "simcompose/systems.hpp"

#include <algorithm>
#include <sstream>

#include "simcompose/error.hpp"

namespace simcompose::systems {

std::optional<ColumnBlock> LinearSystem::input_block(int peer) const {
  Eigen::Index offset = 0;
  for (const auto& in : internal_inputs) {
    if (in.peer == peer) return ColumnBlock{offset, in.width};
    offset += in.width;
  }
  return std::nullopt;
}

Matrix LinearSystem::output_to(int peer) const {
  const auto it = internal_outputs.find(peer);
  if (it == internal_outputs.end()) return Matrix(0, n());
  return it->second;
}

std::vector<Matrix> LinearSystem::output_blocks() const {
  std::vector<Matrix> blocks{C_ext};
  for (const auto& [peer, C] : internal_outputs) blocks.push_back(C);
  return blocks;
}

Matrix LinearSystem::stacked_outputs() const {
  Eigen::Index rows = 0;
  for (const auto& b : output_blocks()) rows += b.rows();
  Matrix out(rows, n());
  Eigen::Index r = 0;
  for (const auto& b : output_blocks()) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

void LinearSystem::check_shapes() const {
  auto fail = [&](const std::string& what) {
    throw DimensionError("system '" + name + "': " + what);
  };
  const Eigen::Index nn = A.rows();
  if (A.cols() != nn) fail("A is not square");
  if (B.rows() != nn) fail("B row count differs from state dimension");
  if (D.rows() != nn) fail("D row count differs from state dimension");
  if (C_ext.cols() != nn) fail("C column count differs from state dimension");
  for (const auto& [peer, C] : internal_outputs) {
    if (C.cols() != nn) fail("internal output to peer " + std::to_string(peer) + " has wrong column count");
  }
  Eigen::Index total = 0;
  int last_peer = -1;
  for (const auto& in : internal_inputs) {
    if (in.width < 0) fail("negative internal input width");
    if (in.peer <= last_peer) fail("internal inputs must be sorted by peer without repeats");
    last_peer = in.peer;
    total += in.width;
  }
  if (total != D.cols()) fail("internal input widths do not partition the columns of D");
}

std::vector<Violation> validate(const Interconnection& ic) {
  std::vector<Violation> out;
  const int N = ic.size();
  auto add = [&](int i, int j, const std::string& msg) {
    std::ostringstream os;
    os << "channel (" << i + 1 << "," << j + 1 << "): " << msg;
    out.push_back({i, j, os.str()});
  };
  for (int i = 0; i < N; ++i) {
    const auto& sys = ic.subsystems[i];
    for (const auto& in : sys.internal_inputs) {
      if (in.peer == i) add(i, i, "self channels are not allowed");
      else if (in.peer < 0 || in.peer >= N) add(i, in.peer, "input references a missing subsystem");
    }
    for (const auto& [peer, C] : sys.internal_outputs) {
      if (peer == i) add(i, i, "self channels are not allowed");
      else if (peer < 0 || peer >= N) add(peer, i, "output references a missing subsystem");
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const auto block = ic.subsystems[i].input_block(j);
      const Eigen::Index width = block ? block->width : 0;
      const Eigen::Index rows = ic.subsystems[j].output_to(i).rows();
      if (width != rows) {
        std::ostringstream os;
        os << "width of w_" << i + 1 << j + 1 << " is " << width << " but C_" << j + 1 << i + 1
           << " has " << rows << " rows";
        add(i, j, os.str());
      }
    }
  }
  return out;
}

MonolithicSystem build_monolithic(const Interconnection& ic) {
  for (const auto& s : ic.subsystems) s.check_shapes();
  const auto violations = validate(ic);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "interconnection is invalid:";
    for (const auto& v : violations) os << "\n  " << v.message;
    throw ValidationError(os.str());
  }
  MonolithicSystem mono;
  Eigen::Index n = 0, m = 0, q = 0;
  for (const auto& s : ic.subsystems) {
    mono.state_offsets.push_back(n);
    mono.input_offsets.push_back(m);
    mono.output_offsets.push_back(q);
    n += s.n();
    m += s.m();
    q += s.C_ext.rows();
  }
  mono.A = Matrix::Zero(n, n);
  mono.B = Matrix::Zero(n, m);
  mono.C = Matrix::Zero(q, n);
  for (int i = 0; i < ic.size(); ++i) {
    const auto& s = ic.subsystems[i];
    const Eigen::Index xi = mono.state_offsets[i];
    mono.A.block(xi, xi, s.n(), s.n()) = s.A;
    mono.B.block(xi, mono.input_offsets[i], s.n(), s.m()) = s.B;
    mono.C.block(mono.output_offsets[i], xi, s.C_ext.rows(), s.n()) = s.C_ext;
    for (const auto& in : s.internal_inputs) {
      if (in.width == 0) continue;
      const auto block = *s.input_block(in.peer);
      const auto& src = ic.subsystems[in.peer];
      mono.A.block(xi, mono.state_offsets[in.peer], s.n(), src.n()) +=
          s.D.middleCols(block.offset, block.width) * src.output_to(i);
    }
  }
  return mono;
}

Vector gather_internal_inputs(const Interconnection& ic, int i, const std::vector<Vector>& states) {
  const auto& s = ic.subsystems[i];
  Vector w(s.p());
  Eigen::Index offset = 0;
  for (const auto& in : s.internal_inputs) {
    if (in.width > 0) {
      w.segment(offset, in.width) = ic.subsystems[in.peer].output_to(i) * states[in.peer];
    }
    offset += in.width;
  }
  return w;
}

}  // namespace simcompose::systems

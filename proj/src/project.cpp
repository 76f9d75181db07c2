#include "simcompose/project.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "simcompose/error.hpp"
#include "simcompose/geometry.hpp"

namespace simcompose::project {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "non-finite number");
  return v;
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Vector get_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = get_number(j[k], where + "[" + std::to_string(k) + "]");
  }
  return v;
}

ExprMatrix get_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  std::vector<Entry> entries;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array()) fail(rw, "expected a row array");
    const auto c = static_cast<Eigen::Index>(j[r].size());
    if (cols >= 0 && c != cols) fail(rw, "ragged matrix rows");
    cols = c;
    for (std::size_t k = 0; k < j[r].size(); ++k) {
      const std::string ew = rw + "[" + std::to_string(k) + "]";
      const json& e = j[r][k];
      if (e.is_number()) {
        entries.push_back({get_number(e, ew), ""});
      } else if (e.is_string()) {
        const auto parsed = parse_entry(e.get<std::string>());
        if (!parsed) fail(ew, "cannot read entry \"" + e.get<std::string>() + "\"");
        entries.push_back(*parsed);
      } else {
        fail(ew, "expected a number or a parameter string");
      }
    }
  }
  return ExprMatrix(rows, std::max<Eigen::Index>(cols, 0), std::move(entries));
}

json put_matrix(const ExprMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const Entry& e = m.entries()[static_cast<std::size_t>(r * m.cols() + c)];
      if (e.param.empty()) {
        row.push_back(e.coeff);
      } else {
        row.push_back(format_entry(e));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json put_vector(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

// Empty literals ([] or [[]]) stand for any matrix with a zero dimension.
Matrix fit(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (m.rows() == rows && m.cols() == cols) return m;
  if (m.size() == 0 && (rows == 0 || cols == 0)) return Matrix(rows, cols);
  std::ostringstream os;
  os << where << ": expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
  throw ParseError(os.str());
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

int peer_index(const std::string& key, int count, const std::string& where) {
  std::size_t used = 0;
  int peer = 0;
  try {
    peer = std::stoi(key, &used);
  } catch (const std::exception&) {
    fail(where, "peer \"" + key + "\" is not a subsystem number");
  }
  if (used != key.size()) fail(where, "peer \"" + key + "\" is not a subsystem number");
  if (peer < 1 || peer > count) fail(where, "peer " + key + " out of range");
  return peer - 1;
}

SignalSpec get_signal(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a signal object");
  SignalSpec s;
  const json* kind = find(j, "kind");
  if (kind == nullptr) fail(where, "missing \"kind\"");
  const std::string k = get_string(*kind, where + ".kind");
  if (k == "zero") {
    s.kind = SignalSpec::Kind::Zero;
  } else if (k == "constant" || k == "square") {
    s.kind = k == "constant" ? SignalSpec::Kind::Constant : SignalSpec::Kind::Square;
    const json* a = find(j, "amplitude");
    if (a == nullptr) fail(where, "missing \"amplitude\"");
    s.amplitude = a->is_number() ? Vector::Constant(1, get_number(*a, where + ".amplitude"))
                                 : get_vector(*a, where + ".amplitude");
    if (s.kind == SignalSpec::Kind::Square) {
      const json* p = find(j, "period");
      if (p == nullptr) fail(where, "missing \"period\"");
      s.period = get_number(*p, where + ".period");
      if (!(s.period > 0.0)) fail(where + ".period", "must be positive");
    }
  } else if (k == "samples") {
    s.kind = SignalSpec::Kind::Samples;
    const json* t = find(j, "times");
    const json* v = find(j, "values");
    if (t == nullptr || v == nullptr) fail(where, "samples need \"times\" and \"values\"");
    const Vector times = get_vector(*t, where + ".times");
    s.times.assign(times.data(), times.data() + times.size());
    if (!v->is_array() || v->size() != s.times.size()) {
      fail(where + ".values", "expected one value per sample time");
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      const std::string ew = where + ".values[" + std::to_string(i) + "]";
      s.values.push_back(e.is_number() ? Vector::Constant(1, get_number(e, ew)) : get_vector(e, ew));
    }
    for (std::size_t i = 1; i < s.times.size(); ++i) {
      if (!(s.times[i] > s.times[i - 1])) fail(where + ".times", "must be strictly increasing");
    }
  } else {
    fail(where + ".kind", "unknown signal kind \"" + k + "\"");
  }
  return s;
}

json put_signal(const SignalSpec& s) {
  json j;
  switch (s.kind) {
    case SignalSpec::Kind::Zero:
      j["kind"] = "zero";
      break;
    case SignalSpec::Kind::Constant:
      j["kind"] = "constant";
      j["amplitude"] = put_vector(s.amplitude);
      break;
    case SignalSpec::Kind::Square:
      j["kind"] = "square";
      j["amplitude"] = put_vector(s.amplitude);
      j["period"] = s.period;
      break;
    case SignalSpec::Kind::Samples: {
      j["kind"] = "samples";
      j["times"] = s.times;
      json values = json::array();
      for (const auto& v : s.values) values.push_back(put_vector(v));
      j["values"] = std::move(values);
      break;
    }
  }
  return j;
}

}  // namespace

std::optional<Entry> parse_entry(std::string_view text) {
  static const std::regex re(
      R"(^\s*([+-])?\s*((?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)?\s*\*?\s*([A-Za-z_][A-Za-z0-9_]*)\s*$)");
  std::cmatch m;
  if (!std::regex_match(text.data(), text.data() + text.size(), m, re)) return std::nullopt;
  Entry e;
  e.coeff = m[2].matched ? std::stod(m[2].str()) : 1.0;
  if (m[1].matched && m[1].str() == "-") e.coeff = -e.coeff;
  e.param = m[3].str();
  return e;
}

std::string format_entry(const Entry& e) {
  if (e.param.empty()) return format_double(e.coeff);
  if (e.coeff == 1.0) return e.param;
  if (e.coeff == -1.0) return "-" + e.param;
  return format_double(e.coeff) + "*" + e.param;
}

ExprMatrix::ExprMatrix(Eigen::Index rows, Eigen::Index cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (static_cast<Eigen::Index>(entries_.size()) != rows_ * cols_) {
    throw DimensionError("ExprMatrix: entry count does not match shape");
  }
}

ExprMatrix ExprMatrix::literal(const Matrix& m) {
  std::vector<Entry> entries;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c), ""});
  }
  return ExprMatrix(m.rows(), m.cols(), std::move(entries));
}

Matrix ExprMatrix::eval(const Parameters& params, std::string_view where) const {
  Matrix m(rows_, cols_);
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (Eigen::Index c = 0; c < cols_; ++c) {
      const Entry& e = entries_[static_cast<std::size_t>(r * cols_ + c)];
      if (e.param.empty()) {
        m(r, c) = e.coeff;
        continue;
      }
      const auto it = params.find(e.param);
      if (it == params.end()) {
        throw ParseError(std::string(where) + ": unknown parameter \"" + e.param + "\"");
      }
      m(r, c) = e.coeff * it->second;
    }
  }
  return m;
}

simulate::Signal SignalSpec::build(Eigen::Index width, double t_final) const {
  auto check = [&](const Vector& v) {
    if (v.size() != width) {
      throw ParseError("simulation input: width " + std::to_string(v.size()) +
                       " does not match abstract input width " + std::to_string(width));
    }
  };
  switch (kind) {
    case Kind::Zero:
      return simulate::Signal::zero(width);
    case Kind::Constant:
      check(amplitude);
      return simulate::Signal::constant(amplitude);
    case Kind::Square:
      check(amplitude);
      return simulate::Signal::square_wave(amplitude, period, t_final);
    case Kind::Samples:
      for (const auto& v : values) check(v);
      return simulate::Signal::piecewise_constant(times, values);
  }
  return simulate::Signal::zero(width);
}

systems::Interconnection ProjectFile::interconnection() const {
  systems::Interconnection ic;
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    const SubsystemSpec& s = subsystems[i];
    const std::string where = "subsystems[" + std::to_string(i) + "]";
    systems::LinearSystem sys;
    sys.name = s.name;
    sys.A = s.A.eval(parameters, where + ".A");
    const Eigen::Index n = sys.A.rows();
    if (sys.A.cols() != n) throw ParseError(where + ".A: must be square");
    sys.B = s.has_B ? s.B.eval(parameters, where + ".B") : Matrix(n, 0);
    sys.B = fit(sys.B, n, sys.B.size() == 0 ? 0 : sys.B.cols(), where + ".B");
    sys.C_ext = s.C.eval(parameters, where + ".C");
    sys.C_ext = fit(sys.C_ext, sys.C_ext.size() == 0 ? 0 : sys.C_ext.rows(), n, where + ".C");
    Eigen::Index p = 0;
    for (const auto& in : s.inputs) p += in.width;
    sys.D = s.has_D ? s.D.eval(parameters, where + ".D") : Matrix(n, 0);
    sys.D = fit(sys.D, n, p, where + ".D");
    for (const auto& [peer, C] : s.outputs) {
      const std::string ow = where + ".outputs." + std::to_string(peer + 1);
      const Matrix Cm = C.eval(parameters, ow);
      sys.internal_outputs[peer] = fit(Cm, Cm.size() == 0 ? 0 : Cm.rows(), n, ow);
    }
    sys.internal_inputs = s.inputs;
    try {
      sys.check_shapes();
    } catch (const DimensionError& e) {
      throw ParseError(where + ": " + e.what());
    }
    ic.subsystems.push_back(std::move(sys));
  }
  return ic;
}

Matrix ProjectFile::resolve_P(int i, const systems::LinearSystem& sys) const {
  const SubsystemSpec& s = subsystems.at(static_cast<std::size_t>(i));
  const std::string where = "subsystems[" + std::to_string(i) + "].abstraction";
  switch (s.abstraction.method) {
    case PMethod::Given: {
      const Matrix P = s.abstraction.P->eval(parameters, where + ".P");
      if (P.rows() != sys.n()) {
        throw ParseError(where + ".P: expected " + std::to_string(sys.n()) + " rows");
      }
      return P;
    }
    case PMethod::MinimalInvariant: {
      const auto S = geometry::minimal_invariant(sys.A, geometry::image(sys.D));
      if (S.dim() == 0) {
        throw ValidationError(where + ": minimal invariant subspace containing im D is zero");
      }
      return S.basis();
    }
    case PMethod::Identity:
      return Matrix::Identity(sys.n(), sys.n());
  }
  return Matrix::Identity(sys.n(), sys.n());
}

std::optional<abstraction::DecayCertificate> ProjectFile::injected_certificate(
    int i, const systems::LinearSystem& sys) const {
  const SubsystemSpec& s = subsystems.at(static_cast<std::size_t>(i));
  const auto& d = s.abstraction;
  if (!d.M) return std::nullopt;
  const std::string where = "subsystems[" + std::to_string(i) + "].abstraction";
  const Matrix M = fit(d.M->eval(parameters, where + ".M"), sys.n(), sys.n(), where + ".M");
  const Matrix K1 = fit(d.K1->eval(parameters, where + ".K1"), sys.m(), sys.n(), where + ".K1");
  try {
    return abstraction::DecayCertificate{linalg::SpdMatrix(M), K1, *d.lambda};
  } catch (const NumericalError& e) {
    throw ValidationError(where + ".M: " + e.what());
  }
}

ProjectFile parse(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": invalid JSON";
    throw ParseError(os.str());
  }
  if (!root.is_object()) fail("document", "expected a JSON object");

  ProjectFile pf;
  if (const json* n = find(root, "name")) pf.name = get_string(*n, "name");
  if (const json* params = find(root, "parameters")) {
    if (!params->is_object()) fail("parameters", "expected an object");
    for (const auto& [key, value] : params->items()) {
      if (!parse_entry(key) || parse_entry(key)->coeff != 1.0 || parse_entry(key)->param != key) {
        fail("parameters", "invalid parameter name \"" + key + "\"");
      }
      pf.parameters[key] = get_number(value, "parameters." + key);
    }
  }

  const json* subs = find(root, "subsystems");
  if (subs == nullptr || !subs->is_array()) fail("subsystems", "expected an array");
  if (subs->empty()) fail("subsystems", "at least one subsystem is required");
  const int count = static_cast<int>(subs->size());
  for (int i = 0; i < count; ++i) {
    const json& js = (*subs)[static_cast<std::size_t>(i)];
    const std::string where = "subsystems[" + std::to_string(i) + "]";
    if (!js.is_object()) fail(where, "expected an object");
    SubsystemSpec s;
    s.name = find(js, "name") ? get_string(js["name"], where + ".name") : "S" + std::to_string(i + 1);
    const json* A = find(js, "A");
    if (A == nullptr) fail(where, "missing \"A\"");
    s.A = get_matrix(*A, where + ".A");
    if (const json* B = find(js, "B")) {
      s.B = get_matrix(*B, where + ".B");
      s.has_B = true;
    }
    const json* C = find(js, "C");
    if (C == nullptr) fail(where, "missing \"C\"");
    s.C = get_matrix(*C, where + ".C");
    if (const json* D = find(js, "D")) {
      s.D = get_matrix(*D, where + ".D");
      s.has_D = true;
    }
    if (const json* outs = find(js, "outputs")) {
      if (!outs->is_object()) fail(where + ".outputs", "expected an object keyed by peer");
      for (const auto& [key, value] : outs->items()) {
        const int peer = peer_index(key, count, where + ".outputs");
        s.outputs[peer] = get_matrix(value, where + ".outputs." + key);
      }
    }
    if (const json* ins = find(js, "inputs")) {
      if (!ins->is_array()) fail(where + ".inputs", "expected an array");
      for (std::size_t k = 0; k < ins->size(); ++k) {
        const std::string iw = where + ".inputs[" + std::to_string(k) + "]";
        const json& e = (*ins)[k];
        if (!e.is_object() || !find(e, "from") || !find(e, "width")) {
          fail(iw, "expected {\"from\": peer, \"width\": w}");
        }
        const int peer = get_int(e["from"], iw + ".from");
        if (peer < 1 || peer > count) fail(iw + ".from", "peer out of range");
        const int width = get_int(e["width"], iw + ".width");
        if (width < 0) fail(iw + ".width", "must be non-negative");
        s.inputs.push_back({peer - 1, width});
      }
      for (std::size_t k = 1; k < s.inputs.size(); ++k) {
        if (s.inputs[k].peer <= s.inputs[k - 1].peer) {
          fail(where + ".inputs", "peers must be listed in increasing order without repeats");
        }
      }
    }
    if (const json* abs = find(js, "abstraction")) {
      const std::string aw = where + ".abstraction";
      if (!abs->is_object()) fail(aw, "expected an object");
      auto& d = s.abstraction;
      const json* P = find(*abs, "P");
      const json* method = find(*abs, "method");
      const std::string m = method ? get_string(*method, aw + ".method") : (P ? "given" : "identity");
      if (m == "given") {
        if (P == nullptr) fail(aw, "method \"given\" needs \"P\"");
        d.method = PMethod::Given;
        d.P = get_matrix(*P, aw + ".P");
      } else if (m == "minimal_invariant" || m == "identity") {
        if (P != nullptr) fail(aw, "\"P\" is only allowed with method \"given\"");
        d.method = m == "identity" ? PMethod::Identity : PMethod::MinimalInvariant;
      } else {
        fail(aw + ".method", "unknown method \"" + m + "\"");
      }
      const json* M = find(*abs, "M");
      const json* K1 = find(*abs, "K1");
      const json* lambda = find(*abs, "lambda");
      const int given = (M != nullptr) + (K1 != nullptr) + (lambda != nullptr);
      if (given != 0 && given != 3) fail(aw, "\"M\", \"K1\" and \"lambda\" must be given together");
      if (given == 3) {
        d.M = get_matrix(*M, aw + ".M");
        d.K1 = get_matrix(*K1, aw + ".K1");
        d.lambda = get_number(*lambda, aw + ".lambda");
        if (!(*d.lambda > 0.0)) fail(aw + ".lambda", "must be positive");
      }
    }
    pf.subsystems.push_back(std::move(s));
  }

  if (const json* comp = find(root, "compose")) {
    if (!comp->is_object()) fail("compose", "expected an object");
    if (const json* eta = find(*comp, "eta")) {
      pf.compose.eta = get_vector(*eta, "compose.eta");
      if (pf.compose.eta->size() != count) fail("compose.eta", "one entry per subsystem");
    }
    if (const json* eps = find(*comp, "epsilon")) pf.compose.epsilon = get_number(*eps, "compose.epsilon");
  }

  if (const json* sim = find(root, "simulation")) {
    if (!sim->is_object()) fail("simulation", "expected an object");
    auto& s = pf.simulation;
    if (const json* t = find(*sim, "t_final")) s.t_final = get_number(*t, "simulation.t_final");
    if (const json* h = find(*sim, "dt")) s.dt = get_number(*h, "simulation.dt");
    if (!(s.dt > 0.0) || !(s.t_final >= 0.0)) fail("simulation", "dt must be positive, t_final non-negative");
    if (const json* x0 = find(*sim, "x0")) {
      if (x0->is_string()) {
        if (x0->get<std::string>() != "on_manifold") fail("simulation.x0", "expected \"on_manifold\" or an array");
      } else {
        s.x0_on_manifold = false;
        s.x0 = get_vector(*x0, "simulation.x0");
      }
    }
    if (const json* xh = find(*sim, "xhat0")) s.xhat0 = get_vector(*xh, "simulation.xhat0");
    if (const json* ins = find(*sim, "inputs")) {
      if (!ins->is_object()) fail("simulation.inputs", "expected an object keyed by subsystem");
      for (const auto& [key, value] : ins->items()) {
        const int i = peer_index(key, count, "simulation.inputs");
        s.inputs[i] = get_signal(value, "simulation.inputs." + key);
      }
    }
  }
  return pf;
}

ProjectFile load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string serialize(const ProjectFile& pf) {
  json root;
  if (!pf.name.empty()) root["name"] = pf.name;
  json params = json::object();
  for (const auto& [k, v] : pf.parameters) params[k] = v;
  root["parameters"] = std::move(params);
  json subs = json::array();
  for (const auto& s : pf.subsystems) {
    json js;
    js["name"] = s.name;
    js["A"] = put_matrix(s.A);
    if (s.has_B) js["B"] = put_matrix(s.B);
    js["C"] = put_matrix(s.C);
    if (s.has_D) js["D"] = put_matrix(s.D);
    if (!s.outputs.empty()) {
      json outs = json::object();
      for (const auto& [peer, C] : s.outputs) outs[std::to_string(peer + 1)] = put_matrix(C);
      js["outputs"] = std::move(outs);
    }
    if (!s.inputs.empty()) {
      json ins = json::array();
      for (const auto& in : s.inputs) ins.push_back({{"from", in.peer + 1}, {"width", in.width}});
      js["inputs"] = std::move(ins);
    }
    json abs;
    switch (s.abstraction.method) {
      case PMethod::Given:
        abs["method"] = "given";
        abs["P"] = put_matrix(*s.abstraction.P);
        break;
      case PMethod::MinimalInvariant:
        abs["method"] = "minimal_invariant";
        break;
      case PMethod::Identity:
        abs["method"] = "identity";
        break;
    }
    if (s.abstraction.M) {
      abs["M"] = put_matrix(*s.abstraction.M);
      abs["K1"] = put_matrix(*s.abstraction.K1);
      abs["lambda"] = *s.abstraction.lambda;
    }
    js["abstraction"] = std::move(abs);
    subs.push_back(std::move(js));
  }
  root["subsystems"] = std::move(subs);
  if (pf.compose.eta || pf.compose.epsilon) {
    json comp;
    if (pf.compose.eta) comp["eta"] = put_vector(*pf.compose.eta);
    if (pf.compose.epsilon) comp["epsilon"] = *pf.compose.epsilon;
    root["compose"] = std::move(comp);
  }
  const auto& s = pf.simulation;
  json sim;
  sim["t_final"] = s.t_final;
  sim["dt"] = s.dt;
  if (s.x0_on_manifold) {
    sim["x0"] = "on_manifold";
  } else {
    sim["x0"] = put_vector(s.x0);
  }
  if (s.xhat0.size() > 0) sim["xhat0"] = put_vector(s.xhat0);
  if (!s.inputs.empty()) {
    json ins = json::object();
    for (const auto& [i, sig] : s.inputs) ins[std::to_string(i + 1)] = put_signal(sig);
    sim["inputs"] = std::move(ins);
  }
  root["simulation"] = std::move(sim);
  return root.dump(2) + "\n";
}

}  // namespace simcompose::project

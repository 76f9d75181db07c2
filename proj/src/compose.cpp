#include "simcompose/compose.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "simcompose/error.hpp"

namespace simcompose::compose {

namespace {

constexpr double kEpsilonCap = 1e3;
constexpr double kStrictness = 0.99;
constexpr int kPowerIterations = 20000;

bool strongly_connected(const Matrix& G) {
  const Eigen::Index N = G.rows();
  if (N <= 1) return N == 1 && G(0, 0) > 0.0;
  auto reach_all = [&](bool transpose) {
    std::vector<bool> seen(static_cast<std::size_t>(N), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      for (Eigen::Index u = 0; u < N; ++u) {
        const double e = transpose ? G(u, v) : G(v, u);
        if (e > 0.0 && !seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = true;
          stack.push_back(u);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach_all(false) && reach_all(true);
}

// Power iteration on (G + I); converges for irreducible or positive G since
// the shift removes the peripheral spectrum of cyclic matrices.
struct PowerResult {
  Vector vec;
  double value = 0.0;
  bool converged = false;
};

PowerResult shifted_power_iteration(const Matrix& G) {
  const Eigen::Index N = G.rows();
  const Matrix S = G + Matrix::Identity(N, N);
  PowerResult out;
  out.vec = Vector::Ones(N) / static_cast<double>(N);
  for (int k = 0; k < kPowerIterations; ++k) {
    Vector next = S * out.vec;
    const double scale = next.sum();
    next /= scale;
    const double change = (next - out.vec).cwiseAbs().maxCoeff();
    out.vec = next;
    out.value = scale - 1.0;
    if (change < 1e-14) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::vector<int> dominant_cycle(const Matrix& G) {
  const int N = static_cast<int>(G.rows());
  std::vector<int> best;
  double best_gain = -1.0;
  std::vector<int> path;
  std::vector<bool> on_path(static_cast<std::size_t>(N), false);
  long budget = 200000;
  // Edge j -> i carries G(i, j): mismatch of j drives subsystem i.
  std::function<void(int, int, double)> dfs = [&](int start, int v, double log_gain) {
    if (--budget < 0) return;
    for (int u = start; u < N; ++u) {
      const double g = G(u, v);
      if (g <= 0.0) continue;
      if (u == start) {
        const double mean = std::exp((log_gain + std::log(g)) / static_cast<double>(path.size()));
        if (mean > best_gain) {
          best_gain = mean;
          best = path;
        }
      } else if (!on_path[static_cast<std::size_t>(u)]) {
        on_path[static_cast<std::size_t>(u)] = true;
        path.push_back(u);
        dfs(start, u, log_gain + std::log(g));
        path.pop_back();
        on_path[static_cast<std::size_t>(u)] = false;
      }
    }
  };
  for (int s = 0; s < N; ++s) {
    path = {s};
    on_path.assign(static_cast<std::size_t>(N), false);
    on_path[static_cast<std::size_t>(s)] = true;
    dfs(s, s, 0.0);
  }
  return best;
}

}  // namespace

Matrix GainMatrices::scaled() const {
  return Gamma * lambdas.cwiseInverse().asDiagonal();
}

GainMatrices gain_matrices(const systems::Interconnection& ic,
                           const std::vector<abstraction::ComparisonGains>& gains) {
  const int N = ic.size();
  if (static_cast<int>(gains.size()) != N) {
    throw ValidationError("gain_matrices: one set of gains per subsystem is required");
  }
  GainMatrices gm;
  gm.Gamma = Matrix::Zero(N, N);
  gm.lambdas.resize(N);
  gm.rhos.resize(N);
  for (int i = 0; i < N; ++i) {
    const auto& sys = ic.subsystems[i];
    const auto& g = gains[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(g.mu_coeffs.size()) != sys.p()) {
      std::ostringstream os;
      os << "gain_matrices: subsystem " << i + 1 << " has " << g.mu_coeffs.size()
         << " mu-coefficients for " << sys.p() << " internal input columns";
      throw ValidationError(os.str());
    }
    if (!(g.lambda > 0.0)) throw ValidationError("gain_matrices: lambda must be positive");
    gm.lambdas(i) = g.lambda;
    gm.rhos(i) = g.rho;
    Eigen::Index col = 0;
    for (const auto& in : sys.internal_inputs) {
      for (int k = 0; k < in.width; ++k, ++col) {
        gm.Gamma(i, in.peer) += g.mu_coeffs[static_cast<std::size_t>(col)] / g.alpha;
      }
    }
  }
  return gm;
}

double omega_path_margin(const GainMatrices& gm, const Vector& eta, double epsilon) {
  const Vector image = (1.0 + epsilon) * (gm.scaled() * eta);
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    margin = std::min(margin, (eta(i) - image(i)) / eta(i));
  }
  return margin;
}

Vector normalize_eta(const Vector& eta, const Vector& lambdas) {
  const double s = std::sqrt(static_cast<double>(eta.size())) *
                   eta.cwiseQuotient(lambdas).maxCoeff();
  return eta / s;
}

SmallGainResult small_gain(const GainMatrices& gm) {
  const Eigen::Index N = gm.size();
  SmallGainResult out;
  if (N == 0) return out;
  const Matrix G = gm.scaled();
  if ((G.array() < 0.0).any()) throw ValidationError("small_gain: negative gain entries");

  const double dense_radius = linalg::eigenvalues(G, "Gamma Lambda^-1").radius;
  Vector eta;
  if (strongly_connected(G)) {
    const PowerResult pr = shifted_power_iteration(G);
    const bool agrees = std::abs(pr.value - dense_radius) <= 1e-8 * std::max(1.0, dense_radius);
    out.spectral_radius = pr.converged && agrees ? pr.value : dense_radius;
    eta = pr.vec;
  } else {
    out.spectral_radius = dense_radius;
    const double delta = 1e-9 * std::max(1.0, G.maxCoeff());
    eta = shifted_power_iteration(G + Matrix::Constant(N, N, delta)).vec;
  }
  if (out.spectral_radius >= 1.0) {
    out.dominant_cycle = dominant_cycle(G);
    return out;
  }

  OmegaPath path;
  path.eta = normalize_eta(eta, gm.lambdas);
  path.epsilon = out.spectral_radius > 0.0
                     ? std::min(kEpsilonCap, kStrictness * (1.0 / out.spectral_radius - 1.0))
                     : kEpsilonCap;
  path.margin = omega_path_margin(gm, path.eta, path.epsilon);
  if (!(path.margin > 0.0)) {
    // Shrink epsilon to what this eta actually admits.
    const Vector Geta = G * path.eta;
    double admissible = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < N; ++i) {
      if (Geta(i) > 0.0) admissible = std::min(admissible, path.eta(i) / Geta(i) - 1.0);
    }
    if (!(admissible > 0.0)) {
      out.dominant_cycle = dominant_cycle(G);
      return out;
    }
    path.epsilon = std::min(kEpsilonCap, kStrictness * admissible);
    path.margin = omega_path_margin(gm, path.eta, path.epsilon);
    if (!(path.margin > 0.0)) return out;
  }
  out.path = path;
  return out;
}

Vector ComposedSimFn::part_values(const std::vector<Vector>& xhat,
                                  const std::vector<Vector>& x) const {
  if (xhat.size() != parts.size() || x.size() != parts.size()) {
    throw DimensionError("ComposedSimFn: one state per subsystem is required");
  }
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = abstraction::eval_simfn(parts[i], xhat[i], x[i]);
  }
  return v;
}

double ComposedSimFn::operator()(const std::vector<Vector>& xhat,
                                 const std::vector<Vector>& x) const {
  return weights.cwiseProduct(part_values(xhat, x)).maxCoeff();
}

ComposedSimFn compose_simfn(const std::vector<abstraction::QuadraticSimFn>& parts,
                            const GainMatrices& gm, const OmegaPath& path) {
  const Eigen::Index N = gm.size();
  if (static_cast<Eigen::Index>(parts.size()) != N || path.eta.size() != N) {
    throw DimensionError("compose_simfn: sizes of parts, gains and path differ");
  }
  if ((path.eta.array() <= 0.0).any() || !(path.epsilon > 0.0)) {
    throw ValidationError("compose_simfn: eta must be positive and epsilon > 0");
  }
  ComposedSimFn out;
  out.parts = parts;
  out.eta = path.eta;
  out.epsilon = path.epsilon;
  out.weights = gm.lambdas.cwiseQuotient(path.eta);
  const double shrink = path.epsilon / (1.0 + path.epsilon);
  out.lambda = gm.lambdas.minCoeff() * shrink;
  out.rho = gm.rhos.cwiseProduct(out.weights).maxCoeff();
  out.alpha = 1.0 / (std::sqrt(static_cast<double>(N)) * path.eta.cwiseQuotient(gm.lambdas).maxCoeff());
  return out;
}

systems::Interconnection compose_abstractions(
    const systems::Interconnection& ic, const std::vector<abstraction::AbstractionResult>& results) {
  if (static_cast<int>(results.size()) != ic.size()) {
    throw ValidationError("compose_abstractions: one abstraction per subsystem is required");
  }
  systems::Interconnection out;
  for (int i = 0; i < ic.size(); ++i) {
    const auto& concrete = ic.subsystems[static_cast<std::size_t>(i)];
    const auto& abs = results[static_cast<std::size_t>(i)].abstract_system;
    bool same = abs.internal_inputs.size() == concrete.internal_inputs.size();
    for (std::size_t k = 0; same && k < abs.internal_inputs.size(); ++k) {
      same = abs.internal_inputs[k].peer == concrete.internal_inputs[k].peer &&
             abs.internal_inputs[k].width == concrete.internal_inputs[k].width;
    }
    for (const auto& [peer, C] : concrete.internal_outputs) {
      same = same && abs.output_to(peer).rows() == C.rows();
    }
    if (!same) {
      throw ValidationError("compose_abstractions: channel topology of abstraction " +
                            std::to_string(i + 1) + " differs from the concrete subsystem");
    }
    out.subsystems.push_back(abs);
  }
  const auto violations = systems::validate(out);
  if (!violations.empty()) {
    throw ValidationError("compose_abstractions: " + violations.front().message);
  }
  return out;
}

}  // namespace simcompose::compose

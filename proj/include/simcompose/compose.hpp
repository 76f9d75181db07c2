#pragma once

#include <optional>
#include <vector>

#include "simcompose/abstraction.hpp"
#include "simcompose/systems.hpp"

namespace simcompose::compose {

struct GainMatrices {
  Matrix Gamma;    // N x N, Gamma(i,j) = summed mu-coefficients of i over channels from j
  Vector lambdas;  // diagonal of Lambda
  Vector rhos;

  Eigen::Index size() const { return Gamma.rows(); }
  /// Gamma * Lambda^{-1}, the operator of the small-gain condition.
  Matrix scaled() const;
};

GainMatrices gain_matrices(const systems::Interconnection& ic,
                           const std::vector<abstraction::ComparisonGains>& gains);

/// Linear Omega-path sigma_i(r) = eta_i r with common margin epsilon.
struct OmegaPath {
  Vector eta;
  double epsilon = 0.0;
  /// min_i (eta - (1+eps) Gamma Lambda^{-1} eta)_i / eta_i; positive iff valid.
  double margin = 0.0;
};

/// Literal check of (1 + eps) Gamma Lambda^{-1} eta < eta, componentwise.
double omega_path_margin(const GainMatrices& gm, const Vector& eta, double epsilon);

struct SmallGainResult {
  double spectral_radius = 0.0;
  std::optional<OmegaPath> path;  // empty on failure
  /// On failure: a cycle of subsystems (0-based) carrying the largest
  /// geometric-mean loop gain.
  std::vector<int> dominant_cycle;
  bool ok() const { return path.has_value(); }
};

SmallGainResult small_gain(const GainMatrices& gm);

/// Scales eta so that sqrt(N) max_i eta_i / lambda_i = 1 (composed alpha = 1).
Vector normalize_eta(const Vector& eta, const Vector& lambdas);

struct ComposedSimFn {
  std::vector<abstraction::QuadraticSimFn> parts;
  Vector weights;  // lambda_i / eta_i
  double lambda = 0.0;
  double rho = 0.0;
  /// |zeta_hat - zeta| <= V / alpha.
  double alpha = 1.0;
  Vector eta;
  double epsilon = 0.0;

  Vector part_values(const std::vector<Vector>& xhat, const std::vector<Vector>& x) const;
  double operator()(const std::vector<Vector>& xhat, const std::vector<Vector>& x) const;
};

ComposedSimFn compose_simfn(const std::vector<abstraction::QuadraticSimFn>& parts,
                            const GainMatrices& gm, const OmegaPath& path);

/// Abstract interconnection with the concrete channel topology.
systems::Interconnection compose_abstractions(
    const systems::Interconnection& ic, const std::vector<abstraction::AbstractionResult>& results);

}  // namespace simcompose::compose

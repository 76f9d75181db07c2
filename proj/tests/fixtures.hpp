#pragma once

#include <random>
#include <string>
#include <vector>

#include "simcompose/commands.hpp"
#include "simcompose/project.hpp"

namespace simcompose::testing {

inline Matrix random_matrix(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random Hurwitz matrix with spectral abscissa at most -margin.
inline Matrix random_hurwitz(std::mt19937& rng, Eigen::Index n, double margin) {
  Matrix R = random_matrix(rng, n, n) / std::sqrt(static_cast<double>(n));
  Eigen::EigenSolver<Matrix> es(R, false);
  const double shift = es.eigenvalues().real().maxCoeff() + margin;
  return R - shift * Matrix::Identity(n, n);
}

inline project::ProjectFile example_project() {
  return project::parse(project::bundled_example());
}

/// Same four-subsystem topology as the bundled example with random coupling
/// strengths, oscillator damping, abstract inputs and initial abstract state.
/// Certificates are computed by the library.
inline project::ProjectFile random_example_instance(std::mt19937& rng) {
  project::ProjectFile pf = example_project();
  pf.parameters["d1"] = uniform(rng, 0.05, 1.0);
  pf.parameters["d2"] = uniform(rng, 0.05, 1.0);
  pf.parameters["d3"] = uniform(rng, 0.05, 1.0);
  for (int i : {1, 3}) {
    // A = [0 1; -a -b] with a = 2b - 4 keeps (1; -2) an eigenvector (eigenvalue -2).
    const double b = uniform(rng, 2.5, 7.0);
    Matrix A(2, 2);
    A << 0.0, 1.0, -(2.0 * b - 4.0), -b;
    pf.subsystems[static_cast<std::size_t>(i)].A = project::ExprMatrix::literal(A);
  }
  for (auto& s : pf.subsystems) {
    s.abstraction.M.reset();
    s.abstraction.K1.reset();
    s.abstraction.lambda.reset();
  }
  pf.simulation.xhat0 = Vector(4);
  for (Eigen::Index k = 0; k < 4; ++k) pf.simulation.xhat0(k) = uniform(rng, -1.0, 1.0);

  // Piecewise-constant uhat with |uhat(t)| <= 0.1 for the stacked vector.
  pf.simulation.inputs.clear();
  const int switches = uniform_int(rng, 2, 12);
  std::vector<double> times{0.0};
  for (int k = 1; k < switches; ++k) times.push_back(times.back() + uniform(rng, 0.2, 3.0));
  std::vector<Vector> v1, v3;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double r = uniform(rng, 0.0, 0.1);
    const double phi = uniform(rng, 0.0, 6.283185307179586);
    v1.push_back(Vector::Constant(1, r * std::cos(phi)));
    v3.push_back(Vector::Constant(1, r * std::sin(phi)));
  }
  project::SignalSpec s1, s3;
  s1.kind = s3.kind = project::SignalSpec::Kind::Samples;
  s1.times = s3.times = times;
  s1.values = v1;
  s3.values = v3;
  pf.simulation.inputs[0] = s1;
  pf.simulation.inputs[2] = s3;
  return pf;
}

/// Random system with k + m = n, so that im P + im B = R^n holds generically.
struct RandomAbstractionCase {
  systems::LinearSystem sys;
  Matrix P;
};

inline RandomAbstractionCase random_abstraction_case(std::mt19937& rng) {
  RandomAbstractionCase c;
  const int n = uniform_int(rng, 2, 6);
  const int m = uniform_int(rng, 1, n - 1);
  const int k = n - m;
  const int q = uniform_int(rng, 1, k);
  const int p = uniform_int(rng, 0, 2);
  c.sys.name = "random";
  c.sys.A = random_matrix(rng, n, n);
  c.sys.B = random_matrix(rng, n, m);
  c.sys.C_ext = random_matrix(rng, q, n);
  c.sys.D = random_matrix(rng, n, p);
  if (p > 0) {
    c.sys.internal_inputs.push_back({1, p});
  }
  c.P = random_matrix(rng, n, k);
  return c;
}

}  // namespace simcompose::testing

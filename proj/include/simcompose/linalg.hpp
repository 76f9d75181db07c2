#pragma once

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace simcompose {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Relative factor used for every rank decision. Defaults to 1e-9 and can be
/// overridden through the SIMCOMPOSE_TOL environment variable.
double rank_tol_factor();

/// rank_tol = factor * max(rows, cols) * ||A||_2.
double rank_tol(const Matrix& A);

double spectral_norm(const Matrix& A);
int rank(const Matrix& A);

/// Symmetric positive semi-definite matrix. Construction checks symmetry and
/// the eigenvalue lower bound -tol * max(1, ||M||); the stored matrix is the
/// exact symmetric part of the input.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& M, double tol = 1e-9);

  const Matrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }
  double tol() const { return tol_; }

  /// Symmetric square root via eigendecomposition (negative noise clamped).
  Matrix sqrt() const;
  double min_eigenvalue() const;

 private:
  Matrix m_;
  double tol_;
};

struct Spectrum {
  std::vector<std::complex<double>> values;
  double abscissa = 0.0;  // max Re
  double radius = 0.0;    // max |.|
};

/// Dense eigenvalues of a square matrix. Throws NumericalError naming the
/// matrix if the QR iteration does not converge.
Spectrum eigenvalues(const Matrix& A, std::string_view name = "matrix");

bool is_hurwitz(const Matrix& A);

/// Solves A^T M + M A = -Q (Bartels-Stewart on the complex Schur form).
SpdMatrix solve_lyapunov(const Matrix& A, const SpdMatrix& Q);

/// Residual ||A^T M + M A + Q||_F.
double lyapunov_residual(const Matrix& A, const Matrix& M, const Matrix& Q);

struct PbhResult {
  bool stabilizable = true;
  std::optional<std::complex<double>> witness;
};

/// rank [A - sI, B] == n for every eigenvalue s of A with Re s >= 0.
PbhResult pbh_stabilizable(const Matrix& A, const Matrix& B);

/// Returns K with A + BK Hurwitz. K = 0 when A is already Hurwitz; otherwise a
/// Bass-type construction on the controllable part of the non-stable modes,
/// leaving the stable eigenvalues of A in place.
Matrix stabilize(const Matrix& A, const Matrix& B);

/// Spectral norm of M^{1/2} X.
double weighted_norm(const SpdMatrix& M, const Matrix& X);

struct LeastSquaresResult {
  Matrix solution;
  double residual = 0.0;  // ||A X - B||_F
  bool consistent = false;
};

/// Minimum-norm least-squares solution of A X = B via a complete orthogonal
/// decomposition thresholded at rank_tol(A).
LeastSquaresResult least_squares(const Matrix& A, const Matrix& B);

/// Orthonormal basis of the column space / null space, rank decided with the
/// absolute threshold `tol` (defaults to rank_tol(A)).
Matrix orth(const Matrix& A, std::optional<double> tol = std::nullopt);
Matrix null_space(const Matrix& A, std::optional<double> tol = std::nullopt);

/// Smallest generalized eigenvalue bound: the least c with N <= c * M for
/// symmetric N and positive definite M.
double generalized_max_eigenvalue(const Matrix& N, const Matrix& M);

}  // namespace linalg
}  // namespace simcompose

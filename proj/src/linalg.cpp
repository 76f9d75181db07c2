#include "simcompose/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "simcompose/error.hpp"

namespace simcompose::linalg {

namespace {

constexpr double kDefaultRankFactor = 1e-9;

// Eigenvalues this close to the imaginary axis are treated as non-stable in
// the PBH test; defective zero eigenvalues come back perturbed by roughly
// eps^(1/k).
double marginal_band(const Matrix& A) {
  return 1e-8 * std::max(1.0, spectral_norm(A));
}

Eigen::JacobiSVD<Matrix> full_svd(const Matrix& A) {
  return Eigen::JacobiSVD<Matrix>(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

}  // namespace

double rank_tol_factor() {
  static const double factor = [] {
    if (const char* env = std::getenv("SIMCOMPOSE_TOL")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end != env && std::isfinite(v) && v > 0.0) return v;
    }
    return kDefaultRankFactor;
  }();
  return factor;
}

double spectral_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

double rank_tol(const Matrix& A) {
  const auto dim = static_cast<double>(std::max(A.rows(), A.cols()));
  return rank_tol_factor() * dim * spectral_norm(A);
}

int rank(const Matrix& A) {
  if (A.size() == 0) return 0;
  const double tol = rank_tol(A);
  Eigen::JacobiSVD<Matrix> svd(A);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++r;
  }
  return r;
}

SpdMatrix::SpdMatrix(const Matrix& M, double tol) : tol_(tol) {
  if (M.rows() != M.cols()) {
    throw DimensionError("SpdMatrix: matrix is not square");
  }
  if (!M.allFinite()) {
    throw NumericalError("SpdMatrix: non-finite entries");
  }
  const double scale = M.size() == 0 ? 1.0 : std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = M.size() == 0 ? 0.0 : (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    std::ostringstream os;
    os << "SpdMatrix: asymmetry " << asym << " exceeds tolerance";
    throw NumericalError(os.str());
  }
  m_ = 0.5 * (M + M.transpose());
  if (m_.size() > 0 && min_eigenvalue() < -tol * std::max(1.0, spectral_norm(m_))) {
    std::ostringstream os;
    os << "SpdMatrix: indefinite (min eigenvalue " << min_eigenvalue() << ")";
    throw NumericalError(os.str());
  }
}

double SpdMatrix::min_eigenvalue() const {
  if (m_.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix SpdMatrix::sqrt() const {
  if (m_.size() == 0) return m_;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Spectrum eigenvalues(const Matrix& A, std::string_view name) {
  if (A.rows() != A.cols()) {
    throw DimensionError(std::string(name) + ": eigenvalues of a non-square matrix");
  }
  Spectrum out;
  if (A.size() == 0) {
    out.abscissa = -std::numeric_limits<double>::infinity();
    return out;
  }
  if (!A.allFinite()) {
    throw NumericalError(std::string(name) + ": non-finite entries");
  }
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue iteration did not converge for " + std::string(name));
  }
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.values.begin(), out.values.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  out.abscissa = -std::numeric_limits<double>::infinity();
  for (const auto& v : out.values) {
    out.abscissa = std::max(out.abscissa, v.real());
    out.radius = std::max(out.radius, std::abs(v));
  }
  return out;
}

bool is_hurwitz(const Matrix& A) {
  if (A.size() == 0) return true;
  return eigenvalues(A).abscissa < -1e-12 * std::max(1.0, spectral_norm(A));
}

double lyapunov_residual(const Matrix& A, const Matrix& M, const Matrix& Q) {
  return (A.transpose() * M + M * A + Q).norm();
}

SpdMatrix solve_lyapunov(const Matrix& A, const SpdMatrix& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Q.size() != n) {
    throw DimensionError("solve_lyapunov: dimension mismatch");
  }
  if (n == 0) return SpdMatrix(Matrix(0, 0));
  if (!is_hurwitz(A)) {
    throw NumericalError("solve_lyapunov: unstable matrix");
  }
  // Bartels-Stewart on the complex Schur form A = U T U^H: with Y = U^H M U,
  // T^H Y + Y T = -U^H Q U is solved entrywise by forward substitution.
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::ComplexSchur<CMatrix> schur(A.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw NumericalError("solve_lyapunov: Schur decomposition did not converge");
  }
  const CMatrix& T = schur.matrixT();
  const CMatrix& U = schur.matrixU();
  const CMatrix C = -U.adjoint() * Q.matrix().cast<std::complex<double>>() * U;
  const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, spectral_norm(A));
  CMatrix Y = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      std::complex<double> s = C(i, j);
      for (Eigen::Index k = 0; k < i; ++k) s -= std::conj(T(k, i)) * Y(k, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= Y(i, k) * T(k, j);
      const std::complex<double> d = std::conj(T(i, i)) + T(j, j);
      if (std::abs(d) <= floor) throw NumericalError("solve_lyapunov: singular system");
      Y(i, j) = s / d;
    }
  }
  Matrix M = (U * Y * U.adjoint()).real();
  M = 0.5 * (M + M.transpose());
  return SpdMatrix(M, 1e-8);
}

PbhResult pbh_stabilizable(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) {
    throw DimensionError("pbh_stabilizable: dimension mismatch");
  }
  PbhResult result;
  if (n == 0) return result;
  const double band = marginal_band(A);
  for (const auto& s : eigenvalues(A, "A").values) {
    if (s.real() < -band) continue;
    Eigen::MatrixXcd H(n, n + B.cols());
    H.leftCols(n) = A.cast<std::complex<double>>();
    H.leftCols(n).diagonal().array() -= s;
    H.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
    const double tol = rank_tol_factor() * static_cast<double>(n + B.cols()) *
                       std::max(1.0, svd.singularValues()(0));
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > tol) ++r;
    }
    if (r < n) {
      result.stabilizable = false;
      result.witness = s;
      return result;
    }
  }
  return result;
}

namespace {

// Givens pair (c, s) with c f + s g = r and -conj(s) f + c g = 0.
std::pair<double, std::complex<double>> givens(std::complex<double> f, std::complex<double> g) {
  if (g == 0.0) return {1.0, 0.0};
  if (f == 0.0) return {0.0, std::conj(g) / std::abs(g)};
  const double d = std::hypot(std::abs(f), std::abs(g));
  return {std::abs(f) / d, (f / std::abs(f)) * std::conj(g) / d};
}

// Orthonormal real basis Z of the left invariant subspace of A belonging to
// eigenvalues with Re s >= -band, so that Z^T A = (Z^T A Z) Z^T. Reorders a
// complex Schur form of A^T by adjacent swaps.
Matrix nonstable_left_basis(const Matrix& A, double band) {
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = A.rows();
  Eigen::ComplexSchur<CMatrix> schur(A.transpose().cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw NumericalError("stabilize: Schur decomposition did not converge");
  }
  CMatrix T = schur.matrixT();
  CMatrix U = schur.matrixU();
  auto swap = [&](Eigen::Index k) {
    const std::complex<double> t11 = T(k, k), t22 = T(k + 1, k + 1);
    const auto [c, sn] = givens(T(k, k + 1), t22 - t11);
    for (Eigen::Index j = k + 2; j < n; ++j) {
      const std::complex<double> x = T(k, j), y = T(k + 1, j);
      T(k, j) = c * x + sn * y;
      T(k + 1, j) = c * y - std::conj(sn) * x;
    }
    const std::complex<double> cs = std::conj(sn);
    for (Eigen::Index i = 0; i < k; ++i) {
      const std::complex<double> x = T(i, k), y = T(i, k + 1);
      T(i, k) = c * x + cs * y;
      T(i, k + 1) = c * y - std::conj(cs) * x;
    }
    T(k, k) = t22;
    T(k + 1, k + 1) = t11;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> x = U(i, k), y = U(i, k + 1);
      U(i, k) = c * x + cs * y;
      U(i, k + 1) = c * y - std::conj(cs) * x;
    }
  };
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (T(j, j).real() < -band) continue;
    for (Eigen::Index k = j; k > r; --k) swap(k - 1);
    ++r;
  }
  if (r == 0) return Matrix(n, 0);
  Matrix parts(n, 2 * r);
  parts << U.leftCols(r).real(), U.leftCols(r).imag();
  Eigen::JacobiSVD<Matrix> svd(parts, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(r);
}

}  // namespace

Matrix stabilize(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n) {
    throw DimensionError("stabilize: dimension mismatch");
  }
  if (is_hurwitz(A)) return Matrix::Zero(m, n);

  auto fail = [&] {
    const auto pbh = pbh_stabilizable(A, B);
    std::ostringstream os;
    os << "stabilize: (A,B) is not stabilizable";
    if (pbh.witness) os << ", uncontrollable eigenvalue " << pbh.witness->real()
                        << (pbh.witness->imag() >= 0 ? "+" : "") << pbh.witness->imag() << "i";
    throw ValidationError(os.str());
  };

  // Only the non-stable modes are moved: with K = Ku Z^T the stable part of
  // the spectrum is kept and Z^T (A + B K) = (Au + Bu Ku) Z^T.
  const Matrix Z = nonstable_left_basis(A, marginal_band(A));
  const Matrix Au = Z.transpose() * A * Z;
  const Matrix Bu = Z.transpose() * B;
  const Eigen::Index nu = Au.rows();

  // Controllable subspace by Krylov growth; Au is rescaled so the rank
  // tolerance is relative to the orthonormal basis already found.
  const double a_scale = std::max(1.0, spectral_norm(Au));
  const double tol = rank_tol_factor() * static_cast<double>(nu);
  Matrix V = orth(Bu / std::max(1e-300, spectral_norm(Bu)), tol);
  for (Eigen::Index k = 0; k < nu && V.cols() < nu && V.cols() > 0; ++k) {
    Matrix grown(nu, 2 * V.cols());
    grown << V, (Au * V) / a_scale;
    Matrix next = orth(grown, tol);
    if (next.cols() == V.cols()) break;
    V = std::move(next);
  }
  if (V.cols() == 0) fail();

  const Matrix Ac = V.transpose() * Au * V;
  const Matrix Bc = V.transpose() * Bu;
  const Eigen::Index k = Ac.rows();
  // Smallest shift making -(Ac + beta I) Hurwitz, plus one; larger shifts
  // only worsen the conditioning of the Gramian below.
  const double beta = std::max(0.0, -eigenvalues(Ac, "Ac").values.back().real()) + 1.0;
  // (Ac + beta I) P + P (Ac + beta I)^T = 2 Bc Bc^T, i.e. the Lyapunov form
  // X^T P + P X = -2 Bc Bc^T with X = -(Ac + beta I)^T Hurwitz.
  const Matrix X = -(Ac + beta * Matrix::Identity(k, k)).transpose();
  const SpdMatrix P = solve_lyapunov(X, SpdMatrix(2.0 * Bc * Bc.transpose(), 1e-8));
  Eigen::FullPivLU<Matrix> lu(P.matrix());
  if (!lu.isInvertible()) fail();
  const Matrix K = -Bc.transpose() * lu.inverse() * V.transpose() * Z.transpose();
  if (!is_hurwitz(A + B * K)) fail();
  return K;
}

double weighted_norm(const SpdMatrix& M, const Matrix& X) {
  if (X.rows() != M.size()) {
    throw DimensionError("weighted_norm: dimension mismatch");
  }
  return spectral_norm(M.sqrt() * X);
}

LeastSquaresResult least_squares(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) {
    throw DimensionError("least_squares: row mismatch");
  }
  LeastSquaresResult out;
  out.solution = Matrix::Zero(A.cols(), B.cols());
  if (A.size() > 0 && B.cols() > 0) {
    const auto svd = full_svd(A);
    const double tol = rank_tol(A);
    const Vector& s = svd.singularValues();
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol) inv(i) = 1.0 / s(i);
    }
    const Eigen::Index r = s.size();
    out.solution = svd.matrixV().leftCols(r) * inv.asDiagonal() *
                   svd.matrixU().leftCols(r).transpose() * B;
  }
  out.residual = B.size() == 0 ? 0.0 : (A * out.solution - B).norm();
  out.consistent = out.residual <= 1e-9 * B.norm();
  return out;
}

Matrix orth(const Matrix& A, std::optional<double> tol) {
  if (A.size() == 0) return Matrix(A.rows(), 0);
  const double t = tol.value_or(rank_tol(A));
  const auto svd = full_svd(A);
  Eigen::Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > t) ++r;
  return svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& A, std::optional<double> tol) {
  if (A.cols() == 0) return Matrix(0, 0);
  if (A.rows() == 0) return Matrix::Identity(A.cols(), A.cols());
  const double t = tol.value_or(rank_tol(A));
  const auto svd = full_svd(A);
  Eigen::Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > t) ++r;
  return svd.matrixV().rightCols(A.cols() - r);
}

double generalized_max_eigenvalue(const Matrix& N, const Matrix& M) {
  if (N.size() == 0) return 0.0;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(
      0.5 * (N + N.transpose()), 0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) {
    throw NumericalError("generalized eigenvalue problem failed (M not positive definite?)");
  }
  return ges.eigenvalues()(ges.eigenvalues().size() - 1);
}

}  // namespace simcompose::linalg

#include "simcompose/geometry.hpp"

#include <algorithm>
#include <utility>

#include "simcompose/error.hpp"

namespace simcompose::geometry {

namespace {

double dimensionless_tol(Eigen::Index rows, Eigen::Index cols) {
  return linalg::rank_tol_factor() * static_cast<double>(std::max<Eigen::Index>({rows, cols, 1}));
}

void require_same_ambient(const Subspace& S, const Subspace& T, const char* what) {
  if (S.ambient_dim() != T.ambient_dim()) {
    throw DimensionError(std::string(what) + ": ambient dimension mismatch");
  }
}

}  // namespace

Subspace::Subspace(Matrix orthonormal_basis, double tol)
    : basis_(std::move(orthonormal_basis)), tol_(tol) {}

Subspace Subspace::zero(Eigen::Index ambient_dim) {
  return Subspace(Matrix(ambient_dim, 0), dimensionless_tol(ambient_dim, ambient_dim));
}

Subspace Subspace::full(Eigen::Index ambient_dim) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim),
                  dimensionless_tol(ambient_dim, ambient_dim));
}

Subspace Subspace::span(const Matrix& spanning) { return image(spanning); }

Matrix Subspace::complement_basis() const {
  const Eigen::Index n = ambient_dim();
  const Eigen::Index k = dim();
  if (k == 0) return Matrix::Identity(n, n);
  if (k == n) return Matrix(n, 0);
  Eigen::HouseholderQR<Matrix> qr(basis_);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  return Q.rightCols(n - k);
}

double Subspace::residual(const Matrix& vectors) const {
  if (vectors.rows() != ambient_dim()) {
    throw DimensionError("Subspace::residual: dimension mismatch");
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double nrm = vectors.col(j).norm();
    if (nrm == 0.0) continue;
    const Vector v = vectors.col(j) / nrm;
    const Vector r = v - basis_ * (basis_.transpose() * v);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

bool Subspace::contains_vectors(const Matrix& vectors) const {
  return residual(vectors) <= tol_;
}

Subspace image(const Matrix& A) {
  return Subspace(linalg::orth(A), dimensionless_tol(A.rows(), A.cols()));
}

Subspace kernel(const Matrix& A) {
  return Subspace(linalg::null_space(A), dimensionless_tol(A.rows(), A.cols()));
}

Subspace sum(const Subspace& S, const Subspace& T) {
  require_same_ambient(S, T, "sum");
  const double tol = std::max(S.tol(), T.tol());
  Matrix both(S.ambient_dim(), S.dim() + T.dim());
  both << S.basis(), T.basis();
  return Subspace(linalg::orth(both, tol), tol);
}

Subspace intersection(const Subspace& S, const Subspace& T) {
  require_same_ambient(S, T, "intersection");
  const double tol = std::max(S.tol(), T.tol());
  const Matrix Sc = S.complement_basis();
  const Matrix Tc = T.complement_basis();
  Matrix perp(S.ambient_dim(), Sc.cols() + Tc.cols());
  perp << Sc, Tc;
  const Subspace perp_space(linalg::orth(perp, tol), tol);
  return Subspace(perp_space.complement_basis(), tol);
}

bool contains(const Subspace& S, const Subspace& T) {
  require_same_ambient(S, T, "contains");
  return S.residual(T.basis()) <= std::max(S.tol(), T.tol());
}

Subspace apply(const Matrix& A, const Subspace& S) {
  if (A.cols() != S.ambient_dim()) {
    throw DimensionError("apply: dimension mismatch");
  }
  const double tol = dimensionless_tol(A.rows(), A.cols());
  const double abs_tol = tol * linalg::spectral_norm(A);
  return Subspace(linalg::orth(A * S.basis(), abs_tol), std::max(tol, S.tol()));
}

std::vector<Subspace> minimal_invariant_chain(const Matrix& A, const Subspace& seed) {
  if (A.rows() != A.cols() || A.rows() != seed.ambient_dim()) {
    throw DimensionError("minimal_invariant: dimension mismatch");
  }
  std::vector<Subspace> chain{seed};
  for (Eigen::Index k = 0; k <= A.rows(); ++k) {
    Subspace next = sum(seed, apply(A, chain.back()));
    if (next.dim() == chain.back().dim()) break;
    chain.push_back(std::move(next));
  }
  return chain;
}

Subspace minimal_invariant(const Matrix& A, const Subspace& seed) {
  return minimal_invariant_chain(A, seed).back();
}

double invariance_residual(const Matrix& A_closed, const Subspace& R) {
  if (R.dim() == 0 || R.dim() == R.ambient_dim()) return 0.0;
  const Matrix W = R.complement_basis();
  return linalg::spectral_norm(W.transpose() * A_closed * R.basis());
}

std::optional<Matrix> friend_feedback(const Matrix& A, const Matrix& B, const Subspace& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || R.ambient_dim() != n) {
    throw DimensionError("friend_feedback: dimension mismatch");
  }
  Matrix K = Matrix::Zero(B.cols(), n);
  if (R.dim() == 0 || R.dim() == n) return K;
  const Matrix& V = R.basis();
  const Matrix W = R.complement_basis();
  // W^T (A + B K) V = 0 with Z = K V, K = Z V^T.
  const auto ls = linalg::least_squares(W.transpose() * B, -W.transpose() * A * V);
  K = ls.solution * V.transpose();
  const double limit = std::max(R.tol(), dimensionless_tol(n, n)) *
                       std::max(1.0, linalg::spectral_norm(A));
  if (invariance_residual(A + B * K, R) > limit) return std::nullopt;
  return K;
}

QuotientData quotient(const Matrix& A_closed, const Subspace& R) {
  const Eigen::Index n = A_closed.rows();
  if (A_closed.cols() != n || R.ambient_dim() != n) {
    throw DimensionError("quotient: dimension mismatch");
  }
  const double limit = std::max(R.tol(), dimensionless_tol(n, n)) *
                       std::max(1.0, linalg::spectral_norm(A_closed));
  if (invariance_residual(A_closed, R) > limit) {
    throw ValidationError("quotient: subspace is not invariant under the closed-loop matrix");
  }
  const Matrix& V = R.basis();
  const Matrix W = R.complement_basis();
  QuotientData q;
  q.T.resize(n, n);
  q.T << V, W;
  q.T_inv = q.T.transpose();
  q.F11 = V.transpose() * A_closed * V;
  q.F12 = V.transpose() * A_closed * W;
  q.F22 = W.transpose() * A_closed * W;
  q.Pi = W.transpose();
  return q;
}

bool externally_stabilizable(const Matrix& A, const Matrix& B, const Subspace& R) {
  const auto K0 = friend_feedback(A, B, R);
  if (!K0) throw ValidationError("externally_stabilizable: not controlled invariant");
  const QuotientData q = quotient(A + B * *K0, R);
  return linalg::pbh_stabilizable(q.F22, q.Pi * B).stabilizable;
}

std::optional<Matrix> stabilizing_friend(const Matrix& A, const Matrix& B, const Subspace& R) {
  const auto K0 = friend_feedback(A, B, R);
  if (!K0) return std::nullopt;
  const QuotientData q = quotient(A + B * *K0, R);
  const Matrix PiB = q.Pi * B;
  if (!linalg::pbh_stabilizable(q.F22, PiB).stabilizable) return std::nullopt;
  const Matrix Kq = linalg::stabilize(q.F22, PiB);
  return Matrix(*K0 + Kq * q.Pi);
}

}  // namespace simcompose::geometry

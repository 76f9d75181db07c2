#pragma once

#include <optional>
#include <vector>

#include "simcompose/linalg.hpp"

namespace simcompose::geometry {

/// A linear subspace of R^n stored as an orthonormal basis. All containment
/// decisions use the stored tolerance, which is inherited from the rank
/// tolerance of whatever matrix produced the subspace.
class Subspace {
 public:
  Subspace(Matrix orthonormal_basis, double tol);

  static Subspace zero(Eigen::Index ambient_dim);
  static Subspace full(Eigen::Index ambient_dim);
  /// Orthonormalizes the columns of `spanning`; rank decided at rank_tol.
  static Subspace span(const Matrix& spanning);

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  double tol() const { return tol_; }

  Matrix projector() const { return basis_ * basis_.transpose(); }
  /// Orthonormal basis of the orthogonal complement.
  Matrix complement_basis() const;

  /// Largest distance of a unit column of `vectors` from this subspace.
  double residual(const Matrix& vectors) const;
  bool contains_vectors(const Matrix& vectors) const;

 private:
  Matrix basis_;
  double tol_;
};

Subspace image(const Matrix& A);
Subspace kernel(const Matrix& A);

Subspace sum(const Subspace& S, const Subspace& T);
Subspace intersection(const Subspace& S, const Subspace& T);
/// True iff T is a subset of S.
bool contains(const Subspace& S, const Subspace& T);
/// A * S, rank decided relative to ||A|| so that exact zero products vanish.
Subspace apply(const Matrix& A, const Subspace& S);

/// Fixpoint chain S_0 = seed, S_{k+1} = seed + A S_k up to stabilization.
std::vector<Subspace> minimal_invariant_chain(const Matrix& A, const Subspace& seed);
Subspace minimal_invariant(const Matrix& A, const Subspace& seed);

/// A feedback K with (A + B K) R contained in R, or nullopt if R is not
/// (A,B)-controlled invariant. Minimum-Frobenius-norm choice.
std::optional<Matrix> friend_feedback(const Matrix& A, const Matrix& B, const Subspace& R);

/// Largest residual of (A + B K) R outside R.
double invariance_residual(const Matrix& A_closed, const Subspace& R);

struct QuotientData {
  Matrix T;      // [T1 T2], orthogonal
  Matrix T_inv;  // rows [T1bar; T2bar]
  Matrix F11;
  Matrix F12;
  Matrix F22;
  Matrix Pi;     // = T2bar
};

/// Block-triangular form of A_closed relative to an invariant subspace R.
/// Throws ValidationError if R is not A_closed-invariant.
QuotientData quotient(const Matrix& A_closed, const Subspace& R);

/// Decides (A,B)-external stabilizability of a controlled invariant R: fix
/// one friend K0, then test the quotient pair (F22, Pi B) with PBH. The
/// residual freedom K0 + K' with K' R = 0 acts on the quotient exactly
/// through Pi B, so this test is sound and complete.
bool externally_stabilizable(const Matrix& A, const Matrix& B, const Subspace& R);

/// A friend that additionally makes the quotient dynamics Hurwitz.
std::optional<Matrix> stabilizing_friend(const Matrix& A, const Matrix& B, const Subspace& R);

}  // namespace simcompose::geometry

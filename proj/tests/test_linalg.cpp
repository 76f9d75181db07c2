#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "simcompose/error.hpp"
#include "simcompose/linalg.hpp"

using namespace simcompose;
using namespace simcompose::linalg;
using simcompose::testing::random_hurwitz;
using simcompose::testing::random_matrix;

TEST(Rank, IdentityAndRankDeficient) {
  EXPECT_EQ(rank(Matrix::Identity(3, 3)), 3);
  Matrix A(3, 3);
  A << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  EXPECT_EQ(rank(A), 2);
  EXPECT_EQ(rank(Matrix(3, 0)), 0);
  EXPECT_EQ(rank(Matrix::Zero(2, 2)), 0);
}

TEST(SpdMatrixTest, RejectsIndefiniteAndAsymmetric) {
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  EXPECT_THROW(SpdMatrix{bad}, NumericalError);
  Matrix asym(2, 2);
  asym << 1, 1, 0, 1;
  EXPECT_THROW(SpdMatrix{asym}, NumericalError);
  EXPECT_THROW(SpdMatrix{Matrix(2, 3)}, DimensionError);
}

TEST(SpdMatrixTest, SquareRoot) {
  Matrix M(2, 2);
  M << 26, 10, 10, 4;
  const SpdMatrix S(M);
  const Matrix r = S.sqrt();
  EXPECT_LT((r * r - M).norm(), 1e-12);
  EXPECT_NEAR(S.min_eigenvalue(), 15.0 - std::sqrt(221.0), 1e-12);
}

TEST(Eigenvalues, OscillatorSpectrum) {
  Matrix A(2, 2);
  A << 0, 1, -6, -5;
  const auto s = eigenvalues(A);
  EXPECT_NEAR(s.abscissa, -2.0, 1e-12);
  EXPECT_NEAR(s.radius, 3.0, 1e-12);
  EXPECT_TRUE(is_hurwitz(A));
  EXPECT_FALSE(is_hurwitz(Matrix::Zero(2, 2)));
}

TEST(Lyapunov, ScalarClosedForm) {
  // -2 m = -1 for A = -1.
  const auto M = solve_lyapunov(-Matrix::Identity(1, 1), SpdMatrix(Matrix::Identity(1, 1)));
  EXPECT_NEAR(M.matrix()(0, 0), 0.5, 1e-14);
}

TEST(Lyapunov, RandomResiduals) {
  std::mt19937 rng(3);
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 6;
    const Matrix A = random_hurwitz(rng, n, 0.5);
    const Matrix Q = Matrix::Identity(n, n);
    const auto M = solve_lyapunov(A, SpdMatrix(Q));
    EXPECT_LT(lyapunov_residual(A, M.matrix(), Q), 1e-8);
    EXPECT_GT(M.min_eigenvalue(), 0.0);
  }
}

TEST(Lyapunov, UnstableMatrixIsRejected) {
  EXPECT_THROW(solve_lyapunov(Matrix::Identity(2, 2), SpdMatrix(Matrix::Identity(2, 2))),
               NumericalError);
}

TEST(Pbh, UncontrollableUnstableMode) {
  Matrix A(2, 2);
  A << 1, 0, 0, -1;
  Matrix B(2, 1);
  B << 0, 1;
  const auto r = pbh_stabilizable(A, B);
  EXPECT_FALSE(r.stabilizable);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(r.witness->real(), 1.0, 1e-12);
  EXPECT_THROW(stabilize(A, B), ValidationError);
}

TEST(Pbh, UncontrollableStableModeIsFine) {
  Matrix A(2, 2);
  A << -1, 0, 0, 1;
  Matrix B(2, 1);
  B << 0, 1;
  EXPECT_TRUE(pbh_stabilizable(A, B).stabilizable);
  const Matrix K = stabilize(A, B);
  EXPECT_TRUE(is_hurwitz(A + B * K));
}

TEST(Stabilize, TripleIntegratorAndRandomPairs) {
  Matrix A(3, 3);
  A << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  Matrix B(3, 1);
  B << 0, 0, 1;
  EXPECT_TRUE(is_hurwitz(A + B * stabilize(A, B)));
  std::mt19937 rng(5);
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 6;
    const int m = 1 + k % 2;
    const Matrix A2 = random_matrix(rng, n, n) + Matrix::Identity(n, n);
    const Matrix B2 = random_matrix(rng, n, m);
    EXPECT_TRUE(is_hurwitz(A2 + B2 * stabilize(A2, B2)));
  }
}

TEST(Stabilize, KeepsStableModes) {
  // Modes -3 and -0.5 stay; the unstable mode 2 is moved.
  Matrix A(3, 3);
  A << 2, 1, 0, 0, -3, 1, 0, 0, -0.5;
  const Matrix B = Matrix::Ones(3, 1);
  const Matrix K = stabilize(A, B);
  const auto spec = eigenvalues(A + B * K);
  ASSERT_LT(spec.abscissa, 0.0);
  int kept = 0;
  for (const auto& s : spec.values) {
    if (std::abs(s - (-3.0)) < 1e-8 || std::abs(s - (-0.5)) < 1e-8) ++kept;
  }
  EXPECT_EQ(kept, 2);
}

TEST(Stabilize, UncontrollableStableModeIsAllowed) {
  Matrix A(2, 2);
  A << 1, 0, 0, -1;
  Matrix B(2, 1);
  B << 1, 0;
  EXPECT_TRUE(is_hurwitz(A + B * stabilize(A, B)));
}

TEST(Lyapunov, NonNormalClosedLoop) {
  // Strongly non-normal Hurwitz matrix; the residual must stay at roundoff
  // relative to |A| |M|.
  Matrix A(4, 4);
  A << -1, 1e3, 0, 0, 0, -1, 1e3, 0, 0, 0, -1, 1e3, 0, 0, 0, -1;
  const auto M = solve_lyapunov(A, SpdMatrix(Matrix::Identity(4, 4)));
  const double scale = spectral_norm(A) * spectral_norm(M.matrix());
  EXPECT_LT(lyapunov_residual(A, M.matrix(), Matrix::Identity(4, 4)), 1e-12 * scale);
}

TEST(Stabilize, HurwitzNeedsNoFeedback) {
  Matrix A(2, 2);
  A << 0, 1, -6, -5;
  EXPECT_EQ(stabilize(A, Matrix(2, 0)).size(), 0);
  EXPECT_TRUE(stabilize(A, Matrix::Ones(2, 1)).isZero());
}

TEST(LeastSquares, ConsistentAndInconsistent) {
  Matrix A(3, 2);
  A << 1, 0, 0, 1, 0, 0;
  Matrix b(3, 1);
  b << 1, 2, 0;
  auto r = least_squares(A, b);
  EXPECT_TRUE(r.consistent);
  EXPECT_NEAR(r.solution(1, 0), 2.0, 1e-14);
  b(2, 0) = 1.0;
  r = least_squares(A, b);
  EXPECT_FALSE(r.consistent);
  EXPECT_NEAR(r.residual, 1.0, 1e-14);
}

TEST(LeastSquares, MinimumNormOnRankDeficient) {
  Matrix A(2, 2);
  A << 1, 1, 1, 1;
  Matrix b(2, 1);
  b << 2, 2;
  const auto r = least_squares(A, b);
  EXPECT_TRUE(r.consistent);
  EXPECT_NEAR(r.solution(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(r.solution(1, 0), 1.0, 1e-12);
}

TEST(Subspaces, OrthAndNullSpace) {
  Matrix A(2, 3);
  A << 1, 0, 1, 0, 1, 1;
  const Matrix N = null_space(A);
  ASSERT_EQ(N.cols(), 1);
  EXPECT_LT((A * N).norm(), 1e-12);
  const Matrix O = orth(A.transpose());
  EXPECT_EQ(O.cols(), 2);
  EXPECT_LT((O.transpose() * O - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(WeightedNorm, MatchesQuadraticForm) {
  Matrix M(2, 2);
  M << 26, 10, 10, 4;
  Vector d(2);
  d << -1, 2;
  EXPECT_NEAR(weighted_norm(SpdMatrix(M), d), std::sqrt(d.dot(M * d)), 1e-12);
  EXPECT_NEAR(weighted_norm(SpdMatrix(M), d), std::sqrt(2.0), 1e-12);
}

TEST(GeneralizedEigenvalue, OutputBound) {
  Matrix N = Matrix::Zero(2, 2);
  N(0, 0) = 1.0;
  const Matrix M = 2.0 * Matrix::Identity(2, 2);
  EXPECT_NEAR(generalized_max_eigenvalue(N, M), 0.5, 1e-14);
}

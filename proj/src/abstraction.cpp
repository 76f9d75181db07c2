#include "simcompose/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "simcompose/error.hpp"

namespace simcompose::abstraction {

namespace {

constexpr double kScaleMargin = 1.01;

double min_sym_eigenvalue(const Matrix& S) {
  if (S.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix hcat(const Matrix& L, const Matrix& R) {
  Matrix out(L.rows(), L.cols() + R.cols());
  out << L, R;
  return out;
}

Matrix vcat(const Matrix& T, const Matrix& B) {
  Matrix out(T.rows() + B.rows(), T.cols());
  out << T, B;
  return out;
}

Matrix block_diag(const Matrix& X, const Matrix& Y) {
  Matrix out = Matrix::Zero(X.rows() + Y.rows(), X.cols() + Y.cols());
  out.topLeftCorner(X.rows(), X.cols()) = X;
  out.bottomRightCorner(Y.rows(), Y.cols()) = Y;
  return out;
}

// M = c M0 where M0 solves the Lyapunov equation of the shifted closed loop and
// c is the least scalar with C_k^T C_k <= c M0 for all blocks (plus margin).
SpdMatrix scaled_lyapunov_metric(const Matrix& A_closed, double lambda,
                                 std::span<const Matrix> blocks) {
  const Eigen::Index n = A_closed.rows();
  const Matrix shifted = A_closed + lambda * Matrix::Identity(n, n);
  const SpdMatrix M0 = linalg::solve_lyapunov(shifted, SpdMatrix(Matrix::Identity(n, n)));
  double c = 0.0;
  for (const auto& Ck : blocks) {
    if (Ck.rows() == 0) continue;
    c = std::max(c, linalg::generalized_max_eigenvalue(Ck.transpose() * Ck, M0.matrix()));
  }
  return SpdMatrix(kScaleMargin * c * M0.matrix(), 1e-8);
}

// Keeps a maximal linearly independent subset of columns, scanning left to right.
std::vector<Eigen::Index> independent_columns(const Matrix& X) {
  std::vector<Eigen::Index> kept;
  if (X.size() == 0) return kept;
  const double tol = linalg::rank_tol(X);
  Matrix basis(X.rows(), 0);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Vector r = X.col(j);
    if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
    if (r.norm() > tol) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = r.normalized();
      kept.push_back(j);
    }
  }
  return kept;
}

}  // namespace

DecayCertificate decay_certificate(const Matrix& A, const Matrix& B,
                                   std::span<const Matrix> output_blocks) {
  const Matrix K1 = linalg::stabilize(A, B);
  const Matrix A_closed = A + B * K1;
  const double abscissa = linalg::eigenvalues(A_closed, "A + B K1").abscissa;
  const double lambda = A.rows() == 0 ? 1.0 : 0.5 * std::abs(abscissa);
  return DecayCertificate{scaled_lyapunov_metric(A_closed, lambda, output_blocks), K1, lambda};
}

DecayCertificate decay_certificate(const Matrix& A, const Matrix& B, const Matrix& C) {
  const std::vector<Matrix> blocks{C};
  return decay_certificate(A, B, blocks);
}

CertificateSlack certificate_slack(const Matrix& A, const Matrix& B,
                                   std::span<const Matrix> output_blocks,
                                   const DecayCertificate& cert) {
  const Matrix& M = cert.M.matrix();
  CertificateSlack slack;
  slack.output = min_sym_eigenvalue(M);
  for (const auto& Ck : output_blocks) {
    slack.output = std::min(slack.output, min_sym_eigenvalue(M - Ck.transpose() * Ck));
  }
  const Matrix Acl = A + B * cert.K1;
  slack.decay = min_sym_eigenvalue(-2.0 * cert.lambda * M - Acl.transpose() * M - M * Acl);
  return slack;
}

PConditionReport check_P_conditions(const LinearSystem& sys, const Matrix& P) {
  if (P.rows() != sys.n()) throw DimensionError("check_P_conditions: P row count differs from n");
  if (linalg::rank(P) != P.cols()) {
    throw ValidationError("P must have trivial kernel");
  }
  using geometry::Subspace;
  const Subspace imP = geometry::image(P);
  const Subspace imP_B = geometry::sum(imP, geometry::image(sys.B));
  PConditionReport report;

  const Subspace AimP = geometry::apply(sys.A, imP);
  report.a_invariance.residual = imP_B.residual(AimP.basis());
  report.a_invariance.holds = geometry::contains(imP_B, AimP);

  const Subspace imD = geometry::image(sys.D);
  report.d_containment.residual = imP_B.residual(imD.basis());
  report.d_containment.holds = geometry::contains(imP_B, imD);

  const Subspace total = geometry::sum(imP, geometry::kernel(sys.stacked_outputs()));
  report.output_complement.residual = static_cast<double>(sys.n() - total.dim());
  report.output_complement.holds = total.dim() == sys.n();
  return report;
}

K4Result compute_k4(const SpdMatrix& M, const Matrix& P, const Matrix& Bhat, const Matrix& B) {
  if (P.rows() != M.size() || B.rows() != M.size() || Bhat.rows() != P.cols()) {
    throw DimensionError("compute_k4: dimension mismatch");
  }
  const Matrix S = M.sqrt();
  const Matrix target = S * P * Bhat;
  K4Result out;
  out.K4 = Matrix::Zero(B.cols(), Bhat.cols());
  if (B.cols() > 0 && Bhat.cols() > 0) {
    out.K4 = linalg::least_squares(S * B, target).solution;
  }
  out.rho = linalg::spectral_norm(target - S * B * out.K4);
  return out;
}

AbstractionResult build_abstraction(const LinearSystem& sys, const Matrix& P,
                                    const std::optional<DecayCertificate>& injected) {
  sys.check_shapes();
  const PConditionReport conditions = check_P_conditions(sys, P);
  if (!conditions.all()) {
    std::ostringstream os;
    os << "system '" << sys.name << "': P violates";
    if (!conditions.a_invariance.holds) os << " [A im P in im P + im B]";
    if (!conditions.d_containment.holds) os << " [im D in im P + im B]";
    if (!conditions.output_complement.holds) os << " [im P + ker C = R^n]";
    throw ValidationError(os.str());
  }
  const std::vector<Matrix> blocks = sys.output_blocks();
  const DecayCertificate cert =
      injected ? *injected : decay_certificate(sys.A, sys.B, blocks);
  if (cert.M.size() != sys.n() || cert.K1.rows() != sys.m() || cert.K1.cols() != sys.n()) {
    throw DimensionError("system '" + sys.name + "': certificate dimensions do not match");
  }

  const Eigen::Index n = sys.n();
  const Eigen::Index nh = P.cols();
  const Eigen::Index m = sys.m();
  const Matrix PB = hcat(P, sys.B);

  const auto a_solve = linalg::least_squares(PB, sys.A * P);
  const auto d_solve = linalg::least_squares(PB, sys.D);
  if (!a_solve.consistent || !d_solve.consistent) {
    throw NumericalError("system '" + sys.name + "': inconsistent Ahat/Dhat system");
  }

  AbstractionResult r;
  r.simfn.P = P;
  r.simfn.M = cert.M;
  r.simfn.K1 = cert.K1;
  r.simfn.lambda = cert.lambda;
  r.simfn.K2 = a_solve.solution.bottomRows(m);
  r.simfn.K3 = d_solve.solution.bottomRows(m);

  auto& abs = r.abstract_system;
  abs.name = sys.name + "_hat";
  abs.A = a_solve.solution.topRows(nh);
  abs.D = d_solve.solution.topRows(nh);
  abs.C_ext = sys.C_ext * P;
  for (const auto& [peer, C] : sys.internal_outputs) abs.internal_outputs[peer] = C * P;
  abs.internal_inputs = sys.internal_inputs;

  // R^n = im P (+) W with W a complement of (im P cap ker C) inside ker C;
  // Phat maps P z + w to z.
  const Matrix C = sys.stacked_outputs();
  const geometry::Subspace kerC = geometry::kernel(C);
  r.E = kerC.basis();
  const geometry::Subspace shared = geometry::intersection(geometry::image(P), kerC);
  const Matrix W = linalg::orth(r.E - shared.projector() * r.E, kerC.tol());
  if (nh + W.cols() != n) {
    throw NumericalError("system '" + sys.name + "': im P and ker C do not decompose R^n");
  }
  const Matrix T = hcat(P, W);
  Eigen::FullPivLU<Matrix> lu(T);
  if (!lu.isInvertible()) {
    throw NumericalError("system '" + sys.name + "': singular decomposition basis");
  }
  r.Phat = lu.inverse().topRows(nh);
  r.F = linalg::least_squares(r.E, Matrix::Identity(n, n) - P * r.Phat).solution;

  r.Bhat_full = hcat(r.Phat * sys.B, r.Phat * sys.A * r.E);
  r.bhat_columns = independent_columns(r.Bhat_full);
  abs.B.resize(nh, static_cast<Eigen::Index>(r.bhat_columns.size()));
  for (std::size_t k = 0; k < r.bhat_columns.size(); ++k) {
    abs.B.col(static_cast<Eigen::Index>(k)) = r.Bhat_full.col(r.bhat_columns[k]);
  }

  const K4Result k4 = compute_k4(cert.M, P, abs.B, sys.B);
  r.simfn.K4 = k4.K4;

  r.gains.alpha = 1.0;
  r.gains.lambda = cert.lambda;
  r.gains.rho = k4.rho;
  for (Eigen::Index k = 0; k < sys.p(); ++k) {
    r.gains.mu_coeffs.push_back(linalg::weighted_norm(cert.M, sys.D.col(k)));
  }
  return r;
}

Vector interface(const QuadraticSimFn& s, const Vector& x, const Vector& xhat,
                 const Vector& uhat, const Vector& what) {
  if (x.size() != s.P.rows() || xhat.size() != s.P.cols() || uhat.size() != s.K4.cols() ||
      what.size() != s.K3.cols()) {
    throw DimensionError("interface: dimension mismatch");
  }
  return s.K1 * (x - s.P * xhat) - s.K2 * xhat - s.K3 * what + s.K4 * uhat;
}

double eval_simfn(const QuadraticSimFn& s, const Vector& xhat, const Vector& x) {
  if (x.size() != s.P.rows() || xhat.size() != s.P.cols()) {
    throw DimensionError("eval_simfn: dimension mismatch");
  }
  const Vector e = x - s.P * xhat;
  return std::sqrt(std::max(0.0, e.dot(s.M.matrix() * e)));
}

double IdentityResiduals::max() const {
  return std::max({AP, D, C, PhatP, CPPhat, PPhatEF});
}

IdentityResiduals identity_residuals(const LinearSystem& sys, const AbstractionResult& r) {
  const auto& s = r.simfn;
  const auto& a = r.abstract_system;
  const Eigen::Index n = sys.n();
  const Eigen::Index nh = s.P.cols();
  const Matrix C = sys.stacked_outputs();
  IdentityResiduals out;
  out.AP = (sys.A * s.P - s.P * a.A - sys.B * s.K2).norm();
  out.D = sys.p() == 0 ? 0.0 : (sys.D - s.P * a.D - sys.B * s.K3).norm();
  out.C = (a.stacked_outputs() - C * s.P).norm();
  out.PhatP = (r.Phat * s.P - Matrix::Identity(nh, nh)).norm();
  out.CPPhat = (C * s.P * r.Phat - C).norm();
  const double split = (s.P * r.Phat + r.E * r.F - Matrix::Identity(n, n)).norm();
  out.PPhatEF = std::max(split, r.E.size() == 0 ? 0.0 : (C * r.E).norm());
  return out;
}

ProductMatrices product_matrices(const LinearSystem& sys1, const LinearSystem& sys2) {
  const Matrix C1 = sys1.stacked_outputs();
  const Matrix C2 = sys2.stacked_outputs();
  if (sys1.p() != sys2.p() || C1.rows() != C2.rows()) {
    throw DimensionError("product_matrices: internal input or output dimensions differ");
  }
  const Eigen::Index n1 = sys1.n();
  const Eigen::Index n2 = sys2.n();
  ProductMatrices pm;
  pm.A12 = block_diag(sys1.A, sys2.A);
  pm.B12 = vcat(Matrix::Zero(n1, sys2.m()), sys2.B);
  pm.B21 = vcat(sys1.B, Matrix::Zero(n2, sys1.m()));
  pm.D12 = vcat(sys1.D, sys2.D);
  pm.C12 = hcat(-C1, C2);
  return pm;
}

RelationReport check_relation(const LinearSystem& sys1, const LinearSystem& sys2,
                              const geometry::Subspace& R, bool require_rho_zero) {
  const ProductMatrices pm = product_matrices(sys1, sys2);
  if (R.ambient_dim() != pm.A12.rows()) {
    throw DimensionError("check_relation: relation has the wrong ambient dimension");
  }
  const geometry::Subspace R_B = geometry::sum(R, geometry::image(pm.B12));
  RelationReport report;
  report.controlled_invariant = geometry::contains(R_B, geometry::apply(pm.A12, R));
  report.d_containment = geometry::contains(R_B, geometry::image(pm.D12));
  report.kernel_containment = geometry::contains(geometry::kernel(pm.C12), R);
  if (report.controlled_invariant && geometry::friend_feedback(pm.A12, pm.B12, R)) {
    report.externally_stabilizable = geometry::externally_stabilizable(pm.A12, pm.B12, R);
  }
  if (require_rho_zero) {
    report.exact_input_matching = geometry::contains(R_B, geometry::image(pm.B21));
  }
  return report;
}

double RelationSimFn::operator()(const Vector& x1, const Vector& x2) const {
  Vector z(x1.size() + x2.size());
  z << x1, x2;
  if (z.size() != M_joint.rows()) throw DimensionError("RelationSimFn: dimension mismatch");
  return std::sqrt(std::max(0.0, z.dot(M_joint * z)));
}

RelationSimFn simfn_from_relation(const LinearSystem& sys1, const LinearSystem& sys2,
                                  const geometry::Subspace& R) {
  const RelationReport report = check_relation(sys1, sys2, R, false);
  if (!report.induces_simfn()) {
    throw ValidationError("simfn_from_relation: relation does not induce a simulation function");
  }
  const ProductMatrices pm = product_matrices(sys1, sys2);
  const auto K12 = geometry::stabilizing_friend(pm.A12, pm.B12, R);
  if (!K12) throw ValidationError("simfn_from_relation: no stabilizing friend");
  const geometry::QuotientData q = geometry::quotient(pm.A12 + pm.B12 * *K12, R);

  RelationSimFn out;
  out.K12 = *K12;
  out.Pi = q.Pi;
  const Eigen::Index nq = q.F22.rows();
  if (nq == 0) {
    out.lambda = 1.0;
    out.Mbar = Matrix(0, 0);
    out.M_joint = Matrix::Zero(pm.A12.rows(), pm.A12.rows());
    return out;
  }
  const Matrix Cbar = pm.C12 * q.Pi.transpose();
  out.lambda = 0.5 * std::abs(linalg::eigenvalues(q.F22, "quotient dynamics").abscissa);
  const std::vector<Matrix> blocks{Cbar};
  out.Mbar = scaled_lyapunov_metric(q.F22, out.lambda, blocks).matrix();
  out.M_joint = q.Pi.transpose() * out.Mbar * q.Pi;
  return out;
}

geometry::Subspace graph_of(const Matrix& P) {
  const Eigen::Index nh = P.cols();
  return geometry::image(vcat(Matrix::Identity(nh, nh), P));
}

}  // namespace simcompose::abstraction

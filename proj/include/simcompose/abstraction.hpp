#pragma once

#include <optional>
#include <span>
#include <vector>

#include "simcompose/geometry.hpp"
#include "simcompose/linalg.hpp"
#include "simcompose/systems.hpp"

namespace simcompose::abstraction {

using linalg::SpdMatrix;
using systems::LinearSystem;

/// M, K1 and lambda with C_k^T C_k <= M for every output block C_k and
/// (A + B K1)^T M + M (A + B K1) <= -2 lambda M.
struct DecayCertificate {
  SpdMatrix M;
  Matrix K1;
  double lambda = 0.0;
};

struct CertificateSlack {
  double output = 0.0;  // min over blocks of lambda_min(M - C_k^T C_k)
  double decay = 0.0;   // lambda_min(-2 lambda M - (A+BK1)^T M - M (A+BK1))
  bool holds(double tol) const { return output >= -tol && decay >= -tol; }
};

DecayCertificate decay_certificate(const Matrix& A, const Matrix& B,
                                   std::span<const Matrix> output_blocks);
DecayCertificate decay_certificate(const Matrix& A, const Matrix& B, const Matrix& C);

CertificateSlack certificate_slack(const Matrix& A, const Matrix& B,
                                   std::span<const Matrix> output_blocks,
                                   const DecayCertificate& cert);

/// V(xhat, x) = sqrt((x - P xhat)^T M (x - P xhat)) with the interface
/// u = K1 (x - P xhat) - K2 xhat - K3 what + K4 uhat.
struct QuadraticSimFn {
  Matrix P;
  SpdMatrix M{Matrix(0, 0)};
  Matrix K1;
  Matrix K2;
  Matrix K3;
  Matrix K4;
  double lambda = 0.0;
};

struct ComparisonGains {
  double alpha = 1.0;
  double lambda = 0.0;
  double rho = 0.0;
  std::vector<double> mu_coeffs;  // one per column of D
};

struct AbstractionResult {
  LinearSystem abstract_system;
  QuadraticSimFn simfn;
  ComparisonGains gains;
  Matrix Phat;
  Matrix E;
  Matrix F;
  /// [Phat B, Phat A E] before column compression, and the kept columns.
  Matrix Bhat_full;
  std::vector<Eigen::Index> bhat_columns;
};

struct ConditionCheck {
  bool holds = false;
  double residual = 0.0;
};

struct PConditionReport {
  ConditionCheck a_invariance;      // A im P in im P + im B
  ConditionCheck d_containment;     // im D in im P + im B
  ConditionCheck output_complement; // im P + ker C = R^n
  bool all() const { return a_invariance.holds && d_containment.holds && output_complement.holds; }
};

/// Throws ValidationError if P has a nontrivial kernel.
PConditionReport check_P_conditions(const LinearSystem& sys, const Matrix& P);

/// Runs the full construction: (P conditions) -> Ahat, K2 -> Dhat, K3 ->
/// Chat = C P -> Phat, E, F -> Bhat -> K4, rho, mu. Uses `injected` for the
/// decay certificate when given, otherwise computes one.
AbstractionResult build_abstraction(const LinearSystem& sys, const Matrix& P,
                                    const std::optional<DecayCertificate>& injected = std::nullopt);

struct K4Result {
  Matrix K4;
  double rho = 0.0;
};

/// K4 minimizing ||sqrt(M) (P Bhat - B K4)||_F; rho is the spectral norm of the
/// achieved residual.
K4Result compute_k4(const SpdMatrix& M, const Matrix& P, const Matrix& Bhat, const Matrix& B);

Vector interface(const QuadraticSimFn& simfn, const Vector& x, const Vector& xhat,
                 const Vector& uhat, const Vector& what);

double eval_simfn(const QuadraticSimFn& simfn, const Vector& xhat, const Vector& x);

/// Residuals of the algebraic identities behind a constructed abstraction.
struct IdentityResiduals {
  double AP = 0.0;    // ||A P - P Ahat - B K2||
  double D = 0.0;     // ||D - P Dhat - B K3||
  double C = 0.0;     // ||Chat - C P|| over all output blocks
  double PhatP = 0.0; // ||Phat P - I||
  double CPPhat = 0.0;// ||C P Phat - C||
  double PPhatEF = 0.0;// ||P Phat + E F - I|| together with ||C E||
  double max() const;
};

IdentityResiduals identity_residuals(const LinearSystem& sys, const AbstractionResult& r);

struct RelationReport {
  std::optional<bool> externally_stabilizable;  // unset when R is not controlled invariant
  bool controlled_invariant = false;
  bool d_containment = false;
  bool kernel_containment = false;
  std::optional<bool> exact_input_matching;  // set only if requested
  bool induces_simfn() const {
    return externally_stabilizable.value_or(false) && controlled_invariant && d_containment &&
           kernel_containment;
  }
};

/// Auxiliary matrices of the product system for sys1 -> sys2.
struct ProductMatrices {
  Matrix A12, B12, B21, C12, D12;
};

ProductMatrices product_matrices(const LinearSystem& sys1, const LinearSystem& sys2);

RelationReport check_relation(const LinearSystem& sys1, const LinearSystem& sys2,
                              const geometry::Subspace& R, bool require_rho_zero);

/// Joint-space square-root-of-quadratic form induced by a relation R.
struct RelationSimFn {
  Matrix M_joint;  // Pi^T Mbar Pi on (x1; x2)
  Matrix Mbar;
  Matrix Pi;
  Matrix K12;
  double lambda = 0.0;

  double operator()(const Vector& x1, const Vector& x2) const;
};

RelationSimFn simfn_from_relation(const LinearSystem& sys1, const LinearSystem& sys2,
                                  const geometry::Subspace& R);

/// Graph {(xhat; x) : x = P xhat} as a subspace of R^{nhat + n}.
geometry::Subspace graph_of(const Matrix& P);

}  // namespace simcompose::abstraction

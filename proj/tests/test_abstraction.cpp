#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "simcompose/abstraction.hpp"
#include "simcompose/commands.hpp"
#include "simcompose/error.hpp"

using namespace simcompose;
using namespace simcompose::abstraction;

namespace {

systems::LinearSystem example_subsystem(int i) {
  return simcompose::testing::example_project().interconnection().subsystems.at(static_cast<std::size_t>(i));
}

}  // namespace

TEST(PConditions, ExampleHolds) {
  const auto pf = simcompose::testing::example_project();
  const auto ic = pf.interconnection();
  for (int i = 0; i < ic.size(); ++i) {
    EXPECT_TRUE(check_P_conditions(ic.subsystems[i], pf.resolve_P(i, ic.subsystems[i])).all());
  }
}

TEST(PConditions, SecondCoordinateFailsOutputComplement) {
  const auto sys = example_subsystem(0);
  const auto rep = check_P_conditions(sys, Vector::Unit(3, 1));
  EXPECT_FALSE(rep.output_complement.holds);
  EXPECT_FALSE(rep.all());
}

TEST(PConditions, RankDeficientP) {
  const auto sys = example_subsystem(0);
  EXPECT_THROW(check_P_conditions(sys, Matrix::Zero(3, 1)), ValidationError);
}

TEST(Construction, OscillatorValues) {
  const auto pl = commands::build_pipeline(simcompose::testing::example_project());
  const auto& r = pl.abstractions[1];
  EXPECT_NEAR(r.abstract_system.A(0, 0), -2.0, 1e-10);
  EXPECT_NEAR(r.abstract_system.D(0, 0), -0.5, 1e-10);
  EXPECT_NEAR(r.gains.rho, std::sqrt(2.0), 1e-10);
  EXPECT_EQ(r.simfn.K4.rows(), 0);
}

TEST(Construction, IdentityDirectiveKeepsDimension) {
  auto pf = simcompose::testing::example_project();
  pf.subsystems[1].abstraction.method = project::PMethod::Identity;
  pf.subsystems[1].abstraction.P.reset();
  const auto pl = commands::build_pipeline(pf);
  EXPECT_EQ(pl.abstractions[1].abstract_system.n(), 2);
  EXPECT_LT(identity_residuals(pl.ic.subsystems[1], pl.abstractions[1]).max(), 1e-10);
}

TEST(Construction, MinimalInvariantDirective) {
  auto pf = simcompose::testing::example_project();
  for (int i : {1, 3}) {
    pf.subsystems[static_cast<std::size_t>(i)].abstraction.method = project::PMethod::MinimalInvariant;
    pf.subsystems[static_cast<std::size_t>(i)].abstraction.P.reset();
  }
  const auto pl = commands::build_pipeline(pf);
  const auto& r = pl.abstractions[1];
  EXPECT_EQ(r.abstract_system.n(), 1);
  EXPECT_NEAR(r.abstract_system.A(0, 0), -2.0, 1e-10);
  // Gains do not depend on the scaling of P.
  EXPECT_NEAR(r.gains.rho, std::sqrt(2.0), 1e-10);
}

TEST(Construction, RandomIdentitiesAndCertificates) {
  std::mt19937 rng(17);
  for (int k = 0; k < 100; ++k) {
    const auto c = simcompose::testing::random_abstraction_case(rng);
    const auto r = build_abstraction(c.sys, c.P);
    EXPECT_LT(identity_residuals(c.sys, r).max(), 1e-8);
    const auto blocks = c.sys.output_blocks();
    const auto slack = certificate_slack(c.sys.A, c.sys.B, blocks,
                                         DecayCertificate{r.simfn.M, r.simfn.K1, r.simfn.lambda});
    EXPECT_TRUE(slack.holds(1e-7)) << slack.output << " " << slack.decay;
  }
}

TEST(Construction, FailsWhenConditionsFail) {
  const auto sys = example_subsystem(0);
  EXPECT_THROW(build_abstraction(sys, Vector::Unit(3, 1)), ValidationError);
}

TEST(ComputeK4, ExactMatchGivesZeroRho) {
  const SpdMatrix M(Matrix::Identity(2, 2));
  const Matrix P = Matrix::Identity(2, 2);
  const Matrix B = Matrix::Identity(2, 2);
  const auto r = compute_k4(M, P, Matrix::Identity(2, 2), B);
  EXPECT_NEAR(r.rho, 0.0, 1e-14);
  EXPECT_LT((r.K4 - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(Interface, OnManifoldWithZeroInputs) {
  const auto pl = commands::build_pipeline(simcompose::testing::example_project());
  const auto& s = pl.abstractions[0].simfn;
  const Vector xhat = Vector::Constant(1, 0.3);
  const Vector x = s.P * xhat;
  EXPECT_NEAR(eval_simfn(s, xhat, x), 0.0, 1e-15);
  const Vector u = interface(s, x, xhat, Vector::Zero(1), Vector::Zero(1));
  EXPECT_LT((u + s.K2 * xhat).norm(), 1e-15);
}

TEST(Relation, GraphOfPInducesSimulationFunction) {
  const auto pl = commands::build_pipeline(simcompose::testing::example_project());
  const auto sys = pl.ic.subsystems[0];
  const auto& r = pl.abstractions[0];
  const auto R = graph_of(r.simfn.P);
  const auto rep = check_relation(r.abstract_system, sys, R, true);
  EXPECT_TRUE(rep.induces_simfn());
  ASSERT_TRUE(rep.exact_input_matching.has_value());
  EXPECT_FALSE(*rep.exact_input_matching);  // rho_1 > 0
  const auto sf = simfn_from_relation(r.abstract_system, sys, R);
  EXPECT_GT(sf.lambda, 0.0);
  Vector xhat = Vector::Constant(1, 0.7);
  EXPECT_NEAR(sf(xhat, r.simfn.P * xhat), 0.0, 1e-7);  // square root of a roundoff-level form
}

TEST(Relation, IdentityMatchesExactly) {
  // With full state output ker C = 0, so Bhat = B and the input is matched.
  auto sys = example_subsystem(0);
  sys.C_ext = Matrix::Identity(3, 3);
  sys.internal_outputs.clear();
  const auto r = build_abstraction(sys, Matrix::Identity(3, 3));
  const auto rep = check_relation(r.abstract_system, sys, graph_of(Matrix::Identity(3, 3)), true);
  EXPECT_TRUE(rep.induces_simfn());
  EXPECT_TRUE(rep.exact_input_matching.value_or(false));
}

TEST(DecayCertificateTest, OutputBlocksAreDominated) {
  const auto sys = example_subsystem(2);
  const auto blocks = sys.output_blocks();
  const auto cert = decay_certificate(sys.A, sys.B, blocks);
  const auto slack = certificate_slack(sys.A, sys.B, blocks, cert);
  EXPECT_GE(slack.output, 0.0);
  EXPECT_GE(slack.decay, 0.0);
  EXPECT_GT(cert.lambda, 0.0);
}

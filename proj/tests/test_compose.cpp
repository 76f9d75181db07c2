#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "simcompose/commands.hpp"
#include "simcompose/compose.hpp"
#include "simcompose/error.hpp"

using namespace simcompose;
using namespace simcompose::compose;

namespace {

GainMatrices gains(const Matrix& Gamma, const Vector& lambdas) {
  GainMatrices gm;
  gm.Gamma = Gamma;
  gm.lambdas = lambdas;
  gm.rhos = Vector::Ones(lambdas.size());
  return gm;
}

}  // namespace

TEST(SmallGain, TwoCycleClosedForm) {
  Matrix G(2, 2);
  G << 0, 0.5, 0.18, 0;
  const auto r = small_gain(gains(G, Vector::Ones(2)));
  EXPECT_NEAR(r.spectral_radius, 0.3, 1e-12);
  ASSERT_TRUE(r.ok());
  EXPECT_GT(r.path->margin, 0.0);
  EXPECT_GT(omega_path_margin(gains(G, Vector::Ones(2)), r.path->eta, r.path->epsilon), 0.0);
}

TEST(SmallGain, FailureReportsCycle) {
  Matrix G(3, 3);
  G << 0, 2, 0, 0, 0, 2, 2, 0, 0;
  const auto r = small_gain(gains(G, Vector::Ones(3)));
  EXPECT_FALSE(r.ok());
  EXPECT_NEAR(r.spectral_radius, 2.0, 1e-10);
  EXPECT_EQ(r.dominant_cycle.size(), 3u);
}

TEST(SmallGain, NoChannelsIsTrivial) {
  const auto r = small_gain(gains(Matrix::Zero(2, 2), Vector::Ones(2)));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.spectral_radius, 0.0);
}

TEST(SmallGain, ReducibleMatrix) {
  Matrix G(3, 3);
  G << 0, 0.4, 0, 0, 0, 0, 0, 0.3, 0;
  const auto r = small_gain(gains(G, Vector::Ones(3)));
  ASSERT_TRUE(r.ok());
  EXPECT_GT(r.path->margin, 0.0);
  EXPECT_TRUE((r.path->eta.array() > 0.0).all());
}

TEST(SmallGain, LambdaScaling) {
  Matrix G(2, 2);
  G << 0, 1, 1, 0;
  const auto r = small_gain(gains(G, Vector::Constant(2, 2.0)));
  EXPECT_NEAR(r.spectral_radius, 0.5, 1e-12);
}

TEST(NormalizeEta, GivesUnitAlpha) {
  Vector eta(3);
  eta << 1, 2, 3;
  Vector lambdas(3);
  lambdas << 1, 1, 2;
  const Vector e = normalize_eta(eta, lambdas);
  EXPECT_NEAR(std::sqrt(3.0) * e.cwiseQuotient(lambdas).maxCoeff(), 1.0, 1e-14);
}

TEST(ComposedGains, NoChannelsFormula) {
  // Composed lambda = min lambda_i * eps / (1 + eps).
  const auto gm = gains(Matrix::Zero(2, 2), (Vector(2) << 1.0, 3.0).finished());
  OmegaPath path{Vector::Constant(2, 0.5), 4.0, 1.0};
  std::vector<abstraction::QuadraticSimFn> parts(2);
  const auto c = compose_simfn(parts, gm, path);
  EXPECT_DOUBLE_EQ(c.lambda, 0.8);
}

TEST(ComposedGains, ExampleWithPrintedPath) {
  const auto pf = simcompose::testing::example_project();
  const auto pl = commands::build_pipeline(pf);
  commands::Options o;
  o.eta = (Vector(4) << 0.4, 0.6, 0.5, 0.6).finished();
  o.epsilon = 4.0;
  const auto c = commands::choose_composition(pl, pf, o);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(c->composed.lambda, 0.8, 1e-15);
  EXPECT_NEAR(c->composed.alpha, 1.0, 1e-15);
  EXPECT_FALSE(c->certified);
  EXPECT_NEAR(pl.small_gain.spectral_radius, 0.4760, 1e-3);
}

TEST(ComposedGains, StrongCouplingFails) {
  auto pf = simcompose::testing::example_project();
  for (auto& [name, value] : pf.parameters) value = 2.0;
  const auto pl = commands::build_pipeline(pf);
  EXPECT_FALSE(pl.small_gain.ok());
  EXPECT_GE(pl.small_gain.spectral_radius, 1.0);
}

TEST(ComposedGains, GainMatrixScalesLinearly) {
  auto pf = simcompose::testing::example_project();
  const auto base = commands::build_pipeline(pf).gm.Gamma;
  for (auto& [name, value] : pf.parameters) value *= 3.0;
  const auto scaled = commands::build_pipeline(pf).gm.Gamma;
  EXPECT_LT((scaled - 3.0 * base).norm(), 1e-12);
}

TEST(ComposeAbstractions, TopologyPreserved) {
  const auto pl = commands::build_pipeline(simcompose::testing::example_project());
  const auto abs = compose_abstractions(pl.ic, pl.abstractions);
  EXPECT_TRUE(systems::validate(abs).empty());
  EXPECT_EQ(abs.size(), 4);
}

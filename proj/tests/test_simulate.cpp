#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "simcompose/commands.hpp"
#include "simcompose/error.hpp"
#include "simcompose/simulate.hpp"

using namespace simcompose;
using namespace simcompose::simulate;

namespace {

systems::MonolithicSystem autonomous(const Matrix& A) {
  systems::MonolithicSystem m;
  m.A = A;
  m.B = Matrix(A.rows(), 0);
  m.C = Matrix::Identity(A.rows(), A.rows());
  return m;
}

}  // namespace

TEST(Integrate, ScalarDecay) {
  const auto t = integrate(autonomous(-Matrix::Identity(1, 1)), Vector::Ones(1), Signal::zero(0), 1.0, 1e-3);
  EXPECT_NEAR(t.states.back()(0), std::exp(-1.0), 1e-9);
  EXPECT_EQ(t.times.size(), 1001u);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.0);
}

TEST(Integrate, OscillatorMatchesExponential) {
  Matrix A(2, 2);
  A << 0, 1, -6, -5;
  const Vector x0 = Vector::Unit(2, 0);
  const auto t = integrate(autonomous(A), x0, Signal::zero(0), 1.0, 1e-3);
  EXPECT_LT((t.states.back() - A.exp() * x0).norm(), 1e-8);
}

TEST(Integrate, ConstantInputGivesStraightLine) {
  systems::MonolithicSystem m;
  m.A = Matrix::Zero(2, 2);
  m.B = Matrix::Identity(2, 2);
  m.C = Matrix::Identity(2, 2);
  const Vector u = (Vector(2) << 1.0, -2.0).finished();
  const auto t = integrate(m, Vector::Zero(2), Signal::constant(u), 2.0, 0.1);
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    EXPECT_LT((t.states[k] - t.times[k] * u).norm(), 1e-12);
  }
}

TEST(Integrate, StepHalvingMatchesFourthOrder) {
  Matrix A(2, 2);
  A << 0, 1, -6, -5;
  const Vector x0 = Vector::Unit(2, 0);
  const Vector exact = A.exp() * x0;
  const double e1 = (integrate(autonomous(A), x0, Signal::zero(0), 1.0, 0.05).states.back() - exact).norm();
  const double e2 = (integrate(autonomous(A), x0, Signal::zero(0), 1.0, 0.025).states.back() - exact).norm();
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, BlowUpIsReported) {
  try {
    integrate(autonomous(Matrix::Constant(1, 1, 800.0)), Vector::Ones(1), Signal::zero(0), 10.0, 0.1);
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
  }
}

TEST(SignalTest, PiecewiseAndSquare) {
  const auto s = Signal::piecewise_constant({0.0, 1.0}, {Vector::Constant(1, 2.0), Vector::Constant(1, -3.0)});
  EXPECT_EQ(s(-0.5)(0), 0.0);
  EXPECT_EQ(s(0.5)(0), 2.0);
  EXPECT_EQ(s(1.0)(0), -3.0);
  EXPECT_DOUBLE_EQ(s.sup_norm(0.5), 2.0);
  EXPECT_DOUBLE_EQ(s.sup_norm(5.0), 3.0);
  const auto sq = Signal::square_wave(Vector::Constant(1, 0.1), 4.0, 10.0);
  EXPECT_DOUBLE_EQ(sq(1.0)(0), 0.1);
  EXPECT_DOUBLE_EQ(sq(3.0)(0), -0.1);
  EXPECT_DOUBLE_EQ(sq(5.0)(0), 0.1);
  EXPECT_THROW(Signal::piecewise_constant({1.0, 0.5}, {Vector::Ones(1), Vector::Ones(1)}), ValidationError);
}

TEST(SignalTest, StackMergesSwitchTimes) {
  const auto a = Signal::piecewise_constant({0.0, 1.0}, {Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)});
  const auto b = Signal::piecewise_constant({0.5}, {Vector::Constant(1, 5.0)});
  const auto s = Signal::stack({a, b, Signal::zero(1)});
  EXPECT_EQ(s.width(), 3);
  EXPECT_EQ(s(0.25), (Vector(3) << 1.0, 0.0, 0.0).finished());
  EXPECT_EQ(s(0.75), (Vector(3) << 1.0, 5.0, 0.0).finished());
  EXPECT_EQ(s(2.0), (Vector(3) << 2.0, 5.0, 0.0).finished());
  EXPECT_DOUBLE_EQ(s.sup_norm(3.0, 1, 1), 5.0);
}

TEST(ScalarBound, Formula) {
  const auto b = scalar_bound(2.0, 0.8, 4.7, 0.1, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(b[0], 2.0 + 4.7 / 0.8 * 0.1);
  EXPECT_NEAR(b[1], 2.0 * std::exp(-0.8) + 4.7 / 0.8 * 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(scalar_bound(0.0, 1.0, 0.0, 1.0, {3.0})[0], 0.0);
  EXPECT_THROW(scalar_bound(1.0, 0.0, 1.0, 1.0, {0.0}), ValidationError);
}

TEST(GeneralGains, Formula) {
  const auto g = general_gains(1.0, 1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(g.gamma_ext, 4.0);
  EXPECT_DOUBLE_EQ(g.gamma_int, 2.0);
  EXPECT_DOUBLE_EQ(general_gains(1.0, 0.8, 4.7, 0.0).gamma_ext, 23.5);
  EXPECT_DOUBLE_EQ(general_gains(1.0, 1.0, 0.0, 0.0).gamma_ext, 0.0);
}

TEST(VectorBound, ZeroGammaIsOneStep) {
  compose::GainMatrices gm;
  gm.Gamma = Matrix::Zero(2, 2);
  gm.lambdas = (Vector(2) << 1.0, 2.0).finished();
  gm.rhos = Vector::Ones(2);
  const Vector Z = (Vector(2) << 0.4, 0.6).finished();
  const auto vb = vector_bound(gm, Z, Vector::Zero(2), 1);
  EXPECT_LT((vb.iterates[1] - vb.fixed_point).norm(), 1e-15);
  EXPECT_NEAR(vb.fixed_point(1), 0.3, 1e-15);
}

TEST(VectorBound, TwoByTwoClosedForm) {
  const double a = 0.5, b = 0.8;
  compose::GainMatrices gm;
  gm.Gamma = (Matrix(2, 2) << 0, a, b, 0).finished();
  gm.lambdas = Vector::Ones(2);
  gm.rhos = Vector::Ones(2);
  const Vector z = (Vector(2) << 1.0, 2.0).finished();
  const auto vb = vector_bound(gm, z, Vector::Constant(2, 100.0), 200);
  EXPECT_NEAR(vb.fixed_point(0), (z(0) + a * z(1)) / (1 - a * b), 1e-12);
  EXPECT_NEAR(vb.fixed_point(1), (z(1) + b * z(0)) / (1 - a * b), 1e-12);
  EXPECT_LT((vb.iterates.back() - vb.fixed_point).norm(), 1e-9);
  for (std::size_t k = 1; k < vb.iterates.size(); ++k) {
    EXPECT_TRUE((vb.iterates[k].array() <= vb.iterates[k - 1].array() + 1e-12).all());
  }
  gm.Gamma(0, 1) = 2.0;
  EXPECT_THROW(vector_bound(gm, z, Vector::Zero(2), 1), ValidationError);
}

TEST(Refinement, StaysOnManifoldWithoutInputs) {
  auto pf = simcompose::testing::example_project();
  pf.simulation.inputs.clear();
  const auto pl = commands::build_pipeline(pf);
  const auto c = commands::choose_composition(pl, pf, {});
  commands::Options o;
  o.t_final = 5.0;
  const auto sim = commands::run_simulation(pl, pf, c->composed, o);
  for (double m : sim.run.mismatch) EXPECT_LT(m, 1e-9);
  for (double v : sim.run.V) EXPECT_LT(v, 1e-9);
}

TEST(Refinement, SingleSubsystemScalarBound) {
  auto pf = simcompose::testing::example_project();
  pf.subsystems.resize(1);
  pf.subsystems[0].inputs.clear();
  pf.subsystems[0].outputs.clear();
  pf.subsystems[0].has_D = false;
  pf.subsystems[0].abstraction.M.reset();
  pf.subsystems[0].abstraction.K1.reset();
  pf.subsystems[0].abstraction.lambda.reset();
  pf.simulation.xhat0 = Vector::Constant(1, 0.2);
  pf.simulation.x0_on_manifold = false;
  pf.simulation.x0 = (Vector(3) << 0.3, -0.1, 0.05).finished();
  pf.simulation.inputs.erase(2);
  const auto pl = commands::build_pipeline(pf);
  const auto c = commands::choose_composition(pl, pf, {});
  commands::Options o;
  o.t_final = 10.0;
  const auto sim = commands::run_simulation(pl, pf, c->composed, o);
  EXPECT_GT(sim.report.V0, 0.0);
  EXPECT_GE(sim.report.min_margin, -1e-9);
  // V itself obeys the same comparison bound.
  const auto& b = sim.report.scalar_bound;
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_LE(sim.run.V[k], b[k] + 1e-9);
}

TEST(Refinement, ExampleBoundsHold) {
  const auto pf = simcompose::testing::example_project();
  const auto pl = commands::build_pipeline(pf);
  const auto c = commands::choose_composition(pl, pf, {});
  const auto sim = commands::run_simulation(pl, pf, c->composed, {});
  EXPECT_FALSE(sim.report.violated(1e-6));
  EXPECT_GT(sim.report.max_mismatch, 0.0);
}

TEST(Refinement, RandomInstancesHoldBounds) {
  std::mt19937 rng(42);
  int done = 0;
  while (done < 5) {
    const auto pf = simcompose::testing::random_example_instance(rng);
    const auto pl = commands::build_pipeline(pf);
    if (!pl.small_gain.ok()) continue;
    const auto c = commands::choose_composition(pl, pf, {});
    commands::Options o;
    o.t_final = 8.0;
    const auto sim = commands::run_simulation(pl, pf, c->composed, o);
    EXPECT_GE(sim.report.min_margin, -1e-6);
    EXPECT_GE(sim.report.min_vector_margin, -1e-6);
    ++done;
  }
}

TEST(Csv, HeaderAndPrecision) {
  const auto pf = simcompose::testing::example_project();
  const auto pl = commands::build_pipeline(pf);
  const auto c = commands::choose_composition(pl, pf, {});
  commands::Options o;
  o.t_final = 0.01;
  const auto sim = commands::run_simulation(pl, pf, c->composed, o);
  std::ostringstream os;
  write_trajectory_csv(os, sim.run);
  const std::string text = os.str();
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(header.rfind("t,x[0],", 0), 0u);
  EXPECT_NE(header.find(",V,V_1,V_2,V_3,V_4,"), std::string::npos);
  const auto commas = [](const std::string& line) { return std::count(line.begin(), line.end(), ','); };
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(commas(line), commas(header));
    ++rows;
  }
  EXPECT_EQ(rows, 11);
}

#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "simcompose/commands.hpp"
#include "simcompose/error.hpp"
#include "simcompose/project.hpp"

using namespace simcompose;
using namespace simcompose::project;

TEST(ParseEntry, Forms) {
  EXPECT_EQ(parse_entry("d1"), (Entry{1.0, "d1"}));
  EXPECT_EQ(parse_entry("-d2"), (Entry{-1.0, "d2"}));
  EXPECT_EQ(parse_entry("2d2"), (Entry{2.0, "d2"}));
  EXPECT_EQ(parse_entry("0.5*d1"), (Entry{0.5, "d1"}));
  EXPECT_EQ(parse_entry("+3 d4"), (Entry{3.0, "d4"}));
  EXPECT_FALSE(parse_entry("d1 + d2").has_value());
  EXPECT_FALSE(parse_entry("").has_value());
  EXPECT_FALSE(parse_entry("2*").has_value());
}

TEST(ParseEntry, FormatRoundTrip) {
  for (const auto& e : {Entry{1.0, "d1"}, Entry{-1.0, "d2"}, Entry{2.5, "k"}}) {
    EXPECT_EQ(parse_entry(format_entry(e)), e);
  }
}

TEST(ExprMatrixTest, UnknownParameter) {
  const ExprMatrix m(1, 1, {Entry{1.0, "missing"}});
  EXPECT_THROW(m.eval({}, "A"), ParseError);
  EXPECT_DOUBLE_EQ(m.eval({{"missing", 2.0}}, "A")(0, 0), 2.0);
}

TEST(Parse, RoundTripPreservesInterconnection) {
  const auto pf = simcompose::testing::example_project();
  const auto again = parse(serialize(pf));
  const auto a = pf.interconnection();
  const auto b = again.interconnection();
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    const auto& x = a.subsystems[i];
    const auto& y = b.subsystems[i];
    EXPECT_EQ(x.A, y.A);
    EXPECT_EQ(x.B, y.B);
    EXPECT_EQ(x.D, y.D);
    EXPECT_EQ(x.C_ext, y.C_ext);
    EXPECT_EQ(x.internal_outputs, y.internal_outputs);
    EXPECT_EQ(x.internal_inputs.size(), y.internal_inputs.size());
  }
  EXPECT_EQ(serialize(again), serialize(pf));
}

TEST(Parse, SyntaxErrorHasLocation) {
  try {
    parse("{\n  \"name\": \"x\",\n  \"subsystems\": [\n}");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
  }
}

TEST(Parse, EmptySubsystemsRejected) {
  EXPECT_THROW(parse(R"({"name": "x", "subsystems": []})"), ParseError);
}

TEST(Parse, SemanticErrorsArePathPrefixed) {
  try {
    parse(R"({"name": "x", "subsystems": [{"name": "a", "A": "oops", "C": [[1]]}]})");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("subsystems[0]"), std::string::npos) << e.what();
  }
}

TEST(Parse, OptionalBlocksDefault) {
  const auto pf = parse(R"({"name": "x", "subsystems": [{"name": "a", "A": [[-1]], "B": [[1]], "C": [[1]]}]})");
  const auto ic = pf.interconnection();
  EXPECT_EQ(ic.subsystems[0].D.cols(), 0);
  EXPECT_DOUBLE_EQ(pf.simulation.t_final, 20.0);
  EXPECT_TRUE(pf.simulation.x0_on_manifold);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(commands::exit_code(ParseError("x")), 2);
  EXPECT_EQ(commands::exit_code(ValidationError("x")), 1);
  EXPECT_EQ(commands::exit_code(DimensionError("x")), 1);
  EXPECT_EQ(commands::exit_code(NumericalError("x")), 3);
  EXPECT_EQ(commands::exit_code(std::runtime_error("x")), 3);
}

TEST(Commands, ReproduceExampleIsDeterministic) {
  std::ostringstream a, b;
  EXPECT_EQ(commands::cmd_reproduce_example(a), 0);
  EXPECT_EQ(commands::cmd_reproduce_example(b), 0);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().find("FAIL"), std::string::npos);
}

TEST(Commands, CheckRejectsBadProjection) {
  auto pf = simcompose::testing::example_project();
  pf.subsystems[0].abstraction.method = PMethod::Given;
  pf.subsystems[0].abstraction.P = ExprMatrix::literal(Vector::Unit(3, 1));
  std::ostringstream out;
  EXPECT_EQ(commands::cmd_check(pf, out), 1);
}

TEST(Commands, ComposeRejectsStrongCoupling) {
  auto pf = simcompose::testing::example_project();
  for (auto& [name, value] : pf.parameters) value = 2.0;
  std::ostringstream out;
  EXPECT_EQ(commands::cmd_compose(pf, {}, out), 1);
  EXPECT_NE(out.str().find("cycle"), std::string::npos);
}

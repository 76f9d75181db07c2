#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "simcompose/commands.hpp"
#include "simcompose/error.hpp"
#include "simcompose/project.hpp"

namespace {

using simcompose::Vector;
namespace cmd = simcompose::commands;

Vector parse_eta(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw simcompose::ParseError("--eta: cannot read \"" + item + "\"");
    }
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order abstractions of interconnected linear systems with composed "
               "simulation functions"};
  app.require_subcommand(1);

  std::string file;
  std::string out_path;
  std::string eta_text;
  std::optional<double> eps, tfinal, dt, v0;

  auto* check = app.add_subcommand("check", "Validate channels, stabilizability and P conditions");
  check->add_option("file", file, "Project file (JSON)")->required();

  auto* abstract = app.add_subcommand("abstract", "Build abstractions and write matrices");
  abstract->add_option("file", file, "Project file (JSON)")->required();
  abstract->add_option("--out", out_path, "Output directory")->required();

  auto* compose = app.add_subcommand("compose", "Small-gain test and composed gains");
  compose->add_option("file", file, "Project file (JSON)")->required();

  auto* simulate = app.add_subcommand("simulate", "Co-simulate and write a trajectory CSV");
  simulate->add_option("file", file, "Project file (JSON)")->required();
  simulate->add_option("--out", out_path, "Trajectory CSV path")->required();

  auto* bounds = app.add_subcommand("bounds", "Co-simulate and report error bounds");
  bounds->add_option("file", file, "Project file (JSON)")->required();
  bounds->add_option("--v0", v0, "Override V(0) in the scalar bound");

  for (auto* sub : {compose, simulate, bounds}) {
    sub->add_option("--eta", eta_text, "Omega-path slopes v1,..,vN");
    sub->add_option("--eps", eps, "Omega-path margin epsilon");
  }
  for (auto* sub : {simulate, bounds}) {
    sub->add_option("--tfinal", tfinal, "Simulation horizon");
    sub->add_option("--dt", dt, "Integration step");
  }

  auto* reproduce = app.add_subcommand("reproduce-example",
                                       "Run the bundled four-subsystem example end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*reproduce) return cmd::cmd_reproduce_example(std::cout);
    cmd::Options opts;
    if (!eta_text.empty()) opts.eta = parse_eta(eta_text);
    opts.epsilon = eps;
    opts.t_final = tfinal;
    opts.dt = dt;
    opts.v0 = v0;
    const auto project = simcompose::project::load(file);
    if (*check) return cmd::cmd_check(project, std::cout);
    if (*abstract) return cmd::cmd_abstract(project, out_path, std::cout);
    if (*compose) return cmd::cmd_compose(project, opts, std::cout);
    if (*simulate) return cmd::cmd_simulate(project, out_path, opts, std::cout);
    if (*bounds) return cmd::cmd_bounds(project, opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cmd::exit_code(e);
  }
  return 0;
}

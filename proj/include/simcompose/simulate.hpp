#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "simcompose/abstraction.hpp"
#include "simcompose/compose.hpp"
#include "simcompose/systems.hpp"

namespace simcompose::simulate {

/// Piecewise-constant signal: value k holds on [times[k], times[k+1]); zero
/// before the first sample.
class Signal {
 public:
  static Signal zero(Eigen::Index width);
  static Signal constant(const Vector& value);
  static Signal piecewise_constant(std::vector<double> times, std::vector<Vector> values);
  /// +amplitude on the first half of each period, -amplitude on the second.
  static Signal square_wave(const Vector& amplitude, double period, double t_final);
  /// Stacks signals component-wise (switch times merged).
  static Signal stack(const std::vector<Signal>& parts);

  Eigen::Index width() const { return width_; }
  Vector operator()(double t) const;
  /// max over samples active in [0, t_final] of the Euclidean norm.
  double sup_norm(double t_final) const;
  /// Same as sup_norm restricted to components [offset, offset + len).
  double sup_norm(double t_final, Eigen::Index offset, Eigen::Index len) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vector>& values() const { return values_; }

 private:
  Signal(Eigen::Index width, std::vector<double> times, std::vector<Vector> values);

  Eigen::Index width_ = 0;
  std::vector<double> times_;
  std::vector<Vector> values_;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> outputs;
};

/// Classical fixed-step RK4; inputs are held over each step (sampled at the
/// step midpoint so that on-grid switch times are resolved exactly).
Trajectory integrate(const systems::LinearSystem& sys, const Vector& x0, const Signal& u,
                     const Signal& w, double t_final, double dt);
Trajectory integrate(const systems::MonolithicSystem& sys, const Vector& x0, const Signal& u,
                     double t_final, double dt);

struct RefinementRun {
  Trajectory abstract_run;   // states xhat, outputs zeta_hat
  Trajectory concrete_run;   // states x, outputs zeta
  Matrix V_parts;            // (samples x N)
  std::vector<double> V;     // composed value
  std::vector<double> mismatch;  // |zeta_hat - zeta|
  std::vector<Vector> concrete_inputs;
};

/// Co-simulates the abstract interconnection driven by uhat and the concrete
/// interconnection driven through the interfaces u_i = k_i(x_i, xhat_i,
/// uhat_i, what_i), with what_i the abstract internal signals.
RefinementRun refine_and_run(const systems::Interconnection& concrete,
                             const std::vector<abstraction::AbstractionResult>& abstractions,
                             const compose::ComposedSimFn& composed, const Vector& x0,
                             const Vector& xhat0, const Signal& uhat, double t_final, double dt);

/// Concrete initial state x_i = P_i xhat_i for every subsystem.
Vector on_manifold_state(const std::vector<abstraction::AbstractionResult>& abstractions,
                         const Vector& xhat0);

/// b(t) = exp(-lambda t) V0 + (rho / lambda) u_inf.
std::vector<double> scalar_bound(double V0, double lambda, double rho, double u_inf,
                                 const std::vector<double>& times);

struct GeneralGains {
  double gamma_ext = 0.0;
  double gamma_int = 0.0;
};

/// gamma_ext = 4 rho / (alpha lambda), gamma_int = 4 mu / (alpha lambda).
GeneralGains general_gains(double alpha, double lambda, double rho, double mu_total);

struct VectorBound {
  std::vector<Vector> iterates;
  Vector fixed_point;
};

/// Iterates V^{k+1} = Lambda^{-1} Gamma V^k + Lambda^{-1} Zhat from V0 and
/// returns the fixed point (I - Lambda^{-1} Gamma)^{-1} Lambda^{-1} Zhat.
VectorBound vector_bound(const compose::GainMatrices& gm, const Vector& Zhat, const Vector& V0,
                         int k_max);

struct BoundReport {
  double V0 = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double alpha = 1.0;
  double rho_over_lambda = 0.0;
  double u_inf = 0.0;
  GeneralGains gammas;
  std::vector<double> times;
  std::vector<double> scalar_bound;
  std::vector<double> margin;  // scalar_bound / alpha - mismatch
  double max_mismatch = 0.0;
  double min_margin = 0.0;
  Vector Zhat;
  Vector vector_fixed_point;
  Vector vector_bound;         // fixed point plus the V(0) contribution
  Vector max_parts;            // observed sup_t V_i(t)
  double min_vector_margin = 0.0;

  bool violated(double tol) const { return min_margin < -tol || min_vector_margin < -tol; }
};

BoundReport evaluate_bounds(const RefinementRun& run, const compose::ComposedSimFn& composed,
                            const compose::GainMatrices& gm, const Signal& uhat,
                            const std::vector<Eigen::Index>& uhat_widths, double t_final,
                            std::optional<double> V0_override = std::nullopt);

/// Header `t,x[0],..,xhat[0],..,y[0],..,yhat[0],..,V,V_1,..,V_N,mismatch`,
/// values with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const RefinementRun& run);

}  // namespace simcompose::simulate

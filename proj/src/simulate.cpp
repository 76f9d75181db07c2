#include "simcompose/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "simcompose/error.hpp"

namespace simcompose::simulate {

namespace {

using Rhs = std::function<Vector(const Vector&, double)>;  // (state, step start)

template <typename Record>
void rk4(const Vector& x0, double t_final, double dt, const Rhs& f, Record&& record) {
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw ValidationError("integrate: dt must be positive and t_final non-negative");
  }
  const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  Vector x = x0;
  record(0.0, x);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double h = std::min(dt, t_final - t);
    // The step start is forwarded so that held inputs stay constant across
    // all four stages.
    const Vector k1 = f(x, t);
    const Vector k2 = f(x + 0.5 * h * k1, t);
    const Vector k3 = f(x + 0.5 * h * k2, t);
    const Vector k4 = f(x + h * k3, t);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "integrate: non-finite state at t = " << t + h;
      throw NumericalError(os.str());
    }
    record(k + 1 == steps ? t_final : static_cast<double>(k + 1) * dt, x);
  }
}

// Inputs held over [t, t + dt) are read at the step midpoint.
double hold_point(double t, double dt) { return t + 0.5 * dt; }

std::vector<Vector> split(const Vector& z, const std::vector<Eigen::Index>& offsets,
                          const std::vector<Eigen::Index>& sizes) {
  std::vector<Vector> parts;
  parts.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) parts.push_back(z.segment(offsets[i], sizes[i]));
  return parts;
}

}  // namespace

Signal::Signal(Eigen::Index width, std::vector<double> times, std::vector<Vector> values)
    : width_(width), times_(std::move(times)), values_(std::move(values)) {}

Signal Signal::zero(Eigen::Index width) { return Signal(width, {}, {}); }

Signal Signal::constant(const Vector& value) {
  return Signal(value.size(), {0.0}, {value});
}

Signal Signal::piecewise_constant(std::vector<double> times, std::vector<Vector> values) {
  if (times.size() != values.size() || times.empty()) {
    throw ValidationError("Signal: times and values must be non-empty and of equal length");
  }
  const Eigen::Index width = values.front().size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (values[k].size() != width) throw DimensionError("Signal: inconsistent sample widths");
    if (!values[k].allFinite() || !std::isfinite(times[k])) {
      throw ValidationError("Signal: non-finite sample");
    }
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw ValidationError("Signal: sample times must be strictly increasing");
    }
  }
  return Signal(width, std::move(times), std::move(values));
}

Signal Signal::square_wave(const Vector& amplitude, double period, double t_final) {
  if (!(period > 0.0)) throw ValidationError("Signal: square wave period must be positive");
  std::vector<double> times;
  std::vector<Vector> values;
  const double half = 0.5 * period;
  for (long k = 0; static_cast<double>(k) * half < std::max(t_final, half); ++k) {
    times.push_back(static_cast<double>(k) * half);
    values.push_back(k % 2 == 0 ? amplitude : Vector(-amplitude));
  }
  return piecewise_constant(std::move(times), std::move(values));
}

Signal Signal::stack(const std::vector<Signal>& parts) {
  Eigen::Index width = 0;
  std::vector<double> times;
  for (const auto& s : parts) {
    width += s.width();
    times.insert(times.end(), s.times().begin(), s.times().end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.empty()) return zero(width);
  std::vector<Vector> values;
  for (double t : times) {
    Vector v(width);
    Eigen::Index offset = 0;
    for (const auto& s : parts) {
      v.segment(offset, s.width()) = s(t);
      offset += s.width();
    }
    values.push_back(std::move(v));
  }
  return Signal(width, std::move(times), std::move(values));
}

Vector Signal::operator()(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return Vector::Zero(width_);
  return values_[static_cast<std::size_t>(it - times_.begin() - 1)];
}

double Signal::sup_norm(double t_final) const { return sup_norm(t_final, 0, width_); }

double Signal::sup_norm(double t_final, Eigen::Index offset, Eigen::Index len) const {
  double best = 0.0;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (times_[k] > t_final) break;
    if (k + 1 < times_.size() && times_[k + 1] <= 0.0) continue;
    best = std::max(best, values_[k].segment(offset, len).norm());
  }
  return best;
}

Trajectory integrate(const systems::LinearSystem& sys, const Vector& x0, const Signal& u,
                     const Signal& w, double t_final, double dt) {
  sys.check_shapes();
  if (x0.size() != sys.n() || u.width() != sys.m() || w.width() != sys.p()) {
    throw DimensionError("integrate: signal or state width mismatch");
  }
  Trajectory traj;
  traj.dt = dt;
  const Rhs f = [&](const Vector& x, double t) -> Vector {
    const double th = hold_point(t, dt);
    return sys.A * x + sys.B * u(th) + sys.D * w(th);
  };
  rk4(x0, t_final, dt, f, [&](double t, const Vector& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.outputs.push_back(sys.C_ext * x);
  });
  return traj;
}

Trajectory integrate(const systems::MonolithicSystem& sys, const Vector& x0, const Signal& u,
                     double t_final, double dt) {
  if (x0.size() != sys.A.rows() || u.width() != sys.B.cols()) {
    throw DimensionError("integrate: signal or state width mismatch");
  }
  Trajectory traj;
  traj.dt = dt;
  const Rhs f = [&](const Vector& x, double t) -> Vector {
    return sys.A * x + sys.B * u(hold_point(t, dt));
  };
  rk4(x0, t_final, dt, f, [&](double t, const Vector& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.outputs.push_back(sys.C * x);
  });
  return traj;
}

Vector on_manifold_state(const std::vector<abstraction::AbstractionResult>& abstractions,
                         const Vector& xhat0) {
  Eigen::Index n = 0, nh = 0;
  for (const auto& a : abstractions) {
    n += a.simfn.P.rows();
    nh += a.simfn.P.cols();
  }
  if (xhat0.size() != nh) throw DimensionError("on_manifold_state: xhat0 width mismatch");
  Vector x(n);
  Eigen::Index xo = 0, ho = 0;
  for (const auto& a : abstractions) {
    x.segment(xo, a.simfn.P.rows()) = a.simfn.P * xhat0.segment(ho, a.simfn.P.cols());
    xo += a.simfn.P.rows();
    ho += a.simfn.P.cols();
  }
  return x;
}

RefinementRun refine_and_run(const systems::Interconnection& concrete,
                             const std::vector<abstraction::AbstractionResult>& abstractions,
                             const compose::ComposedSimFn& composed, const Vector& x0,
                             const Vector& xhat0, const Signal& uhat, double t_final, double dt) {
  const systems::Interconnection abstract_ic = compose::compose_abstractions(concrete, abstractions);
  const std::size_t N = concrete.subsystems.size();
  if (composed.parts.size() != N) {
    throw DimensionError("refine_and_run: composed simulation function has the wrong size");
  }

  std::vector<Eigen::Index> n_sz, nh_sz, mh_sz, n_off, nh_off, mh_off;
  Eigen::Index n = 0, nh = 0, mh = 0;
  for (std::size_t i = 0; i < N; ++i) {
    n_off.push_back(n);
    nh_off.push_back(nh);
    mh_off.push_back(mh);
    n_sz.push_back(concrete.subsystems[i].n());
    nh_sz.push_back(abstract_ic.subsystems[i].n());
    mh_sz.push_back(abstract_ic.subsystems[i].m());
    n += n_sz.back();
    nh += nh_sz.back();
    mh += mh_sz.back();
  }
  if (x0.size() != n || xhat0.size() != nh || uhat.width() != mh) {
    throw DimensionError("refine_and_run: initial state or abstract input width mismatch");
  }

  struct Eval {
    Vector dz;
    std::vector<Vector> u;
  };
  auto evaluate = [&](const Vector& z, const Vector& uh) {
    const auto xh = split(z.head(nh), nh_off, nh_sz);
    const auto x = split(z.tail(n), n_off, n_sz);
    Eval e;
    e.dz.resize(nh + n);
    for (std::size_t i = 0; i < N; ++i) {
      const int ii = static_cast<int>(i);
      const auto& as = abstract_ic.subsystems[i];
      const auto& cs = concrete.subsystems[i];
      const Vector what = systems::gather_internal_inputs(abstract_ic, ii, xh);
      const Vector w = systems::gather_internal_inputs(concrete, ii, x);
      const Vector uh_i = uh.segment(mh_off[i], mh_sz[i]);
      const Vector u = abstraction::interface(abstractions[i].simfn, x[i], xh[i], uh_i, what);
      e.dz.segment(nh_off[i], nh_sz[i]) = as.A * xh[i] + as.B * uh_i + as.D * what;
      e.dz.segment(nh + n_off[i], n_sz[i]) = cs.A * x[i] + cs.B * u + cs.D * w;
      e.u.push_back(u);
    }
    return e;
  };

  RefinementRun run;
  run.abstract_run.dt = dt;
  run.concrete_run.dt = dt;
  std::vector<Vector> parts_rows;
  Vector z0(nh + n);
  z0 << xhat0, x0;

  const Rhs f = [&](const Vector& z, double t) -> Vector {
    return evaluate(z, uhat(hold_point(t, dt))).dz;
  };
  rk4(z0, t_final, dt, f, [&](double t, const Vector& z) {
    const auto xh = split(z.head(nh), nh_off, nh_sz);
    const auto x = split(z.tail(n), n_off, n_sz);
    Vector yh(0), y(0);
    for (std::size_t i = 0; i < N; ++i) {
      const Vector a = abstract_ic.subsystems[i].C_ext * xh[i];
      const Vector c = concrete.subsystems[i].C_ext * x[i];
      yh.conservativeResize(yh.size() + a.size());
      yh.tail(a.size()) = a;
      y.conservativeResize(y.size() + c.size());
      y.tail(c.size()) = c;
    }
    const Vector parts = composed.part_values(xh, x);
    run.abstract_run.times.push_back(t);
    run.abstract_run.states.push_back(z.head(nh));
    run.abstract_run.outputs.push_back(yh);
    run.concrete_run.times.push_back(t);
    run.concrete_run.states.push_back(z.tail(n));
    run.concrete_run.outputs.push_back(y);
    parts_rows.push_back(parts);
    run.V.push_back(composed.weights.cwiseProduct(parts).maxCoeff());
    run.mismatch.push_back((yh - y).norm());
    Vector u_all(0);
    for (const auto& u : evaluate(z, uhat(hold_point(t, dt))).u) {
      u_all.conservativeResize(u_all.size() + u.size());
      u_all.tail(u.size()) = u;
    }
    run.concrete_inputs.push_back(u_all);
  });
  run.V_parts.resize(static_cast<Eigen::Index>(parts_rows.size()), static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < parts_rows.size(); ++k) {
    run.V_parts.row(static_cast<Eigen::Index>(k)) = parts_rows[k].transpose();
  }
  return run;
}

std::vector<double> scalar_bound(double V0, double lambda, double rho, double u_inf,
                                 const std::vector<double>& times) {
  if (!(lambda > 0.0)) throw ValidationError("scalar_bound: lambda must be positive");
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(std::exp(-lambda * t) * V0 + (rho / lambda) * u_inf);
  return out;
}

GeneralGains general_gains(double alpha, double lambda, double rho, double mu_total) {
  if (!(lambda > 0.0) || !(alpha > 0.0)) {
    throw ValidationError("general_gains: alpha and lambda must be positive");
  }
  return {4.0 * rho / (alpha * lambda), 4.0 * mu_total / (alpha * lambda)};
}

VectorBound vector_bound(const compose::GainMatrices& gm, const Vector& Zhat, const Vector& V0,
                         int k_max) {
  const Eigen::Index N = gm.size();
  if (Zhat.size() != N || V0.size() != N) throw DimensionError("vector_bound: size mismatch");
  const Matrix G = gm.lambdas.cwiseInverse().asDiagonal() * gm.Gamma;
  if (N > 0 && linalg::eigenvalues(G, "Lambda^-1 Gamma").radius >= 1.0) {
    throw ValidationError("vector_bound: spectral radius of the gain operator is not below one");
  }
  const Vector z = Zhat.cwiseQuotient(gm.lambdas);
  VectorBound out;
  out.iterates.push_back(V0);
  for (int k = 0; k < k_max; ++k) out.iterates.push_back(G * out.iterates.back() + z);
  out.fixed_point = N == 0 ? Vector(0) : Vector((Matrix::Identity(N, N) - G).partialPivLu().solve(z));
  return out;
}

BoundReport evaluate_bounds(const RefinementRun& run, const compose::ComposedSimFn& composed,
                            const compose::GainMatrices& gm, const Signal& uhat,
                            const std::vector<Eigen::Index>& uhat_widths, double t_final,
                            std::optional<double> V0_override) {
  const Eigen::Index N = gm.size();
  if (static_cast<Eigen::Index>(uhat_widths.size()) != N) {
    throw DimensionError("evaluate_bounds: one abstract input width per subsystem is required");
  }
  BoundReport r;
  r.lambda = composed.lambda;
  r.rho = composed.rho;
  r.alpha = composed.alpha;
  r.rho_over_lambda = composed.rho / composed.lambda;
  r.u_inf = uhat.sup_norm(t_final);
  r.V0 = V0_override.value_or(run.V.empty() ? 0.0 : run.V.front());
  r.gammas = general_gains(composed.alpha, composed.lambda, composed.rho, gm.Gamma.sum());
  r.times = run.concrete_run.times;
  r.scalar_bound = scalar_bound(r.V0, r.lambda, r.rho, r.u_inf, r.times);
  r.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    const double m = r.scalar_bound[k] / r.alpha - run.mismatch[k];
    r.margin.push_back(m);
    r.min_margin = std::min(r.min_margin, m);
    r.max_mismatch = std::max(r.max_mismatch, run.mismatch[k]);
  }

  r.Zhat.resize(N);
  Eigen::Index offset = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index w = uhat_widths[static_cast<std::size_t>(i)];
    r.Zhat(i) = gm.rhos(i) * uhat.sup_norm(t_final, offset, w);
    offset += w;
  }
  const Vector Vstart = run.V_parts.rows() > 0 ? Vector(run.V_parts.row(0).transpose()) : Vector::Zero(N);
  const VectorBound vb = vector_bound(gm, r.Zhat, Vstart, 0);
  r.vector_fixed_point = vb.fixed_point;
  const Matrix G = gm.lambdas.cwiseInverse().asDiagonal() * gm.Gamma;
  r.vector_bound = r.vector_fixed_point +
                   (Matrix::Identity(N, N) - G).partialPivLu().solve(Vstart);
  r.max_parts = run.V_parts.colwise().maxCoeff().transpose();
  r.min_vector_margin = (r.vector_bound - r.max_parts).minCoeff();
  return r;
}

void write_trajectory_csv(std::ostream& os, const RefinementRun& run) {
  const auto& c = run.concrete_run;
  const auto& a = run.abstract_run;
  if (c.times.empty()) return;
  const Eigen::Index n = c.states.front().size();
  const Eigen::Index nh = a.states.front().size();
  const Eigen::Index q = c.outputs.front().size();
  const Eigen::Index N = run.V_parts.cols();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x[" << i << "]";
  for (Eigen::Index i = 0; i < nh; ++i) os << ",xhat[" << i << "]";
  for (Eigen::Index i = 0; i < q; ++i) os << ",y[" << i << "]";
  for (Eigen::Index i = 0; i < q; ++i) os << ",yhat[" << i << "]";
  os << ",V";
  for (Eigen::Index i = 0; i < N; ++i) os << ",V_" << i + 1;
  os << ",mismatch\n";
  const auto old_precision = os.precision(17);
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    os << c.times[k];
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << c.states[k](i);
    for (Eigen::Index i = 0; i < nh; ++i) os << ',' << a.states[k](i);
    for (Eigen::Index i = 0; i < q; ++i) os << ',' << c.outputs[k](i);
    for (Eigen::Index i = 0; i < q; ++i) os << ',' << a.outputs[k](i);
    os << ',' << run.V[k];
    for (Eigen::Index i = 0; i < N; ++i) os << ',' << run.V_parts(static_cast<Eigen::Index>(k), i);
    os << ',' << run.mismatch[k] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace simcompose::simulate

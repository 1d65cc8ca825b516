#include "tsg/integrator.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/QR>

#include "tsg/errors.hpp"

namespace tsg {

namespace {

std::vector<bool> slack_flags(const std::vector<CableState>& s) {
  std::vector<bool> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = s[j].slack;
  return out;
}

}  // namespace

Integrator::Integrator(const ForceModel& model, SolverSettings settings)
    : model_(model), settings_(settings) {
  if (!(settings_.h > 0.0)) throw PreconditionError("time step must be positive");
  const auto& T = model_.topology();
  if (T.n_free() > 0) {
    mass_llt_.compute(T.mass_free());
    if (mass_llt_.info() != Eigen::Success) throw ModelError("free mass matrix is not positive definite");
  }
}

VectorXd Integrator::recover_velocity(const VectorXd& p, double t) const {
  const auto& T = model_.topology();
  if (T.n_free() == 0) return VectorXd();
  VectorXd rhs = p;
  if (T.n_prescribed() > 0) {
    VectorXd qp, vp, ap;
    T.prescribed_state(t, qp, vp, ap);
    rhs -= T.mass_coupling() * vp;
  }
  return mass_llt_.solve(rhs);
}

SystemState Integrator::initial_state(const VectorXd& q0, const VectorXd& qdot0, double t0) const {
  const auto& T = model_.topology();
  if (q0.size() != T.n() || qdot0.size() != T.n()) throw DimensionError("initial state has the wrong size");
  SystemState s;
  s.t = t0;
  s.q = q0;
  T.apply_prescribed(t0, s.q);
  s.qdot = T.gather_free(qdot0);
  s.p = T.mass_free() * s.qdot;
  if (T.n_prescribed() > 0) {
    VectorXd qp, vp, ap;
    T.prescribed_state(t0, qp, vp, ap);
    s.p += T.mass_coupling() * vp;
  }
  s.lambda = VectorXd::Zero(T.n_constraints());
  return s;
}

VectorXd Integrator::full_velocity(const SystemState& s) const {
  const auto& T = model_.topology();
  VectorXd v = VectorXd::Zero(T.n());
  T.scatter_free(s.qdot, v);
  if (T.n_prescribed() > 0) {
    VectorXd qp, vp, ap;
    T.prescribed_state(s.t, qp, vp, ap);
    T.scatter_prescribed(vp, v);
  }
  return v;
}

double Integrator::velocity_defect(const SystemState& s) const {
  // Φ̌ is quadratic, so the central difference with unit step is the exact directional derivative.
  const auto& T = model_.topology();
  if (T.n_constraints() == 0) return 0.0;
  const VectorXd v = full_velocity(s);
  const VectorXd d = 0.5 * (T.constraint_residual(s.q + v) - T.constraint_residual(s.q - v));
  return d.lpNorm<Eigen::Infinity>();
}

double Integrator::kinetic_energy(const SystemState& s) const { return model_.kinetic_energy(full_velocity(s)); }

double Integrator::energy(const SystemState& s) const {
  return kinetic_energy(s) + model_.gravity_potential(s.q) + model_.cable_potential(s.q, s.t);
}

void Integrator::residual_and_jacobian(const SystemState& k, double h, const VectorXd& q_next,
                                       const VectorXd& lambda_s, VectorXd& res, MatrixXd& jac) const {
  const auto& T = model_.topology();
  const int nf = T.n_free();
  const int nl = T.n_constraints();
  const VectorXd dq = q_next - k.q;
  const VectorXd q_mid = 0.5 * (k.q + q_next);
  const VectorXd v_mid = dq / h;
  const double t_mid = k.t + 0.5 * h;

  const VectorXd F = model_.total_force(q_mid, v_mid, t_mid);
  res.resize(nf + nl);
  res.head(nf) = -h * k.p + T.mass_free() * T.gather_free(dq) - 0.5 * h * h * F;
  if (T.n_prescribed() > 0) res.head(nf) += T.mass_coupling() * T.gather_prescribed(dq);
  const MatrixXd A_k = T.constraint_jacobian(k.q);
  if (nl > 0) {
    res.head(nf) -= A_k.transpose() * lambda_s;
    res.tail(nl) = T.constraint_residual(q_next);
  }

  MatrixXd dQ, dQd;
  model_.tension_force_derivatives(q_mid, v_mid, t_mid, dQ, dQd);
  jac.setZero(nf + nl, nf + nl);
  jac.topLeftCorner(nf, nf) = T.mass_free() - 0.5 * h * h * (0.5 * dQ + dQd / h);
  if (nl > 0) {
    jac.topRightCorner(nf, nl) = -A_k.transpose();
    jac.bottomLeftCorner(nl, nf) = T.constraint_jacobian(q_next);
  }
}

bool Integrator::advance(const SystemState& in, double h, SystemState& out, StepInfo& info) const {
  const auto& T = model_.topology();
  const int nf = T.n_free();
  const int nl = T.n_constraints();
  const double t1 = in.t + h;

  VectorXd q = in.q;
  T.apply_prescribed(t1, q);
  VectorXd lam = VectorXd::Zero(nl);
  VectorXd res;
  MatrixXd jac;
  std::vector<bool> prev_slack;
  std::vector<CableState> states;
  bool converged = false;

  for (int it = 0; it <= settings_.max_iter; ++it) {
    residual_and_jacobian(in, h, q, lam, res, jac);
    const double rm = nf ? res.head(nf).lpNorm<Eigen::Infinity>() : 0.0;
    const double rc = nl ? res.tail(nl).lpNorm<Eigen::Infinity>() : 0.0;
    info.iterations = it;
    info.residual = rm;
    info.constraint_norm = rc;
    if (!std::isfinite(rm) || !std::isfinite(rc)) break;

    states = model_.cable_states(0.5 * (in.q + q), (q - in.q) / h, in.t + 0.5 * h);
    auto flags = slack_flags(states);
    if (!prev_slack.empty() && flags != prev_slack) ++info.status_changes;
    prev_slack = std::move(flags);

    if (rm <= settings_.momentum_tol && rc <= settings_.tol) {
      converged = true;
      break;
    }
    if (it == settings_.max_iter) break;

    Eigen::PartialPivLU<MatrixXd> lu(jac);
    VectorXd dx = lu.solve(-res);
    if (!dx.allFinite() || (jac * dx + res).lpNorm<Eigen::Infinity>() > 1e-6 * (1.0 + res.lpNorm<Eigen::Infinity>()))
      dx = jac.completeOrthogonalDecomposition().solve(-res);
    if (!dx.allFinite()) break;

    VectorXd qf = T.gather_free(q) + dx.head(nf);
    T.scatter_free(qf, q);
    if (nl > 0) lam += dx.tail(nl);

    // Stagnation at round-off: accept when constraints hold and the update is negligible.
    const double scale = 1.0 + qf.lpNorm<Eigen::Infinity>();
    if (dx.head(nf).lpNorm<Eigen::Infinity>() <= 1e-15 * scale && rc <= settings_.tol &&
        rm <= 1e3 * settings_.momentum_tol) {
      residual_and_jacobian(in, h, q, lam, res, jac);
      info.residual = nf ? res.head(nf).lpNorm<Eigen::Infinity>() : 0.0;
      info.constraint_norm = nl ? res.tail(nl).lpNorm<Eigen::Infinity>() : 0.0;
      converged = info.constraint_norm <= settings_.tol;
      break;
    }
  }
  if (!converged) return false;

  const VectorXd dq = q - in.q;
  const VectorXd F = model_.total_force(0.5 * (in.q + q), dq / h, in.t + 0.5 * h);
  VectorXd p = (T.mass_free() * T.gather_free(dq)) / h + 0.5 * h * F;
  if (T.n_prescribed() > 0) p += (T.mass_coupling() * T.gather_prescribed(dq)) / h;
  if (nl > 0) p += T.constraint_jacobian(q).transpose() * lam / h;

  out.t = t1;
  out.q = std::move(q);
  out.p = std::move(p);
  out.qdot = recover_velocity(out.p, t1);
  out.lambda = (2.0 / (h * h)) * lam;
  return true;
}

StepInfo Integrator::step(const SystemState& in, SystemState& out) const {
  StepInfo info;
  if (advance(in, settings_.h, out, info)) return info;
  if (settings_.halve_on_chatter) {
    StepInfo a, b;
    SystemState mid;
    const double hh = 0.5 * settings_.h;
    if (advance(in, hh, mid, a) && advance(mid, hh, out, b)) {
      // keep the end time exact
      out.t = in.t + settings_.h;
      b.halved = true;
      b.iterations += a.iterations;
      b.status_changes += a.status_changes + info.status_changes;
      return b;
    }
  }
  std::ostringstream os;
  os << "Newton iteration did not converge at t = " << in.t << " (momentum residual " << info.residual
     << ", constraint residual " << info.constraint_norm << ", " << info.status_changes
     << " slack status changes)";
  throw SolverError(os.str(), std::max(info.residual, info.constraint_norm));
}

SimulationResult simulate(const ForceModel& model, const VectorXd& q0, const VectorXd& qdot0, double duration,
                          const SolverSettings& settings, const SimulationOptions& options) {
  Integrator integ(model, settings);
  SimulationResult r;
  SystemState s = integ.initial_state(q0, qdot0);
  const long nsteps = std::lround(duration / settings.h);
  const int stride = std::max(1, options.record_stride);

  std::vector<bool> slack;
  auto record = [&](const SystemState& st) {
    r.t.push_back(st.t);
    r.q.push_back(st.q);
    r.qdot.push_back(st.qdot);
    r.energy.push_back(integ.energy(st));
    if (options.record_cables) r.cables.push_back(model.cable_states(st.q, integ.full_velocity(st), st.t));
  };
  auto track_slack = [&](const SystemState& st) {
    if (model.num_cables() == 0) return;
    const auto cs = model.cable_states(st.q, integ.full_velocity(st), st.t);
    const auto flags = slack_flags(cs);
    if (!slack.empty())
      for (std::size_t j = 0; j < flags.size(); ++j)
        if (flags[j] != slack[j]) r.slack_events.push_back({st.t, static_cast<int>(j), flags[j]});
    slack = flags;
  };

  record(s);
  track_slack(s);
  const auto& T = model.topology();
  long next_progress = 1;
  for (long k = 0; k < nsteps; ++k) {
    SystemState nx;
    try {
      const StepInfo info = integ.step(s, nx);
      if (info.halved) ++r.halved_steps;
    } catch (const SolverError& e) {
      r.failed = true;
      r.diagnostic = e.what();
      break;
    }
    // accumulate time from the step index to avoid drift
    nx.t = (k + 1) * settings.h;
    s = std::move(nx);
    ++r.steps;
    if (T.n_constraints() > 0)
      r.max_constraint = std::max(r.max_constraint, T.constraint_residual(s.q).lpNorm<Eigen::Infinity>());
    track_slack(s);
    if ((k + 1) % stride == 0 || k + 1 == nsteps) record(s);
    if (options.progress && s.t >= static_cast<double>(next_progress)) {
      options.progress(s);
      ++next_progress;
    }
    if (options.stop && options.stop(s)) {
      r.stopped = true;
      if ((k + 1) % stride != 0 && k + 1 != nsteps) record(s);
      break;
    }
  }
  return r;
}

}  // namespace tsg

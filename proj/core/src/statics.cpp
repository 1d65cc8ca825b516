#include "tsg/statics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "tsg/errors.hpp"

namespace tsg {

StaticResidual static_residual(const ForceModel& model, const VectorXd& q, const VectorXd& lambda, double t) {
  const auto& T = model.topology();
  const VectorXd qdot = VectorXd::Zero(T.n());
  const VectorXd F = model.total_force(q, qdot, t);
  const MatrixXd A = T.constraint_jacobian(q);
  StaticResidual r;
  r.equation = -F - A.transpose() * lambda;
  r.constraint = T.constraint_residual(q);
  return r;
}

VectorXd recover_multipliers(const MatrixXd& A, const VectorXd& F) {
  if (A.rows() == 0) return VectorXd();
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A.transpose());
  cod.setThreshold(1e-12);
  return cod.solve(-F);
}

ForceDensityResult inverse_statics_force_densities(const ForceModel& model, const VectorXd& q, double t) {
  const auto& T = model.topology();
  const MatrixXd A = T.constraint_jacobian(q);
  const MatrixXd N = nullspace(A);
  const MatrixXd D = model.density_matrix(q);
  const MatrixXd C = N.transpose() * D;
  const VectorXd rhs = N.transpose() * model.load_force(t);

  ForceDensityResult r;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(C);
  cod.setThreshold(1e-10);
  r.gamma = C.cols() ? VectorXd(cod.solve(rhs)) : VectorXd();
  r.rank = static_cast<int>(cod.rank());
  r.solution_dim = static_cast<int>(C.cols()) - r.rank;
  r.homogeneous = nullspace(C);
  r.residual = (C * r.gamma - rhs).norm();
  for (Eigen::Index j = 0; j < r.gamma.size(); ++j)
    if (r.gamma(j) < 0.0) r.negative.push_back(static_cast<int>(j));
  const VectorXd F = model.load_force(t) - D * r.gamma;
  r.lambda = recover_multipliers(A, F);
  return r;
}

void rest_length_system(const ForceModel& model, const VectorXd& q, double t, MatrixXd& B, VectorXd& b) {
  const auto& T = model.topology();
  const int nc = model.num_cables();
  const MatrixXd N = nullspace(T.constraint_jacobian(q));
  const VectorXd zero = VectorXd::Zero(T.n());
  B.resize(N.cols(), nc);
  VectorXd l(nc);
  for (int j = 0; j < nc; ++j) {
    const CableState s = model.kinematics(j, q, zero);
    const auto& c = model.cables()[static_cast<std::size_t>(j)];
    l(j) = s.l;
    B.col(j) = N.transpose() * (c.JE.transpose() * (c.spec.stiffness * s.lhat));
  }
  b = B * l - N.transpose() * model.load_force(t);
}

RestLengthResult inverse_statics_rest_lengths(const ForceModel& model, const VectorXd& q,
                                              const std::map<int, double>& fixed, double t,
                                              double consistency_tol) {
  const auto& T = model.topology();
  const int nc = model.num_cables();
  const MatrixXd A = T.constraint_jacobian(q);
  const VectorXd zero = VectorXd::Zero(T.n());

  RestLengthResult r;
  rest_length_system(model, q, t, r.B, r.b);
  VectorXd l(nc);
  for (int j = 0; j < nc; ++j) l(j) = model.kinematics(j, q, zero).l;
  r.rank_B = numerical_rank(r.B);

  std::vector<int> unknown;
  VectorXd rhs = r.b;
  r.mu = VectorXd::Zero(nc);
  for (int j = 0; j < nc; ++j) {
    const auto it = fixed.find(j);
    if (it == fixed.end()) {
      unknown.push_back(j);
    } else {
      r.mu(j) = it->second;
      rhs -= r.B.col(j) * it->second;
    }
  }
  MatrixXd Bu(r.B.rows(), static_cast<Eigen::Index>(unknown.size()));
  for (std::size_t k = 0; k < unknown.size(); ++k) Bu.col(static_cast<Eigen::Index>(k)) = r.B.col(unknown[k]);
  const int rank_u = numerical_rank(Bu);
  if (rank_u < static_cast<int>(unknown.size()))
    throw PreconditionError("rest-length system is underdetermined: solution set has dimension " +
                            std::to_string(static_cast<int>(unknown.size()) - rank_u) +
                            "; fix more rest lengths");
  const VectorXd mu_u = unknown.empty() ? VectorXd() : VectorXd(Bu.colPivHouseholderQr().solve(rhs));
  for (std::size_t k = 0; k < unknown.size(); ++k) r.mu(unknown[k]) = mu_u(static_cast<Eigen::Index>(k));
  r.residual = (Bu * mu_u - rhs).norm();
  const double scale = std::max(1.0, r.b.norm());
  if (r.residual > consistency_tol * scale) {
    std::ostringstream os;
    os << "rest-length system is inconsistent (residual " << r.residual << ")";
    throw SolverError(os.str(), r.residual);
  }
  std::vector<int> bad;
  for (int j = 0; j < nc; ++j)
    if (!(r.mu(j) < l(j))) bad.push_back(j);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "cables would be slack at the given configuration:";
    for (int j : bad) os << ' ' << model.cables()[static_cast<std::size_t>(j)].spec.name;
    throw PreconditionError(os.str());
  }
  r.gamma.resize(nc);
  for (int j = 0; j < nc; ++j)
    r.gamma(j) = model.cables()[static_cast<std::size_t>(j)].spec.stiffness * (l(j) - r.mu(j)) / l(j);
  const VectorXd F = model.load_force(t) - model.density_matrix(q) * r.gamma;
  r.lambda = recover_multipliers(A, F);
  return r;
}

EquilibriumResult refine_equilibrium(const ForceModel& model, const VectorXd& q_guess, double t, double tol,
                                     int max_iter) {
  const auto& T = model.topology();
  const int nf = T.n_free();
  const int nl = T.n_constraints();
  const VectorXd zero = VectorXd::Zero(T.n());
  VectorXd q = q_guess;
  T.apply_prescribed(t, q);

  auto residual = [&](const VectorXd& qq, const VectorXd& lam) {
    VectorXd R(nf + nl);
    R.head(nf) = model.total_force(qq, zero, t) + T.constraint_jacobian(qq).transpose() * lam;
    R.tail(nl) = T.constraint_residual(qq);
    return R;
  };

  VectorXd lam = recover_multipliers(T.constraint_jacobian(q), model.total_force(q, zero, t));
  EquilibriumResult out;
  VectorXd R = residual(q, lam);
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    if (R.lpNorm<Eigen::Infinity>() <= tol) break;
    MatrixXd dQ, dQd;
    model.tension_force_derivatives(q, zero, t, dQ, dQd);
    const MatrixXd A = T.constraint_jacobian(q);
    MatrixXd J = MatrixXd::Zero(nf + nl, nf + nl);
    J.topLeftCorner(nf, nf) = dQ + T.weighted_hessian(lam);
    J.topRightCorner(nf, nl) = A.transpose();
    J.bottomLeftCorner(nl, nf) = A;
    const VectorXd dx = J.completeOrthogonalDecomposition().solve(-R);
    double step = 1.0;
    const double r0 = R.norm();
    for (int ls = 0; ls < 30; ++ls) {
      VectorXd qn = q;
      VectorXd qf = T.gather_free(q) + step * dx.head(nf);
      T.scatter_free(qf, qn);
      const VectorXd ln = lam + step * dx.tail(nl);
      const VectorXd Rn = residual(qn, ln);
      if (Rn.norm() < (1.0 - 1e-4 * step) * r0 || ls == 29) {
        q = qn;
        lam = ln;
        R = Rn;
        break;
      }
      step *= 0.5;
    }
  }
  out.q = q;
  out.lambda = lam;
  out.residual = R.lpNorm<Eigen::Infinity>();
  if (out.residual > tol) throw SolverError("equilibrium refinement did not converge", out.residual);
  return out;
}

}  // namespace tsg

#include "tsg/modal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tsg/errors.hpp"
#include "tsg/statics.hpp"

namespace tsg {

LinearizedModel linearize(const ForceModel& model, const VectorXd& q_e, double t, double tol) {
  const auto& T = model.topology();
  const VectorXd zero = VectorXd::Zero(T.n());
  const MatrixXd A = T.constraint_jacobian(q_e);
  const VectorXd F = model.total_force(q_e, zero, t);

  LinearizedModel lin;
  lin.q = q_e;
  lin.lambda = recover_multipliers(A, F);
  const VectorXd res = A.rows() ? VectorXd(F + A.transpose() * lin.lambda) : F;
  lin.equilibrium_residual = res.norm();
  const double scale = std::max(1.0, F.norm());
  if (lin.equilibrium_residual > tol * scale) {
    std::ostringstream os;
    os << "configuration is not a static equilibrium (residual " << lin.equilibrium_residual << ")";
    throw PreconditionError(os.str());
  }

  MatrixXd dQ, dQd;
  model.tension_force_derivatives(q_e, zero, t, dQ, dQd);
  lin.N = nullspace(A);
  const MatrixXd& N = lin.N;
  lin.M = N.transpose() * T.mass_free() * N;
  lin.C = N.transpose() * (-dQd) * N;
  MatrixXd Kfull = -dQ;
  if (A.rows()) Kfull -= T.weighted_hessian(lin.lambda);
  lin.K = N.transpose() * Kfull * N;
  return lin;
}

double signed_frequency(double omega2) {
  const double f = std::sqrt(std::abs(omega2)) / (2.0 * std::numbers::pi);
  return omega2 < 0.0 ? -f : f;
}

ModeSet solve_modes(const LinearizedModel& lin, const SystemTopology& topo) {
  ModeSet ms;
  const Eigen::Index r = lin.M.rows();
  if (r == 0) return ms;
  Eigen::LLT<MatrixXd> llt(0.5 * (lin.M + lin.M.transpose()));
  if (llt.info() != Eigen::Success) throw SolverError("reduced mass matrix is not positive definite");
  const double kn = lin.K.norm();
  ms.asymmetry = kn > 0.0 ? (lin.K - lin.K.transpose()).norm() / kn : 0.0;
  const MatrixXd Ks = 0.5 * (lin.K + lin.K.transpose());
  const MatrixXd L = llt.matrixL();
  // L⁻¹ K L⁻ᵀ
  MatrixXd S = L.triangularView<Eigen::Lower>().solve(Ks);
  S = L.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw SolverError("symmetric eigenvalue solver failed");
  ms.omega2 = es.eigenvalues();
  ms.shapes_reduced = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  ms.frequencies.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) ms.frequencies(i) = signed_frequency(ms.omega2(i));
  for (Eigen::Index i = 0; i < r; ++i) {
    VectorXd q = lin.q;
    const VectorXd dq = lin.N * ms.shapes_reduced.col(i);
    VectorXd qf = topo.gather_free(q) + dq;
    topo.scatter_free(qf, q);
    ms.shapes_natural.push_back(std::move(q));
  }
  return ms;
}

std::vector<double> distinct_frequencies(const VectorXd& freqs, double rel_tol) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < freqs.size(); ++i) {
    const double f = freqs(i);
    if (!out.empty()) {
      const double prev = out.back();
      const double scale = std::max(std::abs(f), std::abs(prev));
      if (std::abs(f - prev) <= rel_tol * scale) continue;
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace tsg

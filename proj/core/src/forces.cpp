#include "tsg/forces.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "tsg/errors.hpp"

namespace tsg {

double actuation_coefficient(double t, double duration) {
  if (t <= 0.0) return 0.0;
  if (duration <= 0.0 || t >= duration) return 1.0;
  return t / duration;
}

double CableSpec::rest_length_at(double t) const {
  if (!actuated) return rest_length;
  const double tau = actuation_coefficient(t, actuation_duration);
  return (1.0 - tau) * rest_length + tau * rest_length_final;
}

std::pair<double, bool> tension_magnitude(double kappa, double eta, double mu, double l, double ldot,
                                          bool can_slack) {
  const double f = kappa * (l - mu) + eta * ldot;
  if (!can_slack) return {f, false};
  if (f >= 0.0 && l >= mu) return {f, false};
  return {0.0, true};
}

ForceModel::ForceModel(std::shared_ptr<const SystemTopology> topo, std::vector<CableSpec> cables, LoadSet loads)
    : topo_(std::move(topo)), loads_(std::move(loads)) {
  const auto& T = *topo_;
  for (auto& spec : cables) {
    if (spec.stiffness < 0.0 || spec.damping < 0.0)
      throw ModelError("cable '" + spec.name + "': stiffness and damping must be non-negative");
    if (!(spec.rest_length > 0.0)) throw ModelError("cable '" + spec.name + "': rest length must be positive");
    Cable c;
    c.J = T.point_matrix(spec.b) - T.point_matrix(spec.a);
    c.JE.resize(T.dim(), T.n_free());
    c.JP.resize(T.dim(), T.n_prescribed());
    for (int i = 0; i < T.n_free(); ++i) c.JE.col(i) = c.J.col(T.free_indices()[static_cast<std::size_t>(i)]);
    for (int i = 0; i < T.n_prescribed(); ++i)
      c.JP.col(i) = c.J.col(T.prescribed_indices()[static_cast<std::size_t>(i)]);
    c.spec = std::move(spec);
    cables_.push_back(std::move(c));
  }
  if (loads_.gravity.size() != 0 && loads_.gravity.size() != T.dim())
    throw DimensionError("gravity vector has wrong dimension");
  for (const auto& pl : loads_.concentrated)
    if (pl.force.size() != T.dim()) throw DimensionError("concentrated load has wrong dimension");
  set_gravity(loads_.gravity);
}

void ForceModel::set_gravity(const VectorXd& g) {
  const auto& T = *topo_;
  loads_.gravity = g;
  VectorXd full = VectorXd::Zero(T.n());
  if (g.size() == T.dim()) {
    for (std::size_t i = 0; i < T.members().size(); ++i) {
      const auto& mi = T.members()[i];
      const MatrixXd C = T.point_matrix(PointRef::on_member(static_cast<int>(i), mi.tpl.mass_center_coeffs()));
      full += C.transpose() * (mi.tpl.mass() * g);
    }
  }
  G_ = T.gather_free(full);
}

void ForceModel::set_rest_lengths(const VectorXd& mu) {
  if (mu.size() != num_cables()) throw DimensionError("rest length vector has wrong size");
  for (int j = 0; j < num_cables(); ++j) {
    if (!(mu(j) > 0.0)) throw ModelError("rest length must be positive");
    cables_[static_cast<std::size_t>(j)].spec.rest_length = mu(j);
  }
}

VectorXd ForceModel::rest_lengths(double t) const {
  VectorXd mu(num_cables());
  for (int j = 0; j < num_cables(); ++j) mu(j) = cables_[static_cast<std::size_t>(j)].spec.rest_length_at(t);
  return mu;
}

CableState ForceModel::kinematics(int j, const VectorXd& q, const VectorXd& qdot) const {
  const Cable& c = cables_.at(static_cast<std::size_t>(j));
  CableState s;
  const VectorXd lv = c.J * q;
  s.l = lv.norm();
  if (s.l < 1e-12) throw ModelError("cable '" + c.spec.name + "' has degenerate length");
  s.lhat = lv / s.l;
  s.ldot = qdot.size() ? s.lhat.dot(c.J * qdot) : 0.0;
  return s;
}

std::vector<CableState> ForceModel::cable_states(const VectorXd& q, const VectorXd& qdot, double t) const {
  std::vector<CableState> out;
  out.reserve(cables_.size());
  for (int j = 0; j < num_cables(); ++j) {
    CableState s = kinematics(j, q, qdot);
    const auto& sp = cables_[static_cast<std::size_t>(j)].spec;
    s.mu = sp.rest_length_at(t);
    std::tie(s.f, s.slack) = tension_magnitude(sp.stiffness, sp.damping, s.mu, s.l, s.ldot, sp.can_slack);
    s.gamma = s.f / s.l;
    out.push_back(std::move(s));
  }
  return out;
}

VectorXd ForceModel::tension_force(const VectorXd& q, const VectorXd& qdot, double t,
                                   std::vector<CableState>* states) const {
  std::vector<CableState> st = cable_states(q, qdot, t);
  VectorXd Q = VectorXd::Zero(topo_->n_free());
  for (std::size_t j = 0; j < cables_.size(); ++j)
    if (st[j].f != 0.0) Q -= cables_[j].JE.transpose() * (st[j].f * st[j].lhat);
  if (states) *states = std::move(st);
  return Q;
}

MatrixXd ForceModel::density_matrix(const VectorXd& q) const {
  MatrixXd D(topo_->n_free(), num_cables());
  for (std::size_t j = 0; j < cables_.size(); ++j)
    D.col(static_cast<Eigen::Index>(j)) = cables_[j].JE.transpose() * (cables_[j].J * q);
  return D;
}

VectorXd ForceModel::tension_force_from_densities(const VectorXd& q, const VectorXd& gamma) const {
  return -(density_matrix(q) * gamma);
}

VectorXd ForceModel::gravity_force() const { return G_; }

VectorXd ForceModel::external_force(double t) const {
  const auto& T = *topo_;
  VectorXd full = VectorXd::Zero(T.n());
  for (const auto& pl : loads_.concentrated) {
    const double s = pl.scale ? pl.scale(t) : 1.0;
    full += T.point_matrix(pl.at).transpose() * (s * pl.force);
  }
  return T.gather_free(full);
}

VectorXd ForceModel::total_force(const VectorXd& q, const VectorXd& qdot, double t,
                                 std::vector<CableState>* states) const {
  return gravity_force() + external_force(t) + tension_force(q, qdot, t, states);
}

void ForceModel::tension_force_derivatives(const VectorXd& q, const VectorXd& qdot, double t, MatrixXd& dQ_dq,
                                           MatrixXd& dQ_dqdot) const {
  const int nf = topo_->n_free();
  const int m = topo_->dim();
  dQ_dq = MatrixXd::Zero(nf, nf);
  dQ_dqdot = MatrixXd::Zero(nf, nf);
  const auto st = cable_states(q, qdot, t);
  const MatrixXd I = MatrixXd::Identity(m, m);
  for (std::size_t j = 0; j < cables_.size(); ++j) {
    const auto& s = st[j];
    if (s.slack) continue;
    const Cable& c = cables_[j];
    const double kappa = c.spec.stiffness, eta = c.spec.damping;
    const MatrixXd P = s.lhat * s.lhat.transpose();
    MatrixXd K = kappa * P + s.gamma * (I - P);
    if (eta != 0.0 && qdot.size()) {
      const VectorXd vrel = c.J * qdot;
      K += (eta / s.l) * s.lhat * (vrel - s.ldot * s.lhat).transpose();
    }
    dQ_dq -= c.JE.transpose() * K * c.JE;
    if (eta != 0.0) dQ_dqdot -= c.JE.transpose() * (eta * P) * c.JE;
  }
}

void ForceModel::tension_force_derivatives_symmetric(const VectorXd& q, const VectorXd& qdot, double t,
                                                      MatrixXd& dQ_dq, MatrixXd& dQ_dqdot) const {
  const int nf = topo_->n_free();
  const int m = topo_->dim();
  dQ_dq = MatrixXd::Zero(nf, nf);
  dQ_dqdot = MatrixXd::Zero(nf, nf);
  const auto st = cable_states(q, qdot, t);
  const MatrixXd I = MatrixXd::Identity(m, m);
  for (std::size_t j = 0; j < cables_.size(); ++j) {
    const auto& s = st[j];
    if (s.slack) continue;
    const Cable& c = cables_[j];
    const double kappa = c.spec.stiffness, eta = c.spec.damping;
    const double beta = eta * s.ldot / s.l + s.gamma;
    const MatrixXd P = s.lhat * s.lhat.transpose();
    dQ_dq -= c.JE.transpose() * (beta * I + (kappa - beta) * P) * c.JE;
    dQ_dqdot -= c.JE.transpose() * (eta * P) * c.JE;
  }
}

double ForceModel::gravity_potential(const VectorXd& q) const {
  const auto& T = *topo_;
  if (loads_.gravity.size() != T.dim()) return 0.0;
  double V = 0.0;
  for (std::size_t i = 0; i < T.members().size(); ++i) {
    const auto& mi = T.members()[i];
    const VectorXd rg = T.point(PointRef::on_member(static_cast<int>(i), mi.tpl.mass_center_coeffs()), q);
    V -= mi.tpl.mass() * loads_.gravity.dot(rg);
  }
  return V;
}

double ForceModel::cable_potential(const VectorXd& q, double t) const {
  double V = 0.0;
  for (std::size_t j = 0; j < cables_.size(); ++j) {
    const auto& sp = cables_[j].spec;
    const double l = (cables_[j].J * q).norm();
    const double ext = l - sp.rest_length_at(t);
    if (ext > 0.0 || !sp.can_slack) V += 0.5 * sp.stiffness * ext * ext;
  }
  return V;
}

double ForceModel::kinetic_energy(const VectorXd& qdot) const {
  return 0.5 * qdot.dot(topo_->mass() * qdot);
}

}  // namespace tsg

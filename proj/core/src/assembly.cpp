#include "tsg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "tsg/errors.hpp"

namespace tsg {

MotionSample PrescribedMotion::eval(double t) const {
  if (custom) return custom(t);
  MotionSample s{position, VectorXd::Zero(position.size()), VectorXd::Zero(position.size())};
  if (amplitude != 0.0) {
    const double w = 2.0 * std::numbers::pi * frequency;
    const double arg = w * t + phase;
    s.x += amplitude * std::sin(arg) * axis;
    s.v = amplitude * w * std::cos(arg) * axis;
    s.a = -amplitude * w * w * std::sin(arg) * axis;
  }
  return s;
}

SystemTopology assemble(int dim, int num_nodes, std::vector<MemberInstance> members,
                        std::vector<Joint> joints, std::vector<PrescribedNode> prescribed) {
  if (dim != 2 && dim != 3) throw ModelError("spatial dimension must be 2 or 3");
  SystemTopology s;
  s.dim_ = dim;
  s.num_nodes_ = num_nodes;
  const int n = dim * num_nodes;

  // node role: 0 unused, 1 point, 2 vector
  std::vector<int> role(static_cast<std::size_t>(num_nodes), 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& mi = members[i];
    const CoordType& ct = mi.tpl.type();
    if (ct.dim != dim)
      throw ModelError("member '" + mi.tpl.name() + "' is " + std::to_string(ct.dim) + "D in a " +
                       std::to_string(dim) + "D system");
    if (static_cast<int>(mi.nodes.size()) != ct.nslots())
      throw ModelError("member '" + mi.tpl.name() + "' needs " + std::to_string(ct.nslots()) + " nodes");
    std::vector<int> seen = mi.nodes;
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw ModelError("member '" + mi.tpl.name() + "' assigns one node to two slots");
    for (int k = 0; k < ct.nslots(); ++k) {
      const int nd = mi.nodes[static_cast<std::size_t>(k)];
      if (nd < 0 || nd >= num_nodes) throw ModelError("member '" + mi.tpl.name() + "' references a missing node");
      const int r = ct.slot_is_point(k) ? 1 : 2;
      auto& cur = role[static_cast<std::size_t>(nd)];
      if (cur != 0 && cur != r)
        throw ModelError("node " + std::to_string(nd) + " is shared as both a point and a vector");
      cur = r;
    }
  }

  s.node_pres_.assign(static_cast<std::size_t>(num_nodes), false);
  for (const auto& pn : prescribed) {
    if (pn.node < 0 || pn.node >= num_nodes) throw ModelError("prescribed node out of range");
    if (s.node_pres_[static_cast<std::size_t>(pn.node)])
      throw ModelError("node " + std::to_string(pn.node) + " prescribed twice");
    if (pn.motion.position.size() != dim && !pn.motion.custom)
      throw DimensionError("prescribed motion of node " + std::to_string(pn.node) + " has wrong dimension");
    s.node_pres_[static_cast<std::size_t>(pn.node)] = true;
  }
  s.prescribed_nodes_ = std::move(prescribed);

  s.free_slot_.assign(static_cast<std::size_t>(n), -1);
  s.pres_slot_.assign(static_cast<std::size_t>(n), -1);
  for (int nd = 0; nd < num_nodes; ++nd)
    for (int a = 0; a < dim; ++a) {
      const int c = nd * dim + a;
      if (s.node_pres_[static_cast<std::size_t>(nd)]) {
        s.pres_slot_[static_cast<std::size_t>(c)] = static_cast<int>(s.pres_.size());
        s.pres_.push_back(c);
      } else {
        s.free_slot_[static_cast<std::size_t>(c)] = static_cast<int>(s.free_.size());
        s.free_.push_back(c);
      }
    }

  s.members_ = std::move(members);
  s.member_idx_.clear();
  s.M_ = MatrixXd::Zero(n, n);
  for (const auto& mi : s.members_) {
    std::vector<int> idx;
    for (int nd : mi.nodes)
      for (int a = 0; a < dim; ++a) idx.push_back(nd * dim + a);
    const MatrixXd& Mi = mi.tpl.mass_matrix();
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        s.M_(idx[r], idx[c]) += Mi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    s.member_idx_.push_back(std::move(idx));
  }
  const int nf = s.n_free();
  const int np = s.n_prescribed();
  s.Mff_.resize(nf, nf);
  s.Mfp_.resize(nf, np);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) s.Mff_(i, j) = s.M_(s.free_[i], s.free_[j]);
    for (int j = 0; j < np; ++j) s.Mfp_(i, j) = s.M_(s.free_[i], s.pres_[j]);
  }

  s.joints_ = std::move(joints);
  for (const auto& jt : s.joints_) {
    const MatrixXd D = s.point_matrix(jt.a) - s.point_matrix(jt.b);
    s.joint_rows_.push_back(D);
  }

  // retained constraints: those involving at least one free coordinate
  for (std::size_t i = 0; i < s.members_.size(); ++i) {
    const auto& tpl = s.members_[i].tpl;
    const auto& idx = s.member_idx_[i];
    for (int k = 0; k < tpl.num_constraints(); ++k) {
      const MatrixXd& H = tpl.intrinsic_hessian(k);
      MatrixXd Hf = MatrixXd::Zero(nf, nf);
      bool touches = false;
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const int fr = s.free_slot_[static_cast<std::size_t>(idx[r])];
        if (fr < 0) continue;
        for (std::size_t c = 0; c < idx.size(); ++c) {
          const double v = H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
          if (v == 0.0) continue;
          touches = true;
          const int fc = s.free_slot_[static_cast<std::size_t>(idx[c])];
          if (fc >= 0) Hf(fr, fc) += v;
        }
      }
      ConstraintEntry e{ConstraintKind::Intrinsic, static_cast<int>(i), k};
      if (touches) {
        s.entries_.push_back(e);
        s.hess_.push_back(std::move(Hf));
      } else {
        s.dropped_.push_back(e);
      }
    }
  }
  for (std::size_t j = 0; j < s.joints_.size(); ++j) {
    const MatrixXd& D = s.joint_rows_[j];
    for (int a = 0; a < dim; ++a) {
      bool touches = false;
      for (int c : s.free_)
        if (D(a, c) != 0.0) touches = true;
      ConstraintEntry e{ConstraintKind::Extrinsic, static_cast<int>(j), a};
      if (touches) {
        s.entries_.push_back(e);
        s.hess_.push_back(MatrixXd::Zero(nf, nf));
      } else {
        s.dropped_.push_back(e);
      }
    }
  }
  return s;
}

WeightedPoint SystemTopology::resolve(const PointRef& p) const {
  WeightedPoint w;
  if (p.member < 0) {
    if (p.node < 0 || p.node >= num_nodes_) throw ModelError("point references a missing node");
    w.terms.emplace_back(p.node, 1.0);
    return w;
  }
  if (p.member >= static_cast<int>(members_.size())) throw ModelError("point references a missing member");
  const auto& mi = members_[static_cast<std::size_t>(p.member)];
  const VectorXd wt = mi.tpl.point_weights(p.local);
  for (Eigen::Index k = 0; k < wt.size(); ++k)
    if (wt(k) != 0.0) w.terms.emplace_back(mi.nodes[static_cast<std::size_t>(k)], wt(k));
  return w;
}

VectorXd SystemTopology::point(const PointRef& p, const VectorXd& q) const {
  VectorXd r = VectorXd::Zero(dim_);
  for (const auto& [nd, wt] : resolve(p).terms) r += wt * q.segment(nd * dim_, dim_);
  return r;
}

MatrixXd SystemTopology::point_matrix(const PointRef& p) const {
  MatrixXd C = MatrixXd::Zero(dim_, n());
  for (const auto& [nd, wt] : resolve(p).terms)
    for (int a = 0; a < dim_; ++a) C(a, nd * dim_ + a) += wt;
  return C;
}

VectorXd SystemTopology::member_coords(int member, const VectorXd& q) const {
  const auto& idx = member_idx_.at(static_cast<std::size_t>(member));
  VectorXd qi(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) qi(static_cast<Eigen::Index>(k)) = q(idx[k]);
  return qi;
}

void SystemTopology::scatter_member(int member, const VectorXd& qI, VectorXd& q) const {
  const auto& idx = member_idx_.at(static_cast<std::size_t>(member));
  if (qI.size() != static_cast<Eigen::Index>(idx.size())) throw DimensionError("member coordinate size mismatch");
  for (std::size_t k = 0; k < idx.size(); ++k) q(idx[k]) = qI(static_cast<Eigen::Index>(k));
}

VectorXd SystemTopology::gather_free(const VectorXd& q) const {
  VectorXd out(n_free());
  for (int i = 0; i < n_free(); ++i) out(i) = q(free_[static_cast<std::size_t>(i)]);
  return out;
}

VectorXd SystemTopology::gather_prescribed(const VectorXd& q) const {
  VectorXd out(n_prescribed());
  for (int i = 0; i < n_prescribed(); ++i) out(i) = q(pres_[static_cast<std::size_t>(i)]);
  return out;
}

void SystemTopology::scatter_free(const VectorXd& qf, VectorXd& q) const {
  for (int i = 0; i < n_free(); ++i) q(free_[static_cast<std::size_t>(i)]) = qf(i);
}

void SystemTopology::scatter_prescribed(const VectorXd& qp, VectorXd& q) const {
  for (int i = 0; i < n_prescribed(); ++i) q(pres_[static_cast<std::size_t>(i)]) = qp(i);
}

void SystemTopology::prescribed_state(double t, VectorXd& qp, VectorXd& vp, VectorXd& ap) const {
  qp.resize(n_prescribed());
  vp.resize(n_prescribed());
  ap.resize(n_prescribed());
  for (const auto& pn : prescribed_nodes_) {
    const MotionSample s = pn.motion.eval(t);
    for (int a = 0; a < dim_; ++a) {
      const int slot = pres_slot_[static_cast<std::size_t>(pn.node * dim_ + a)];
      qp(slot) = s.x(a);
      vp(slot) = s.v(a);
      ap(slot) = s.a(a);
    }
  }
}

void SystemTopology::apply_prescribed(double t, VectorXd& q) const {
  for (const auto& pn : prescribed_nodes_) q.segment(pn.node * dim_, dim_) = pn.motion.eval(t).x;
}

VectorXd SystemTopology::intrinsic_residual(const VectorXd& q) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const VectorXd r = members_[i].tpl.intrinsic_constraints(member_coords(static_cast<int>(i), q));
    out.insert(out.end(), r.data(), r.data() + r.size());
  }
  return Eigen::Map<VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

VectorXd SystemTopology::extrinsic_constraints(const VectorXd& q) const {
  VectorXd r(dim_ * static_cast<Eigen::Index>(joints_.size()));
  for (std::size_t j = 0; j < joints_.size(); ++j) r.segment(static_cast<Eigen::Index>(j) * dim_, dim_) = joint_rows_[j] * q;
  return r;
}

MatrixXd SystemTopology::extrinsic_jacobian() const {
  MatrixXd A(dim_ * static_cast<Eigen::Index>(joints_.size()), n());
  for (std::size_t j = 0; j < joints_.size(); ++j) A.middleRows(static_cast<Eigen::Index>(j) * dim_, dim_) = joint_rows_[j];
  return A;
}

VectorXd SystemTopology::constraint_residual(const VectorXd& q) const {
  VectorXd phi(n_constraints());
  // cache per-member residuals
  std::vector<VectorXd> memres(members_.size());
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const auto& c = entries_[e];
    if (c.kind == ConstraintKind::Intrinsic) {
      auto& r = memres[static_cast<std::size_t>(c.owner)];
      if (r.size() == 0) r = members_[static_cast<std::size_t>(c.owner)].tpl.intrinsic_constraints(member_coords(c.owner, q));
      phi(static_cast<Eigen::Index>(e)) = r(c.component);
    } else {
      phi(static_cast<Eigen::Index>(e)) = joint_rows_[static_cast<std::size_t>(c.owner)].row(c.component).dot(q);
    }
  }
  return phi;
}

MatrixXd SystemTopology::constraint_jacobian(const VectorXd& q) const {
  const int nf = n_free();
  MatrixXd A = MatrixXd::Zero(n_constraints(), nf);
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const auto& c = entries_[e];
    if (c.kind == ConstraintKind::Intrinsic) {
      const auto& mi = members_[static_cast<std::size_t>(c.owner)];
      const auto& idx = member_idx_[static_cast<std::size_t>(c.owner)];
      const VectorXd g = mi.tpl.intrinsic_hessian(c.component) * member_coords(c.owner, q);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const int f = free_slot_[static_cast<std::size_t>(idx[k])];
        if (f >= 0) A(static_cast<Eigen::Index>(e), f) += g(static_cast<Eigen::Index>(k));
      }
    } else {
      const auto& D = joint_rows_[static_cast<std::size_t>(c.owner)];
      for (int f = 0; f < nf; ++f) A(static_cast<Eigen::Index>(e), f) = D(c.component, free_[static_cast<std::size_t>(f)]);
    }
  }
  return A;
}

MatrixXd SystemTopology::weighted_hessian(const VectorXd& lambda) const {
  MatrixXd H = MatrixXd::Zero(n_free(), n_free());
  for (std::size_t k = 0; k < hess_.size(); ++k)
    if (lambda(static_cast<Eigen::Index>(k)) != 0.0) H += lambda(static_cast<Eigen::Index>(k)) * hess_[k];
  return H;
}

MatrixXd nullspace(const MatrixXd& A, double rel_tol) {
  const Eigen::Index nc = A.cols();
  if (A.rows() == 0) return MatrixXd::Identity(nc, nc);
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double cut = s.size() ? rel_tol * s(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  return svd.matrixV().rightCols(nc - rank);
}

int numerical_rank(const MatrixXd& A, double rel_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const VectorXd& s = svd.singularValues();
  int rank = 0;
  while (rank < s.size() && s(rank) > rel_tol * s(0)) ++rank;
  return rank;
}

int degrees_of_freedom(const SystemTopology& topo, const VectorXd& q) {
  return topo.n_free() - numerical_rank(topo.constraint_jacobian(q));
}

}  // namespace tsg

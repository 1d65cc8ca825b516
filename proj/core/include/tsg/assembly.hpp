#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tsg/members.hpp"

namespace tsg {

struct MotionSample {
  VectorXd x, v, a;
};

// Motion of a prescribed node: x(t) = position + amplitude·sin(2πνt + phase)·axis,
// or an arbitrary callable when `custom` is set.
struct PrescribedMotion {
  VectorXd position;
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  VectorXd axis;
  std::function<MotionSample(double)> custom;

  MotionSample eval(double t) const;
  bool is_static() const { return !custom && amplitude == 0.0; }
};

struct PrescribedNode {
  int node = -1;
  PrescribedMotion motion;
};

struct MemberInstance {
  MemberTemplate tpl;
  std::vector<int> nodes;  // global node id per native slot
};

// A point fixed on a member (affine coefficients) or a bare node (ground anchor).
struct PointRef {
  int member = -1;
  int node = -1;
  LocalPoint local;

  static PointRef on_member(int member, VectorXd coeffs) {
    return PointRef{member, -1, LocalPoint{std::move(coeffs)}};
  }
  static PointRef at_node(int node) { return PointRef{-1, node, {}}; }
};

struct Joint {
  PointRef a, b;
};

// r = Σ weight · x_node
struct WeightedPoint {
  std::vector<std::pair<int, double>> terms;
};

enum class ConstraintKind { Intrinsic, Extrinsic };

struct ConstraintEntry {
  ConstraintKind kind;
  int owner;      // member index or joint index
  int component;  // constraint number inside a member, or spatial axis of a joint
};

class SystemTopology {
 public:
  int dim() const { return dim_; }
  int num_nodes() const { return num_nodes_; }
  int n() const { return dim_ * num_nodes_; }
  int n_free() const { return static_cast<int>(free_.size()); }
  int n_prescribed() const { return static_cast<int>(pres_.size()); }
  int n_constraints() const { return static_cast<int>(entries_.size()); }

  const std::vector<MemberInstance>& members() const { return members_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<PrescribedNode>& prescribed() const { return prescribed_nodes_; }
  const std::vector<int>& free_indices() const { return free_; }
  const std::vector<int>& prescribed_indices() const { return pres_; }
  const std::vector<int>& member_indices(int member) const { return member_idx_.at(static_cast<std::size_t>(member)); }
  const std::vector<ConstraintEntry>& constraints() const { return entries_; }
  const std::vector<ConstraintEntry>& dropped_constraints() const { return dropped_; }
  bool node_is_prescribed(int node) const { return node_pres_.at(static_cast<std::size_t>(node)); }
  // position of a global coordinate in the free vector, -1 when prescribed
  int free_slot(int coord) const { return free_slot_.at(static_cast<std::size_t>(coord)); }

  const MatrixXd& mass() const { return M_; }
  const MatrixXd& mass_free() const { return Mff_; }       // M̌
  const MatrixXd& mass_coupling() const { return Mfp_; }   // M̄ = Ěᵀ M Ẽ

  WeightedPoint resolve(const PointRef& p) const;
  VectorXd point(const PointRef& p, const VectorXd& q) const;
  MatrixXd point_matrix(const PointRef& p) const;  // m x n

  // gather/scatter between full q and member native coordinates
  VectorXd member_coords(int member, const VectorXd& q) const;
  void scatter_member(int member, const VectorXd& qI, VectorXd& q) const;

  VectorXd gather_free(const VectorXd& q) const;
  VectorXd gather_prescribed(const VectorXd& q) const;
  void scatter_free(const VectorXd& qf, VectorXd& q) const;
  void scatter_prescribed(const VectorXd& qp, VectorXd& q) const;

  // prescribed coordinate values/velocities/accelerations at time t
  void prescribed_state(double t, VectorXd& qp, VectorXd& vp, VectorXd& ap) const;
  void apply_prescribed(double t, VectorXd& q) const;

  VectorXd intrinsic_residual(const VectorXd& q) const;  // all members, retained or not
  VectorXd extrinsic_constraints(const VectorXd& q) const;
  MatrixXd extrinsic_jacobian() const;                   // full columns, constant

  VectorXd constraint_residual(const VectorXd& q) const;   // Φ̌
  MatrixXd constraint_jacobian(const VectorXd& q) const;   // Ǎ, free columns
  // constant Hessians of Φ̌ over free coordinates (zero for extrinsic rows)
  const std::vector<MatrixXd>& constraint_hessians() const { return hess_; }
  // Σ_k λ_k H_k
  MatrixXd weighted_hessian(const VectorXd& lambda) const;

  friend SystemTopology assemble(int dim, int num_nodes, std::vector<MemberInstance> members,
                                 std::vector<Joint> joints, std::vector<PrescribedNode> prescribed);

 private:
  int dim_ = 3;
  int num_nodes_ = 0;
  std::vector<MemberInstance> members_;
  std::vector<Joint> joints_;
  std::vector<PrescribedNode> prescribed_nodes_;
  std::vector<bool> node_pres_;
  std::vector<int> free_, pres_, free_slot_, pres_slot_;
  std::vector<std::vector<int>> member_idx_;
  std::vector<ConstraintEntry> entries_, dropped_;
  std::vector<MatrixXd> hess_;
  std::vector<MatrixXd> joint_rows_;  // per joint, m x n
  MatrixXd M_, Mff_, Mfp_;
};

SystemTopology assemble(int dim, int num_nodes, std::vector<MemberInstance> members,
                        std::vector<Joint> joints, std::vector<PrescribedNode> prescribed);

// Orthonormal basis of ker(A) from an SVD with rank cutoff rel_tol × σ_max.
MatrixXd nullspace(const MatrixXd& A, double rel_tol = 1e-10);
int numerical_rank(const MatrixXd& A, double rel_tol = 1e-10);

// DoF = ň − rank(Ǎ) at q
int degrees_of_freedom(const SystemTopology& topo, const VectorXd& q);

}  // namespace tsg

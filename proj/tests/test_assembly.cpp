#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tsg/assembly.hpp"
#include "tsg/errors.hpp"
#include "tsg/scenario.hpp"

using namespace tsg;

namespace {

PrescribedNode fixed_node(int node, const VectorXd& x) {
  PrescribedNode p;
  p.node = node;
  p.motion.position = x;
  return p;
}

// planar chain O-A-B of two bars, O fixed
SystemTopology two_bar_chain() {
  const auto bar = MemberTemplate::uniform_bar(CoordTag::RR, 2, 1.0, 1.0, 1.0 / 12.0);
  std::vector<MemberInstance> m{{bar, {0, 1}}, {bar, {1, 2}}};
  return assemble(2, 3, m, {}, {fixed_node(0, Eigen::Vector2d::Zero())});
}

}  // namespace

TEST(Assembly, SharedNodesSumMassContributions) {
  const auto topo = two_bar_chain();
  EXPECT_EQ(topo.n(), 6);
  EXPECT_EQ(topo.n_free(), 4);
  EXPECT_EQ(topo.n_prescribed(), 2);
  EXPECT_NEAR(topo.mass()(2, 2), 2.0 / 3.0, 1e-14);  // node A belongs to both bars
  EXPECT_NEAR(topo.mass()(0, 0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(topo.mass()(0, 2), 1.0 / 6.0, 1e-14);
  EXPECT_EQ(topo.mass_free().rows(), 4);
  EXPECT_EQ(topo.mass_coupling().cols(), 2);
  EXPECT_NEAR(topo.mass_coupling()(0, 0), 1.0 / 6.0, 1e-14);
  VectorXd q(6);
  q << 0, 0, 1, 0, 2, 0;
  EXPECT_EQ(topo.n_constraints(), 2);
  EXPECT_EQ(degrees_of_freedom(topo, q), 2);
  EXPECT_LT(topo.constraint_residual(q).norm(), 1e-15);
}

TEST(Assembly, JacobianMatchesFiniteDifferences) {
  const auto topo = two_bar_chain();
  VectorXd q(6);
  q << 0, 0, 0.6, 0.8, 1.1, 0.3;
  const MatrixXd A = topo.constraint_jacobian(q);
  const double eps = 1e-7;
  for (int f = 0; f < topo.n_free(); ++f) {
    VectorXd qp = q, qm = q;
    qp(topo.free_indices()[f]) += eps;
    qm(topo.free_indices()[f]) -= eps;
    const VectorXd fd = (topo.constraint_residual(qp) - topo.constraint_residual(qm)) / (2 * eps);
    EXPECT_LT((fd - A.col(f)).cwiseAbs().maxCoeff(), 1e-8);
  }
  // quadratic constraints: Φ(q + d) = Φ(q) + A d + ½ dᵀ H d exactly
  VectorXd d = VectorXd::Constant(topo.n_free(), 0.3);
  VectorXd qd = q;
  for (int f = 0; f < topo.n_free(); ++f) qd(topo.free_indices()[f]) += d(f);
  const VectorXd lhs = topo.constraint_residual(qd);
  for (int k = 0; k < topo.n_constraints(); ++k) {
    const double rhs = topo.constraint_residual(q)(k) + A.row(k).dot(d) + 0.5 * d.dot(topo.constraint_hessians()[k] * d);
    EXPECT_NEAR(lhs(k), rhs, 1e-14);
  }
}

TEST(Assembly, FullyPrescribedMembersDropTheirConstraints) {
  const auto bar = MemberTemplate::uniform_bar(CoordTag::RR, 2, 1.0, 1.0, 1.0 / 12.0);
  std::vector<MemberInstance> m{{bar, {0, 1}}, {bar, {1, 2}}};
  const auto topo = assemble(2, 3, m, {},
                             {fixed_node(0, Eigen::Vector2d::Zero()), fixed_node(1, Eigen::Vector2d(1, 0))});
  EXPECT_EQ(topo.n_constraints(), 1);
  EXPECT_EQ(topo.dropped_constraints().size(), 1u);
}

TEST(Assembly, PointOnMemberAndJoints) {
  // bar O-A with a second bar hinged at the midpoint of the first
  const auto bar = MemberTemplate::uniform_bar(CoordTag::RR, 2, 1.0, 1.0, 1.0 / 12.0);
  std::vector<MemberInstance> m{{bar, {0, 1}}, {bar, {2, 3}}};
  Joint j{PointRef::on_member(0, VectorXd::Constant(1, 0.5)), PointRef::at_node(2)};
  const auto topo = assemble(2, 4, m, {j}, {fixed_node(0, Eigen::Vector2d::Zero())});
  VectorXd q(8);
  q << 0, 0, 1, 0, 0.5, 0, 0.5, 1;
  EXPECT_LT(topo.constraint_residual(q).norm(), 1e-15);
  EXPECT_EQ(degrees_of_freedom(topo, q), 2);
  const VectorXd mid = topo.point(PointRef::on_member(0, VectorXd::Constant(1, 0.5)), q);
  EXPECT_NEAR(mid(0), 0.5, 1e-15);
  EXPECT_EQ(topo.point_matrix(j.a).cols(), 8);
}

TEST(Assembly, GatherScatterRoundTrip) {
  const auto topo = two_bar_chain();
  VectorXd q(6);
  q << 1, 2, 3, 4, 5, 6;
  VectorXd r = VectorXd::Zero(6);
  topo.scatter_free(topo.gather_free(q), r);
  topo.scatter_prescribed(topo.gather_prescribed(q), r);
  EXPECT_EQ(r, q);
}

TEST(Assembly, SinusoidalMotion) {
  PrescribedMotion m;
  m.position = Eigen::Vector2d(1, 2);
  m.amplitude = 0.01;
  m.frequency = 3.0;
  m.axis = Eigen::Vector2d(1, 0);
  const double t = 0.07, w = 2 * std::numbers::pi * 3.0;
  const auto s = m.eval(t);
  EXPECT_NEAR(s.x(0), 1 + 0.01 * std::sin(w * t), 1e-15);
  EXPECT_NEAR(s.v(0), 0.01 * w * std::cos(w * t), 1e-13);
  EXPECT_NEAR(s.a(0), -0.01 * w * w * std::sin(w * t), 1e-11);
  EXPECT_DOUBLE_EQ(s.x(1), 2.0);
}

TEST(Assembly, InvalidTopologiesAreRejected) {
  const auto bar = MemberTemplate::uniform_bar(CoordTag::RR, 2, 1.0, 1.0, 1.0 / 12.0);
  const auto ru = MemberTemplate::uniform_bar(CoordTag::RU, 2, 1.0, 1.0, 1.0 / 12.0);
  EXPECT_THROW(assemble(2, 2, {{bar, {0, 0}}}, {}, {}), ModelError);
  EXPECT_THROW(assemble(2, 2, {{bar, {0, 5}}}, {}, {}), ModelError);
  EXPECT_THROW(assemble(2, 3, {{bar, {0, 1}}, {ru, {2, 1}}}, {}, {}), ModelError);  // node 1 as point and vector
  EXPECT_THROW(assemble(3, 2, {{bar, {0, 1}}}, {}, {}), ModelError);
  EXPECT_THROW(assemble(2, 2, {{bar, {0, 1}}}, {}, {fixed_node(0, Eigen::Vector3d::Zero())}), DimensionError);
}

TEST(Assembly, BuiltinDegreesOfFreedom) {
  const auto m1 = build_model(builtin("example1"));
  EXPECT_EQ(degrees_of_freedom(*m1.topology, m1.q0), 2);
  const auto m2 = build_model(builtin("example2"));
  EXPECT_EQ(degrees_of_freedom(*m2.topology, m2.q0), 5);
  for (const auto* m : {&m1, &m2}) EXPECT_LT(m->topology->constraint_residual(m->q0).cwiseAbs().maxCoeff(), 1e-12);
}

#include <cmath>
#include <numbers>

#include "tsg/errors.hpp"
#include "tsg/scenario.hpp"

namespace tsg {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

constexpr double kPi = std::numbers::pi;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

NodeSpec node(const std::string& name, const VectorXd& x) { return NodeSpec{name, x, {}}; }

PointSpec at_node(const std::string& n) { return PointSpec{n, "", {}, {}}; }
PointSpec on_member(const std::string& m, const VectorXd& local) { return PointSpec{"", m, {}, local}; }
PointSpec on_member_coeffs(const std::string& m, const VectorXd& c) { return PointSpec{"", m, c, {}}; }

MemberSpec bar(const std::string& name, double mass, double length, double axial, std::vector<std::string> nodes) {
  MemberSpec m;
  m.name = name;
  m.tag = CoordTag::RR;
  m.mass = mass;
  m.nodes = std::move(nodes);
  m.uniform_bar = true;
  m.length = length;
  m.inertia = VectorXd::Constant(1, axial);
  return m;
}

MemberSpec body(const std::string& name, CoordTag tag, double mass, const VectorXd& ri, const MatrixXd& X,
                const VectorXd& inertia, std::vector<std::string> nodes) {
  MemberSpec m;
  m.name = name;
  m.tag = tag;
  m.mass = mass;
  m.nodes = std::move(nodes);
  m.basic_point = ri;
  m.base = X;
  m.inertia = inertia;
  return m;
}

CableScenarioSpec cable(const std::string& name, const PointSpec& a, const PointSpec& b, double kappa, double eta) {
  CableScenarioSpec c;
  c.name = name;
  c.from = a;
  c.to = b;
  c.stiffness = kappa;
  c.damping = eta;
  return c;
}

// Double pendulum: bar pinned at the origin, right isosceles triangle hinged at the bar tip.
Scenario example1(const BuiltinOptions& opt) {
  const double mb = 0.026934977798, Lb = 0.07071067811865477, Ib = 1.1222907415833337e-5;
  const double mt = 0.1271425597, hyp = 0.1, hgt = 0.05;
  Scenario s;
  s.name = "example1";
  s.dim = 2;
  s.gravity = vec({0.0, -opt.gravity});
  // local frame: centroid at the origin, symmetry axis along x̄, right angle at r̄_i
  const double cx = 2.0 * hgt / 3.0;
  const VectorXd ri = vec({-cx, 0.0});
  MatrixXd X(2, 2);
  X << hgt, hgt, 0.5 * hyp, -0.5 * hyp;
  const double sxx = cx * cx + 2.0 * (hgt - cx) * (hgt - cx);
  const double syy = 2.0 * 0.25 * hyp * hyp;
  const VectorXd J = vec({mt / 12.0 * sxx, mt / 12.0 * syy});

  s.nodes = {node("O", vec({0.0, 0.0})), node("A", vec({Lb, 0.0})), node("u", X.col(0)), node("v", X.col(1))};
  s.members = {bar("bar", mb, Lb, Ib, {"O", "A"}), body("triangle", CoordTag::RUV, mt, ri, X, J, {"A", "u", "v"})};
  s.prescribed = {MotionSpec{"O", 0.0, 0.0, 0.0, vec({1.0, 0.0})}};
  s.solver.h = 1e-3;
  s.duration = 4.0;
  s.outputs = {"simulate"};
  return s;
}

// Planar tower: two ground bars carry triangle 3; bars 4 and 6 stack triangles 5 and 7 on a spine.
Scenario example2(const BuiltinOptions& opt) {
  const double mb = 0.026934977798, Lb = 0.1, Ib = 2.244581483166667e-5;
  const double mt = 0.1271425597, hgt = 0.05, half = 0.05;
  const double xg = 0.06, anchor = 0.1528687219861873;
  const std::string& setup = opt.setup;
  if (setup != "UN" && setup != "DN" && setup != "US" && setup != "US-AUX")
    throw ParseError("example2 setup must be UN, DN, US or US-AUX");

  const double y3 = std::sqrt(Lb * Lb - (half - xg) * (half - xg));
  const Vector2d L3(-half, y3), R3(half, y3), A3(0.0, y3 + hgt);
  const Vector2d A5(0.0, A3.y() + Lb), L5(-half, A5.y() - hgt), R5(half, A5.y() - hgt);
  const Vector2d A7(0.0, A5.y() + Lb), L7(-half, A7.y() - hgt), R7(half, A7.y() - hgt);

  // apex-up triangle with base `half`·2 and height hgt; local frame at the centroid
  const Vector2d lL(-half, -hgt / 3.0), lR(half, -hgt / 3.0), lA(0.0, 2.0 * hgt / 3.0);
  const VectorXd J = vec({mt / 12.0 * (lL.x() * lL.x() + lR.x() * lR.x()),
                          mt / 12.0 * (lL.y() * lL.y() + lR.y() * lR.y() + lA.y() * lA.y())});
  auto cols = [](const Vector2d& a, const Vector2d& b) {
    MatrixXd X(2, 2);
    X.col(0) = a;
    X.col(1) = b;
    return X;
  };

  Scenario s;
  s.name = "example2";
  s.dim = 2;
  s.gravity = vec({0.0, -opt.gravity});
  s.nodes = {node("g1", vec({-xg, 0.0})),  node("b1", L3),         node("g2", vec({xg, 0.0})),
             node("b2", R3),               node("u3", R3 - L3),    node("v3", A3 - L3),
             node("b4", A3),               node("a5", A5),         node("l5", L5),
             node("v5", R5 - L5),          node("a7", A7),         node("l7", L7),
             node("r7", R7),               node("a1", vec({-anchor, 0.0})), node("a2", vec({anchor, 0.0}))};
  s.members = {
      bar("bar1", mb, Lb, Ib, {"g1", "b1"}),
      bar("bar2", mb, Lb, Ib, {"g2", "b2"}),
      body("tri3", CoordTag::RUV, mt, lL, cols(lR - lL, lA - lL), J, {"b1", "u3", "v3"}),
      bar("bar4", mb, Lb, Ib, {"b4", "a5"}),
      body("tri5", CoordTag::RRV, mt, lA, cols(lL - lA, lR - lL), J, {"a5", "l5", "v5"}),
      bar("bar6", mb, Lb, Ib, {"a5", "a7"}),
      body("tri7", CoordTag::RRR, mt, lA, cols(lL - lA, lR - lA), J, {"a7", "l7", "r7"}),
  };
  s.joints = {JointSpec{"bar2-tri3", on_member_coeffs("bar2", vec({1.0})), on_member_coeffs("tri3", vec({1.0, 0.0}))},
              JointSpec{"bar4-tri3", on_member_coeffs("bar4", vec({0.0})), on_member_coeffs("tri3", vec({0.0, 1.0}))}};

  const double amp = 0.01, freq = 3.0;
  const VectorXd ex = vec({1.0, 0.0});
  const bool anchors_move = setup != "US-AUX";
  s.prescribed = {MotionSpec{"g1", amp, freq, 0.0, ex}, MotionSpec{"g2", amp, freq, 0.0, ex},
                  MotionSpec{"a1", anchors_move ? amp : 0.0, anchors_move ? freq : 0.0, 0.0, ex},
                  MotionSpec{"a2", anchors_move ? amp : 0.0, anchors_move ? freq : 0.0, 0.0, ex}};

  const PointSpec p3L = on_member_coeffs("tri3", vec({0.0, 0.0})), p3R = on_member_coeffs("tri3", vec({1.0, 0.0}));
  const PointSpec p5L = on_member("tri5", lL), p5R = on_member("tri5", lR);
  const PointSpec p7L = on_member("tri7", lL), p7R = on_member("tri7", lR);
  const std::vector<std::pair<PointSpec, PointSpec>> ends = {
      {at_node("a1"), p5L}, {at_node("a2"), p5R}, {p3L, p5L}, {p3R, p5R}, {p3L, p5R}, {p3R, p5L},
      {p5L, p7L},           {p5R, p7R},           {p5L, p7R}, {p5R, p7L}, {at_node("g1"), p3R}, {at_node("g2"), p3L}};
  const double eta = setup == "DN" ? 0.1 : 0.0;
  const bool slack = setup == "US" || setup == "US-AUX";
  for (std::size_t j = 0; j < ends.size(); ++j) {
    auto c = cable("c" + std::to_string(j + 1), ends[j].first, ends[j].second, 100.0, eta);
    c.group = j < 2 ? "auxiliary" : "essential";
    c.mode = RestLengthMode::Factor;
    c.factor = j < 2 ? opt.beta : opt.alpha;
    c.can_slack = slack;
    s.cables.push_back(std::move(c));
  }
  s.solver.h = 1e-3;
  s.duration = 2.0;
  s.modal_gravity = false;
  s.outputs = {"simulate", "modal", "sweep"};
  SweepSpec sw;
  sw.parameter = SweepParameter::AlphaBeta;
  sw.values.push_back(0.999);
  for (int k = 99; k >= 85; --k) sw.values.push_back(k / 100.0);
  sw.values.push_back(0.845);
  s.sweep = sw;
  return s;
}

Matrix3d rot_z(double a) {
  Matrix3d R;
  R << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return R;
}

// Three-strut prism on the ground topped by a chain of four tetrahedra.
Scenario example3_static(const BuiltinOptions& opt, double h, double r2, const std::string& name) {
  const double R1 = 0.1, H = 0.07071067811865477, d = 0.03535533905932738, L = 0.22;
  const double mb = 0.08, Ib = 0.00032266666666666663;
  const double mt = 0.2999233976, zg = 0.01482294206269047;
  const VectorXd Ip = vec({7.6639282053e-4, 7.6638139752e-4, 1.2464720496e-3});
  const double kprism = 1000.0, kother = 500.0, eta = 2.0;

  const double chord = std::sqrt(L * L - h * h);
  const double phi = std::acos((R1 * R1 + r2 * r2 - chord * chord) / (2.0 * R1 * r2));
  auto ang = [](int k) { return 2.0 * kPi * k / 3.0; };
  auto ring = [&](double r, double a, double z) { return Vector3d(r * std::cos(a), r * std::sin(a), z); };

  std::vector<Vector3d> ground, middle, top, base8, base9, base10;
  for (int k = 0; k < 3; ++k) {
    ground.push_back(ring(R1, ang(k), 0.0));
    middle.push_back(ring(r2, ang(k) + phi, h));
    top.push_back(ring(R1, ang(k) + 2.0 * phi, 2.0 * h));
  }
  const double z7 = 2.0 * h, rot = 2.0 * phi;
  const Vector3d apex7(0.0, 0.0, z7 + H), apex89(0.0, 0.0, z7 + d + H), apex10(0.0, 0.0, z7 + 2.0 * d + H);
  for (int k = 0; k < 3; ++k) {
    base8.push_back(ring(R1, ang(k) + rot, z7 + d));
    base9.push_back(ring(R1, ang(k) + rot, z7 + d + 2.0 * H));
    base10.push_back(ring(R1, ang(k) + rot, z7 + 2.0 * d + 2.0 * H));
  }

  // local frames: principal axes with z̄ along the tetrahedron axis, origin at the mass centre
  const Matrix3d Rup = rot_z(rot);
  Matrix3d flip = Matrix3d::Identity();
  flip(1, 1) = -1.0;
  flip(2, 2) = -1.0;
  const Matrix3d Rdown = Rup * flip;
  auto centre = [&](const std::vector<Vector3d>& b, bool up) {
    const Vector3d c = (b[0] + b[1] + b[2]) / 3.0;
    return Vector3d(c + Vector3d(0.0, 0.0, up ? zg : -zg));
  };
  struct Frame {
    Vector3d c;
    Matrix3d R;
    VectorXd local(const Vector3d& x) const { return R.transpose() * (x - c); }
    VectorXd dir(const Vector3d& x) const { return R.transpose() * x; }
  };
  const Frame f7{centre(top, true), Rup}, f8{centre(base8, true), Rup}, f9{centre(base9, false), Rdown},
      f10{centre(base10, false), Rdown};

  auto columns = [](std::initializer_list<VectorXd> c) {
    MatrixXd X(3, static_cast<Eigen::Index>(c.size()));
    Eigen::Index i = 0;
    for (const auto& v : c) X.col(i++) = v;
    return X;
  };

  Scenario s;
  s.name = name;
  s.dim = 3;
  s.gravity = vec({0.0, 0.0, -opt.gravity});
  for (int k = 0; k < 3; ++k) s.nodes.push_back(node("g" + std::to_string(k), ground[k]));
  for (int k = 0; k < 3; ++k) s.nodes.push_back(node("m" + std::to_string(k), middle[k]));
  for (int k = 0; k < 3; ++k) s.nodes.push_back(node("t" + std::to_string(k), top[k]));
  s.nodes.push_back(node("apex7", apex7));
  s.nodes.push_back(node("apex8", apex89));
  s.nodes.push_back(node("b8_0", base8[0]));
  s.nodes.push_back(node("b8_1", base8[1]));
  s.nodes.push_back(node("w8", base8[2] - apex89));
  s.nodes.push_back(node("b9_0", base9[0]));
  s.nodes.push_back(node("v9", base9[1] - apex89));
  s.nodes.push_back(node("w9", base9[2] - apex89));
  s.nodes.push_back(node("apex10", apex10));
  s.nodes.push_back(node("u10", base10[0] - apex10));
  s.nodes.push_back(node("v10", base10[1] - apex10));
  s.nodes.push_back(node("w10", base10[2] - apex10));

  for (int k = 0; k < 3; ++k)
    s.members.push_back(
        bar("bar" + std::to_string(k + 1), mb, L, Ib, {"g" + std::to_string(k), "m" + std::to_string(k)}));
  for (int k = 0; k < 3; ++k)
    s.members.push_back(
        bar("bar" + std::to_string(k + 4), mb, L, Ib, {"m" + std::to_string(k), "t" + std::to_string(k)}));
  s.members.push_back(body("tet7", CoordTag::RRRR, mt, f7.local(top[0]),
                           columns({f7.dir(top[1] - top[0]), f7.dir(top[2] - top[0]), f7.dir(apex7 - top[0])}), Ip,
                           {"t0", "t1", "t2", "apex7"}));
  s.members.push_back(body("tet8", CoordTag::RRRW, mt, f8.local(apex89),
                           columns({f8.dir(base8[0] - apex89), f8.dir(base8[1] - apex89), f8.dir(base8[2] - apex89)}),
                           Ip, {"apex8", "b8_0", "b8_1", "w8"}));
  s.members.push_back(body("tet9", CoordTag::RRVW, mt, f9.local(apex89),
                           columns({f9.dir(base9[0] - apex89), f9.dir(base9[1] - apex89), f9.dir(base9[2] - apex89)}),
                           Ip, {"apex8", "b9_0", "v9", "w9"}));
  s.members.push_back(
      body("tet10", CoordTag::RUVW, mt, f10.local(apex10),
           columns({f10.dir(base10[0] - apex10), f10.dir(base10[1] - apex10), f10.dir(base10[2] - apex10)}), Ip,
           {"apex10", "u10", "v10", "w10"}));

  for (int k = 0; k < 3; ++k) s.prescribed.push_back(MotionSpec{"g" + std::to_string(k), 0.0, 0.0, 0.0, vec({1, 0, 0})});

  auto nd = [](const std::string& p, int k) { return at_node(p + std::to_string(k)); };
  auto b8 = [&](int k) { return on_member("tet8", f8.local(base8[k])); };
  auto b9 = [&](int k) { return on_member("tet9", f9.local(base9[k])); };
  auto b10 = [&](int k) { return on_member("tet10", f10.local(base10[k])); };
  std::vector<CableScenarioSpec> cs;
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", nd("g", k), nd("m", (k + 2) % 3), kprism, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", nd("m", k), nd("m", (k + 1) % 3), kprism, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", nd("m", k), nd("t", (k + 2) % 3), kprism, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", at_node("apex7"), b8(k), kother, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", nd("t", k), b8(k), kother, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", b8(k), b9(k), kother, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", b9(k), b10(k), kother, eta));
  for (int k = 0; k < 3; ++k) cs.push_back(cable("", b9(k), at_node("apex10"), kother, eta));
  for (std::size_t j = 0; j < cs.size(); ++j) {
    cs[j].name = "c" + std::to_string(j + 1);
    if (j >= 12 && j < 21) {
      cs[j].mode = RestLengthMode::Explicit;
      cs[j].rest_length = (j >= 15 && j < 18) ? 0.1 : 0.03;
      cs[j].group = "fixed";
    } else {
      cs[j].mode = RestLengthMode::Statics;
      cs[j].group = j < 9 ? "prism" : "chain";
    }
  }
  s.cables = std::move(cs);
  s.solver.h = 1e-3;
  s.duration = 20.0;
  s.record_stride = 10;
  s.outputs = {"modal", "inverse-statics"};
  return s;
}

Scenario example3(const BuiltinOptions& opt) {
  const double H = 0.07071067811865477;
  if (opt.stage == "initial") return example3_static(opt, H, 0.11, "example3-initial");
  if (opt.stage == "target") return example3_static(opt, 2.0 * H, 0.07, "example3-target");
  if (opt.stage != "deploy") throw ParseError("example3 stage must be initial, target or deploy");
  if (!(opt.deploy_time > 0.0)) throw PreconditionError("deployment time must be positive");

  Scenario s = example3_static(opt, H, 0.11, "example3-deploy");
  const Scenario target = example3_static(opt, 2.0 * H, 0.07, "example3-target");
  const Model m0 = build_model(s);
  const Model m1 = build_model(target);
  const VectorXd mu0 = m0.forces->rest_lengths(0.0);
  const VectorXd mu1 = m1.forces->rest_lengths(0.0);
  for (std::size_t j = 0; j < s.cables.size(); ++j) {
    auto& c = s.cables[j];
    const auto jj = static_cast<Eigen::Index>(j);
    if (c.mode == RestLengthMode::Statics) {
      c.mode = RestLengthMode::Explicit;
      c.rest_length = mu0(jj);
      c.final_rest_length = mu1(jj);
      c.actuation_duration = opt.deploy_time;
    }
  }
  for (auto& p : s.prescribed) {
    p.amplitude = 0.01;
    p.frequency = opt.nu;
  }
  s.outputs = {"simulate"};
  return s;
}

}  // namespace

bool is_builtin(const std::string& name) { return name == "example1" || name == "example2" || name == "example3"; }

Scenario builtin(const std::string& name, const BuiltinOptions& opt) {
  if (name == "example1") return example1(opt);
  if (name == "example2") return example2(opt);
  if (name == "example3") return example3(opt);
  throw ParseError("unknown built-in scenario '" + name + "'");
}

}  // namespace tsg

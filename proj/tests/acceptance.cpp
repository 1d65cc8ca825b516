// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "tsg/integrator.hpp"
#include "tsg/modal.hpp"
#include "tsg/scenario.hpp"
#include "tsg/statics.hpp"

using namespace tsg;

namespace {

// Tolerances and limits.
constexpr double kPendulumAngleTol = 1e-2;      // rad, over [0, 1] s
constexpr double kPendulumRuntime = 10.0;       // s
constexpr double kEnergyRelTol = 1e-2;
constexpr double kEnergyRuntime = 300.0;        // s
constexpr int kEnergyWindows = 10;              // each 50 s window needs a sign change of E − E(0)
constexpr double kConstraintTol = 1e-10;
constexpr double kConstantForceTol = 1e-12;
constexpr int kDerivativeSamples = 100;
constexpr double kDerivativeTol = 1e-6;
constexpr double kDerivativeRuntime = 10.0;
constexpr double kMassTol = 1e-12;
constexpr double kKineticTol = 1e-10;
constexpr double kRestLengthTol = 1e-3;
constexpr double kFrequencyTol = 0.02;
constexpr double kModalRuntime = 30.0;
constexpr double kFftTol = 0.01;
constexpr double kLowestFractionAt0845 = 0.05;
constexpr double kCollapseFraction = 0.5;       // centroid height below this fraction of its start
constexpr double kCollapseEarliest = 1.0, kCollapseLatest = 1.5;  // s
constexpr double kGrowthRatio = 4.0;            // envelope max / first window

const double kRefMuInitial[] = {0.10387124587250787, 0.1676922936080985, 0.10451948052501331,
                                 0.07234650881726418, 0.08411550293908823};
const double kRefMuTarget[] = {0.15447435414920974, 0.11094908180899779, 0.15500454082146656,
                                0.07234650881726389, 0.08411550293908815};
const int kRefMuCables[] = {0, 3, 6, 9, 21};
constexpr double kFreqInitial = 0.7184, kFreqTarget = 0.3270;

double g_max_constraint = 0.0;
std::vector<std::string> g_runs;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimulationResult run(const std::string& label, const ForceModel& model, const VectorXd& q0, const VectorXd& v0,
                     double duration, const SolverSettings& ss, SimulationOptions so = {}) {
  so.record_cables = so.record_cables && model.num_cables() > 0;
  SimulationResult r = simulate(model, q0, v0, duration, ss, so);
  g_max_constraint = std::max(g_max_constraint, r.max_constraint);
  g_runs.push_back(fmt("%s %.3g", label.c_str(), r.max_constraint));
  return r;
}

VectorXd member_centre(const Model& m, const std::string& member, const VectorXd& q) {
  const int i = m.member_index.at(member);
  return m.topology->point(PointRef::on_member(i, m.topology->members()[static_cast<std::size_t>(i)].tpl.mass_center_coeffs()), q);
}

// 1 -----------------------------------------------------------------------------------------------
Outcome pendulum_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const Model m = build_model(builtin("example1"));
  SolverSettings ss = m.scenario.solver;
  ss.h = 1e-3;
  const auto r = run("example1 1 s", *m.forces, m.q0, m.qdot0, 1.0, ss);
  const auto osc = oracle::example1_pendulum(9.8);
  const auto a0 = oracle::example1_angles(m.q0);
  const auto ref = osc.integrate({a0[0], a0[1], 0.0, 0.0}, r.t, 1e-5);
  double err = 0.0;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const auto a = oracle::example1_angles(r.q[k]);
    err = std::max({err, std::abs(oracle::angle_diff(a[0], ref[k][0])), std::abs(oracle::angle_diff(a[1], ref[k][1]))});
  }
  const double dt = seconds_since(t0);
  return {!r.failed && err < kPendulumAngleTol && dt < kPendulumRuntime,
          fmt("max|dtheta| = %.3e rad (< %.0e), runtime %.2f s (< %.0f s)", err, kPendulumAngleTol, dt, kPendulumRuntime)};
}

// 2 -----------------------------------------------------------------------------------------------
Outcome pendulum_energy() {
  const auto t0 = std::chrono::steady_clock::now();
  const Model m = build_model(builtin("example1"));
  SolverSettings ss = m.scenario.solver;
  ss.h = 1e-3;
  SimulationOptions so;
  so.record_cables = false;
  const double T = 500.0;
  const auto r = run("example1 500 s", *m.forces, m.q0, m.qdot0, T, ss, so);
  // E(0) is zero with the gravity datum at the pivot; measure against the energy above the hanging rest state.
  const auto osc = oracle::example1_pendulum(9.8);
  const double v_min = osc.energy({-std::numbers::pi / 2, -std::numbers::pi / 2, 0.0, 0.0});
  const double e0 = r.energy.front();
  const double scale = std::abs(e0 - v_min);
  double worst = 0.0;
  std::vector<int> changes(kEnergyWindows, 0);
  for (std::size_t k = 1; k < r.energy.size(); ++k) {
    worst = std::max(worst, std::abs(r.energy[k] - e0) / scale);
    const double a = r.energy[k - 1] - e0, b = r.energy[k] - e0;
    if ((a < 0.0) != (b < 0.0)) {
      const int w = std::min(kEnergyWindows - 1, static_cast<int>(r.t[k] / (T / kEnergyWindows)));
      ++changes[static_cast<std::size_t>(w)];
    }
  }
  const int quiet = static_cast<int>(std::count(changes.begin(), changes.end(), 0));
  const double dt = seconds_since(t0);
  const bool ok = !r.failed && r.steps == 500000 && worst < kEnergyRelTol && quiet == 0 && dt < kEnergyRuntime;
  return {ok, fmt("max|E-E0|/|E0-Vmin| = %.3e (< %.0e, E0-Vmin = %.4f J), windows without sign change %d/%d, "
                  "runtime %.1f s (< %.0f s)%s",
                  worst, kEnergyRelTol, scale, quiet, kEnergyWindows, dt, kEnergyRuntime,
                  r.failed ? (", " + r.diagnostic).c_str() : "")};
}

// 4 -----------------------------------------------------------------------------------------------
Outcome constant_force() {
  MatrixXd X(3, 3);
  X << 0.3, 0.02, 0.0, 0.0, 0.2, 0.01, 0.0, 0.0, 0.25;
  const auto tpl = MemberTemplate::create(make_coord_type(CoordTag::RUVW, 3), 1.5, Eigen::Vector3d(-0.1, 0.05, -0.05), X,
                                          Eigen::Vector3d(0.02, 0.03, 0.04), "block");
  auto topo = std::make_shared<SystemTopology>(assemble(3, 4, {{tpl, {0, 1, 2, 3}}}, {}, {}));
  const Eigen::Vector3d g(0.4, -0.3, -9.8);
  ForceModel model(topo, {}, LoadSet{g, {}});
  const double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::Matrix3d R;
  R << c, 0, s, 0, 1, 0, -s, 0, c;
  const VectorXd q0 = tpl.place(Eigen::Vector3d(0.1, 0.2, 3.0), R);
  VectorXd v0 = VectorXd::Zero(12);
  v0.head<3>() << 1.0, 0.5, 2.0;
  SolverSettings ss;
  ss.h = 1e-3;
  auto exact = [&](double t) {
    VectorXd q = q0;
    q.head<3>() += v0.head<3>() * t + 0.5 * g * t * t;
    return q;
  };
  // one step from the exact state at every grid time
  Integrator integ(model, ss);
  double local = 0.0;
  const int steps = 1000;
  for (int k = 0; k < steps; ++k) {
    const double t = k * ss.h;
    VectorXd v = v0;
    v.head<3>() += g * t;
    SystemState s0 = integ.initial_state(exact(t), v, t), s1;
    integ.step(s0, s1);
    const VectorXd e = exact(t + ss.h);
    local = std::max(local, (s1.q - e).cwiseAbs().maxCoeff() / e.cwiseAbs().maxCoeff());
    g_max_constraint = std::max(g_max_constraint, topo->constraint_residual(s1.q).lpNorm<Eigen::Infinity>());
  }
  // accumulated over the whole run, for information
  const auto r = run("free body", model, q0, v0, steps * ss.h, ss);
  double global = 0.0;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const VectorXd e = exact(r.t[k]);
    global = std::max(global, (r.q[k] - e).cwiseAbs().maxCoeff() / e.cwiseAbs().maxCoeff());
  }
  return {!r.failed && local <= kConstantForceTol,
          fmt("max relative one-step deviation %.2e over %d steps (<= %.0e); accumulated after %ld steps %.2e", local,
              steps, kConstantForceTol, r.steps, global)};
}

// 5 -----------------------------------------------------------------------------------------------
Outcome derivative_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const Model m = build_model(builtin("example3"));
  const auto& T = *m.topology;
  const ForceModel& F = *m.forces;
  std::mt19937 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_q = 0.0, worst_v = 0.0;
  int done = 0, tries = 0;
  while (done < kDerivativeSamples && tries < 100 * kDerivativeSamples) {
    ++tries;
    VectorXd q = m.q0, v = VectorXd::Zero(T.n());
    for (int c : T.free_indices()) {
      q(c) += 2e-3 * n(rng);
      v(c) = 0.05 * n(rng);
    }
    // taut with margin, so that finite differences do not cross the slack switch
    bool taut = true;
    for (const auto& st : F.cable_states(q, v, 0.0))
      if (st.slack || st.f < 1e-3 * F.cables()[0].spec.stiffness * st.l) taut = false;
    if (!taut) continue;
    MatrixXd Kq, Kv;
    F.tension_force_derivatives(q, v, 0.0, Kq, Kv);
    MatrixXd Fq(Kq.rows(), Kq.cols()), Fv(Kv.rows(), Kv.cols());
    const double eps = 1e-6;
    for (int j = 0; j < T.n_free(); ++j) {
      const int c = T.free_indices()[static_cast<std::size_t>(j)];
      VectorXd qp = q, qm = q, vp = v, vm = v;
      qp(c) += eps;
      qm(c) -= eps;
      vp(c) += eps;
      vm(c) -= eps;
      Fq.col(j) = (F.tension_force(qp, v, 0.0) - F.tension_force(qm, v, 0.0)) / (2 * eps);
      Fv.col(j) = (F.tension_force(q, vp, 0.0) - F.tension_force(q, vm, 0.0)) / (2 * eps);
    }
    worst_q = std::max(worst_q, (Fq - Kq).norm() / Kq.norm());
    worst_v = std::max(worst_v, (Fv - Kv).norm() / Kv.norm());
    ++done;
  }
  const double dt = seconds_since(t0);
  return {done == kDerivativeSamples && worst_q < kDerivativeTol && worst_v < kDerivativeTol && dt < kDerivativeRuntime,
          fmt("%d configurations: dQ/dq %.2e, dQ/dqdot %.2e (< %.0e), runtime %.2f s (< %.0f s)", done, worst_q, worst_v,
              kDerivativeTol, dt, kDerivativeRuntime)};
}

// 6 -----------------------------------------------------------------------------------------------
Outcome mass_matrices() {
  // bar: three-point Gauss quadrature of ∫ Nᵀ N dm against the closed form
  double worst_bar = 0.0;
  for (int dim : {2, 3}) {
    const double m = 0.026934977798, L = 0.07071067811865477;
    const auto bar = MemberTemplate::uniform_bar(CoordTag::RR, dim, m, L, m * L * L / 12.0);
    const MatrixXd I = MatrixXd::Identity(dim, dim);
    MatrixXd quad = MatrixXd::Zero(2 * dim, 2 * dim);
    const double xs[] = {0.5 - std::sqrt(15.0) / 10.0, 0.5, 0.5 + std::sqrt(15.0) / 10.0};
    const double ws[] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    for (int k = 0; k < 3; ++k) {
      MatrixXd N(dim, 2 * dim);
      N << (1.0 - xs[k]) * I, xs[k] * I;
      quad += m * ws[k] * N.transpose() * N;
    }
    MatrixXd closed(2 * dim, 2 * dim);
    closed << 2 * I, I, I, 2 * I;
    closed *= m / 6.0;
    worst_bar = std::max({worst_bar, (quad - closed).cwiseAbs().maxCoeff() / m,
                          (bar.mass_matrix() - closed).cwiseAbs().maxCoeff() / m});
  }
  // kinetic energy of random rigid motions: ½q̇ᵀMq̇ against ½m|v|² + ½ωᵀIω
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_ke = 0.0;
  MatrixXd X(3, 3);
  X << 0.3, 0.05, 0.1, 0.02, 0.25, -0.04, 0.01, 0.03, 0.2;
  const Eigen::Vector3d ri(-0.08, -0.06, -0.05);
  const Eigen::Vector3d In(0.011, 0.017, 0.021);
  for (CoordTag tag : {CoordTag::RUVW, CoordTag::RRVW, CoordTag::RRRW, CoordTag::RRRR}) {
    const auto tpl = MemberTemplate::create(make_coord_type(tag, 3), 2.0, ri, X, In);
    const CoordType& ct = tpl.type();
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::Matrix3d A;
      for (int i = 0; i < 9; ++i) A.data()[i] = u(rng);
      Eigen::Matrix3d R = Eigen::HouseholderQR<Eigen::Matrix3d>(A).householderQ();
      if (R.determinant() < 0) R.col(0) *= -1.0;
      const Eigen::Vector3d cg(u(rng), u(rng), u(rng)), v(u(rng), u(rng), u(rng)), w(u(rng), u(rng), u(rng));
      const VectorXd q = tpl.place(cg, R);
      VectorXd qd(q.size());
      for (int k = 0; k < ct.nslots(); ++k) {
        const Eigen::Vector3d x = q.segment<3>(3 * k);
        qd.segment<3>(3 * k) = ct.slot_is_point(k) ? Eigen::Vector3d(v + w.cross(x - cg)) : Eigen::Vector3d(w.cross(x));
      }
      const double rigid = 0.5 * 2.0 * v.squaredNorm() + 0.5 * w.dot(R * In.asDiagonal() * R.transpose() * w);
      worst_ke = std::max(worst_ke, std::abs(0.5 * qd.dot(tpl.mass_matrix() * qd) - rigid) / rigid);
    }
  }
  return {worst_bar <= kMassTol && worst_ke <= kKineticTol,
          fmt("bar closed form vs quadrature %.1e (<= %.0e), kinetic energy %.1e (<= %.0e)", worst_bar, kMassTol,
              worst_ke, kKineticTol)};
}

// 7 -----------------------------------------------------------------------------------------------
struct TowerNumbers {
  int dof[2], rank[2], slack[2];
  double worst_mu = 0.0;
};

TowerNumbers tower_numbers(double g) {
  TowerNumbers t{};
  int i = 0;
  for (const char* stage : {"initial", "target"}) {
    BuiltinOptions o;
    o.stage = stage;
    o.gravity = g;
    const Model m = build_model(builtin("example3", o));
    t.dof[i] = degrees_of_freedom(*m.topology, m.q0);
    MatrixXd B;
    VectorXd b;
    rest_length_system(*m.forces, m.q0, 0.0, B, b);
    t.rank[i] = numerical_rank(B);
    t.slack[i] = 0;
    for (const auto& s : m.forces->cable_states(m.q0, VectorXd::Zero(m.q0.size()), 0.0)) t.slack[i] += s.slack;
    const VectorXd mu = m.forces->rest_lengths();
    const double* ref = i == 0 ? kRefMuInitial : kRefMuTarget;
    for (int k = 0; k < 5; ++k) t.worst_mu = std::max(t.worst_mu, std::abs(mu(kRefMuCables[k]) / ref[k] - 1.0));
    ++i;
  }
  return t;
}

Outcome tower_structure() {
  const TowerNumbers t = tower_numbers(9.8);
  const bool ok = t.dof[0] == 24 && t.dof[1] == 24 && t.rank[0] == 21 && t.rank[1] == 21 && t.slack[0] == 0 &&
                  t.slack[1] == 0 && t.worst_mu < kRestLengthTol;
  return {ok, fmt("DoF %d/%d, rank(B) %d/%d, slack %d/%d, rest lengths max rel. error %.2e (< %.0e)", t.dof[0], t.dof[1],
                  t.rank[0], t.rank[1], t.slack[0], t.slack[1], t.worst_mu, kRestLengthTol)};
}

// 8 -----------------------------------------------------------------------------------------------
double lowest_frequency(const std::string& stage, double g) {
  BuiltinOptions o;
  o.stage = stage;
  o.gravity = g;
  const Model m = build_model(builtin("example3", o));
  const auto ms = solve_modes(linearize(*m.forces, m.q0), *m.topology);
  return ms.frequencies(0);
}

Outcome tower_modal() {
  const auto t0 = std::chrono::steady_clock::now();
  const double fi = lowest_frequency("initial", 9.8), ft = lowest_frequency("target", 9.8);
  const double dt = seconds_since(t0);
  const double ei = std::abs(fi / kFreqInitial - 1.0), et = std::abs(ft / kFreqTarget - 1.0);
  return {ei < kFrequencyTol && et < kFrequencyTol && dt < kModalRuntime,
          fmt("initial %.4f Hz (%.2f%%), target %.4f Hz (%.2f%%) (< %.0f%%), runtime %.2f s (< %.0f s)", fi, 100 * ei, ft,
              100 * et, 100 * kFrequencyTol, dt, kModalRuntime)};
}

std::string gravity_sensitivity() {
  const TowerNumbers t = tower_numbers(9.81);
  const double fi = lowest_frequency("initial", 9.81), ft = lowest_frequency("target", 9.81);
  return fmt("g = 9.81: rest lengths max rel. error %.2e, lowest frequencies %.4f / %.4f Hz (%.2f%% / %.2f%%)",
             t.worst_mu, fi, ft, 100 * std::abs(fi / kFreqInitial - 1.0), 100 * std::abs(ft / kFreqTarget - 1.0));
}

// 9 -----------------------------------------------------------------------------------------------
Scenario example2_at(double factor) {
  BuiltinOptions o;
  o.alpha = o.beta = factor;
  return builtin("example2", o);
}

Outcome modal_cross_check() {
  Scenario s = example2_at(0.9);
  s.gravity = VectorXd::Zero(2);
  for (auto& p : s.prescribed) p.amplitude = 0.0;
  for (auto& c : s.cables) c.damping = 0.0;
  const Model m = build_model(s);
  const auto lin = linearize(*m.forces, m.q0);
  const auto ms = solve_modes(lin, *m.topology);
  const double f1 = ms.frequencies(0);
  // start at equilibrium with a small velocity along the first mode; the velocity lies in the constraint tangent space
  const VectorXd dir = lin.N * ms.shapes_reduced.col(0);
  const auto& T = *m.topology;
  VectorXd v0 = VectorXd::Zero(T.n());
  VectorXd vf = 1e-4 * 2.0 * std::numbers::pi * f1 * dir / dir.cwiseAbs().maxCoeff();
  T.scatter_free(vf, v0);
  SolverSettings ss = s.solver;
  ss.h = 1e-3;
  const double duration = 40.0;
  const auto r = run("example2 free vibration", *m.forces, m.q0, v0, duration, ss);
  // modal coordinate η = φᵀ M̌ (q̌ − q̌_e)
  const VectorXd phi = T.mass_free() * dir;
  const VectorXd qe = T.gather_free(m.q0);
  std::vector<double> eta;
  for (const auto& q : r.q) eta.push_back(phi.dot(T.gather_free(q) - qe));
  const double peak = oracle::fft_peak(eta, ss.h);
  bool slack = false;
  for (const auto& cs : r.cables)
    for (const auto& c : cs) slack = slack || c.slack;
  const double err = std::abs(peak / f1 - 1.0);
  return {!r.failed && !slack && err < kFftTol,
          fmt("FFT peak %.5f Hz vs linearized %.5f Hz (%.3f%%, < %.0f%%)%s", peak, f1, 100 * err, 100 * kFftTol,
              slack ? ", a cable went slack" : "")};
}

// 10 ----------------------------------------------------------------------------------------------
Outcome stability_trend() {
  const std::vector<double> values = builtin("example2").sweep->values;
  std::vector<VectorXd> f;
  double f09 = 0.0;
  for (double v : values) {
    Scenario s = example2_at(v);
    const Model m = build_model(s);
    if (!s.modal_gravity) m.forces->set_gravity(VectorXd::Zero(2));
    f.push_back(solve_modes(linearize(*m.forces, m.q0), *m.topology).frequencies);
    if (std::abs(v - 0.9) < 1e-12) f09 = f.back()(0);
  }
  int violations = 0;
  for (std::size_t k = 1; k < f.size(); ++k) {
    for (int i = 0; i < 3; ++i)
      if (!(f[k](i) < f[k - 1](i))) ++violations;
    for (int i = 3; i < 5; ++i)
      if (!(f[k](i) > f[k - 1](i))) ++violations;
  }
  const double last = std::abs(f.back()(0));
  const bool ok = violations == 0 && f09 > 0.0 && last < kLowestFractionAt0845 * f09;
  return {ok, fmt("%zu grid points %.3f..%.3f, monotonicity violations %d, |f1(%.3f)| = %.3e Hz vs f1(0.9) = %.4f Hz "
                  "(< %.0f%%)",
                  values.size(), values.front(), values.back(), violations, values.back(), last, f09,
                  100 * kLowestFractionAt0845)};
}

// 11 ----------------------------------------------------------------------------------------------
// First time the triangle-3 centroid drops below kCollapseFraction of its initial height; -1 if never.
double collapse_onset(const Model& m, const SimulationResult& r) {
  const double y0 = member_centre(m, "tri3", r.q.front())(1);
  for (std::size_t k = 0; k < r.q.size(); ++k)
    if (member_centre(m, "tri3", r.q[k])(1) < kCollapseFraction * y0) return r.t[k];
  return -1.0;
}

Outcome slack_dynamics() {
  BuiltinOptions o;
  o.setup = "US";
  const Model us = build_model(builtin("example2", o));
  const auto r = run("example2 US", *us.forces, us.q0, us.qdot0, 2.0, us.scenario.solver);
  o.setup = "UN";
  const Model un = build_model(builtin("example2", o));
  const auto ru = run("example2 UN", *un.forces, un.q0, un.qdot0, 2.0, un.scenario.solver);
  const double onset = collapse_onset(us, r), onset_un = collapse_onset(un, ru);
  const bool ok = !r.failed && !ru.failed && r.slack_events.size() > 1 && onset >= kCollapseEarliest &&
                  onset <= kCollapseLatest && onset_un < 0.0;
  return {ok, fmt("US: %ld steps, %zu slack events, %ld halved steps, collapse onset %.3f s (in [%.1f, %.1f]); "
                  "UN: %s%s",
                  r.steps, r.slack_events.size(), r.halved_steps, onset, kCollapseEarliest, kCollapseLatest,
                  onset_un < 0.0 ? "no collapse" : fmt("collapse at %.3f s", onset_un).c_str(),
                  r.failed ? (", US failed: " + r.diagnostic).c_str() : "")};
}

// 12 ----------------------------------------------------------------------------------------------
struct Envelope {
  bool failed;
  double first, peak, peak_time;
  std::string diagnostic;
};

// Half peak-to-peak of the horizontal position of tet10's mass centre per window of max(2 s, one period).
Envelope deployment(double nu) {
  BuiltinOptions o;
  o.stage = "deploy";
  o.nu = nu;
  o.deploy_time = 10.0;
  const Model m = build_model(builtin("example3", o));
  SimulationOptions so;
  so.record_stride = 10;
  so.record_cables = false;
  const auto r = run(fmt("example3 deploy %.1f Hz", nu), *m.forces, m.q0, m.qdot0, 20.0, m.scenario.solver, so);
  const double win = std::max(2.0, 1.0 / nu);
  Envelope e{r.failed, 0.0, 0.0, 0.0, r.diagnostic};
  const int nw = static_cast<int>(std::floor(20.0 / win + 1e-9));
  std::vector<double> lo(static_cast<std::size_t>(nw), 1e300), hi(static_cast<std::size_t>(nw), -1e300);
  for (std::size_t k = 0; k < r.q.size(); ++k) {
    const int w = std::min(nw - 1, static_cast<int>(r.t[k] / win));
    const double x = member_centre(m, "tet10", r.q[k])(0);
    lo[static_cast<std::size_t>(w)] = std::min(lo[static_cast<std::size_t>(w)], x);
    hi[static_cast<std::size_t>(w)] = std::max(hi[static_cast<std::size_t>(w)], x);
  }
  for (int w = 0; w < nw; ++w) {
    if (hi[static_cast<std::size_t>(w)] < lo[static_cast<std::size_t>(w)]) continue;
    const double a = 0.5 * (hi[static_cast<std::size_t>(w)] - lo[static_cast<std::size_t>(w)]);
    if (w == 0) e.first = a;
    if (a > e.peak) {
      e.peak = a;
      e.peak_time = w * win;
    }
  }
  return e;
}

Outcome deployment_scenario() {
  const Envelope res = deployment(0.5), slow = deployment(0.2), fast = deployment(1.0);
  auto ratio = [](const Envelope& e) { return e.peak / e.first; };
  const bool ok = !res.failed && !slow.failed && !fast.failed && ratio(res) > kGrowthRatio &&
                  ratio(slow) < kGrowthRatio && ratio(fast) < kGrowthRatio;
  std::string diag;
  for (const Envelope* e : {&res, &slow, &fast})
    if (e->failed) diag += ", failure: " + e->diagnostic;
  return {ok, fmt("envelope growth 0.5 Hz x%.2f (peak in window at %.0f s, > %.0f), 0.2 Hz x%.2f, 1.0 Hz x%.2f (< %.0f)%s",
                  ratio(res), res.peak_time, kGrowthRatio, ratio(slow), ratio(fast), kGrowthRatio, diag.c_str())};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  // criterion 3 is evaluated last over every simulation run by the others
  const std::vector<Item> items = {
      {1, "double-pendulum oracle", pendulum_oracle},
      {2, "long-time energy", pendulum_energy},
      {4, "constant-force exactness", constant_force},
      {5, "cable force derivatives", derivative_check},
      {6, "mass matrices", mass_matrices},
      {7, "tower structural numbers", tower_structure},
      {8, "tower lowest frequencies", tower_modal},
      {9, "modal vs nonlinear", modal_cross_check},
      {10, "planar tower stability trend", stability_trend},
      {11, "slack-cable dynamics", slack_dynamics},
      {12, "deployment", deployment_scenario},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::ostringstream os;
    os << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << o.detail;
    lines.emplace_back(id, os.str());
    std::printf("%s\n", os.str().c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  for (const auto& it : items) {
    Outcome o;
    try {
      o = it.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(it.id, it.name, o);
  }
  report(3, "constraint satisfaction",
         {g_max_constraint <= kConstraintTol,
          fmt("max |constraint| %.3e over %zu runs (<= %.0e)", g_max_constraint, g_runs.size(), kConstraintTol)});
  std::printf("INFO  gravity sensitivity: %s\n", gravity_sensitivity().c_str());

  std::sort(lines.begin(), lines.end());
  std::printf("\nsummary\n");
  for (const auto& [id, l] : lines) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria failed\n", failures, lines.size());
  return failures;
}

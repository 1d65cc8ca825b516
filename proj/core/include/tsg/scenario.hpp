#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsg/integrator.hpp"
#include "tsg/statics.hpp"

namespace tsg {

struct NodeSpec {
  std::string name;
  VectorXd position;  // m; for a vector node, the vector itself
  VectorXd velocity;  // m/s; empty means at rest
};

// A uniform bar is given by length and axial moment; any other member by its local geometry.
struct MemberSpec {
  std::string name;
  CoordTag tag = CoordTag::RR;
  double mass = 0.0;
  std::vector<std::string> nodes;
  bool uniform_bar = false;
  double length = 0.0;
  VectorXd basic_point;  // r̄_i, local frame centred at the mass centre
  MatrixXd base;         // X̄ columns
  VectorXd inertia;      // principal moments (3D), second moments (2D) or axial moment (bar)
};

struct PointSpec {
  std::string node;    // bare node, or
  std::string member;  // a point on a member given by
  VectorXd coeffs;     // affine coefficients, or
  VectorXd local;      // local Cartesian position
};

struct JointSpec {
  std::string name;
  PointSpec a, b;
};

struct MotionSpec {
  std::string node;
  double amplitude = 0.0;  // m
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
  VectorXd axis;
};

enum class RestLengthMode { Explicit, Factor, Statics };

struct CableScenarioSpec {
  std::string name;
  std::string group;
  PointSpec from, to;
  double stiffness = 0.0;
  double damping = 0.0;
  RestLengthMode mode = RestLengthMode::Explicit;
  double rest_length = 0.0;  // m (Explicit)
  double factor = 1.0;       // × initial length (Factor)
  bool can_slack = true;
  std::optional<double> final_rest_length;  // actuation target, m
  double actuation_duration = 0.0;          // s
};

struct LoadSpec {
  PointSpec at;
  VectorXd force;  // N
};

enum class SweepParameter { Alpha, Beta, AlphaBeta };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::AlphaBeta;
  std::vector<double> values;
};

struct Scenario {
  std::string name;
  int dim = 3;
  VectorXd gravity;  // m/s²
  std::vector<NodeSpec> nodes;
  std::vector<MemberSpec> members;
  std::vector<JointSpec> joints;
  std::vector<MotionSpec> prescribed;
  std::vector<CableScenarioSpec> cables;
  std::vector<LoadSpec> loads;
  SolverSettings solver;
  double duration = 1.0;  // s
  int record_stride = 1;
  bool modal_gravity = true;
  std::vector<std::string> outputs;
  std::optional<SweepSpec> sweep;
};

bool operator==(const Scenario& a, const Scenario& b);

std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

struct ParsedScenario {
  Scenario scenario;
  std::vector<std::string> defaulted;  // dotted paths of fields that took default values
};

ParsedScenario parse_scenario(const std::string& text);
ParsedScenario parse_scenario_file(const std::string& path);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& s);

// A scenario resolved into library objects.
struct Model {
  Scenario scenario;
  std::shared_ptr<const SystemTopology> topology;
  std::shared_ptr<ForceModel> forces;
  VectorXd q0;     // full initial coordinates
  VectorXd qdot0;  // full initial velocities
  std::map<std::string, int> node_index, member_index, cable_index;
  std::optional<RestLengthResult> statics;  // present when any rest length came from inverse statics

  PointRef point(const PointSpec& p) const;
};

Model build_model(const Scenario& s);

// Built-in reconstructions of the three reference structures.
struct BuiltinOptions {
  // example2
  double alpha = 0.95;  // essential cables, μ = α × initial length
  double beta = 0.998;  // auxiliary cables
  std::string setup = "UN";  // UN, DN, US, US-AUX
  // example3
  double nu = 0.5;      // ground excitation frequency, Hz
  double deploy_time = 10.0;  // T_d, s
  std::string stage = "initial";  // initial, target, deploy
  // all
  double gravity = 9.8;
};

Scenario builtin(const std::string& name, const BuiltinOptions& opt = {});
bool is_builtin(const std::string& name);

}  // namespace tsg

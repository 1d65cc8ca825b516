#include "tsg/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "tsg/errors.hpp"

namespace tsg {

namespace {

bool same(const VectorXd& a, const VectorXd& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }
bool same(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

bool same(const PointSpec& a, const PointSpec& b) {
  return a.node == b.node && a.member == b.member && same(a.coeffs, b.coeffs) && same(a.local, b.local);
}

// Map reader that rejects keys nobody asked for.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path, std::vector<std::string>* defaulted)
      : node_(node), path_(std::move(path)), defaulted_(defaulted) {
    if (!node_.IsMap()) fail("expected a mapping");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node get(const std::string& key) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if (!v) fail("missing required key '" + key + "'");
    return v;
  }

  template <class T>
  T value(const std::string& key) {
    const YAML::Node v = get(key);
    return convert<T>(v, key);
  }

  template <class T>
  T value_or(const std::string& key, const T& def) {
    if (!has(key)) {
      if (defaulted_) defaulted_->push_back(sub(key));
      return def;
    }
    return convert<T>(node_[key], key);
  }

  VectorXd vector(const std::string& key, Eigen::Index size = -1) {
    return to_vector(get(key), sub(key), size);
  }

  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError((path_.empty() ? std::string("scenario") : path_) + ": " + msg);
  }

  static VectorXd to_vector(const YAML::Node& n, const std::string& where, Eigen::Index size = -1) {
    if (!n.IsSequence()) throw ParseError(where + ": expected a list of numbers");
    VectorXd v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) {
      try {
        v(static_cast<Eigen::Index>(i)) = n[i].as<double>();
      } catch (const YAML::Exception&) {
        throw ParseError(where + ": entry " + std::to_string(i) + " is not a number");
      }
    }
    if (size >= 0 && v.size() != size)
      throw ParseError(where + ": expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    return v;
  }

 private:
  template <class T>
  T convert(const YAML::Node& v, const std::string& key) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail("key '" + key + "' has the wrong type");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string>* defaulted_;
  std::set<std::string> used_;
};

std::vector<std::string> string_list(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence()) throw ParseError(where + ": expected a list of names");
  std::vector<std::string> out;
  for (const auto& e : n) out.push_back(e.as<std::string>());
  return out;
}

PointSpec parse_point(const YAML::Node& n, const std::string& path, int dim) {
  MapReader r(n, path, nullptr);
  PointSpec p;
  if (r.has("node")) p.node = r.value<std::string>("node");
  if (r.has("member")) p.member = r.value<std::string>("member");
  if (r.has("coeffs")) p.coeffs = r.vector("coeffs");
  if (r.has("local_m")) p.local = r.vector("local_m", dim);
  r.finish();
  if (p.node.empty() == p.member.empty()) r.fail("give exactly one of 'node' or 'member'");
  if (!p.member.empty() && (p.coeffs.size() > 0) == (p.local.size() > 0))
    r.fail("a member point needs exactly one of 'coeffs' or 'local_m'");
  if (!p.node.empty() && (p.coeffs.size() > 0 || p.local.size() > 0)) r.fail("a node point takes no coordinates");
  return p;
}

void emit_vector(YAML::Emitter& e, const VectorXd& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) e << v(i);
  e << YAML::EndSeq;
}

void emit_point(YAML::Emitter& e, const PointSpec& p) {
  e << YAML::Flow << YAML::BeginMap;
  if (!p.node.empty()) {
    e << YAML::Key << "node" << YAML::Value << p.node;
  } else {
    e << YAML::Key << "member" << YAML::Value << p.member;
    if (p.coeffs.size()) {
      e << YAML::Key << "coeffs" << YAML::Value;
      emit_vector(e, p.coeffs);
    } else {
      e << YAML::Key << "local_m" << YAML::Value;
      emit_vector(e, p.local);
    }
  }
  e << YAML::EndMap;
}

}  // namespace

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Alpha: return "alpha";
    case SweepParameter::Beta: return "beta";
    case SweepParameter::AlphaBeta: return "alpha_beta";
  }
  return "";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "alpha") return SweepParameter::Alpha;
  if (s == "beta") return SweepParameter::Beta;
  if (s == "alpha_beta") return SweepParameter::AlphaBeta;
  throw ParseError("unknown sweep parameter '" + s + "'");
}

bool operator==(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || a.dim != b.dim || !same(a.gravity, b.gravity)) return false;
  if (a.nodes.size() != b.nodes.size() || a.members.size() != b.members.size() ||
      a.joints.size() != b.joints.size() || a.prescribed.size() != b.prescribed.size() ||
      a.cables.size() != b.cables.size() || a.loads.size() != b.loads.size())
    return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto &x = a.nodes[i], &y = b.nodes[i];
    if (x.name != y.name || !same(x.position, y.position) || !same(x.velocity, y.velocity)) return false;
  }
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    const auto &x = a.members[i], &y = b.members[i];
    if (x.name != y.name || x.tag != y.tag || x.mass != y.mass || x.nodes != y.nodes ||
        x.uniform_bar != y.uniform_bar || x.length != y.length || !same(x.basic_point, y.basic_point) ||
        !same(x.base, y.base) || !same(x.inertia, y.inertia))
      return false;
  }
  for (std::size_t i = 0; i < a.joints.size(); ++i)
    if (a.joints[i].name != b.joints[i].name || !same(a.joints[i].a, b.joints[i].a) ||
        !same(a.joints[i].b, b.joints[i].b))
      return false;
  for (std::size_t i = 0; i < a.prescribed.size(); ++i) {
    const auto &x = a.prescribed[i], &y = b.prescribed[i];
    if (x.node != y.node || x.amplitude != y.amplitude || x.frequency != y.frequency || x.phase != y.phase ||
        !same(x.axis, y.axis))
      return false;
  }
  for (std::size_t i = 0; i < a.cables.size(); ++i) {
    const auto &x = a.cables[i], &y = b.cables[i];
    if (x.name != y.name || x.group != y.group || !same(x.from, y.from) || !same(x.to, y.to) ||
        x.stiffness != y.stiffness || x.damping != y.damping || x.mode != y.mode ||
        x.rest_length != y.rest_length || x.factor != y.factor || x.can_slack != y.can_slack ||
        x.final_rest_length != y.final_rest_length || x.actuation_duration != y.actuation_duration)
      return false;
  }
  for (std::size_t i = 0; i < a.loads.size(); ++i)
    if (!same(a.loads[i].at, b.loads[i].at) || !same(a.loads[i].force, b.loads[i].force)) return false;
  const auto &s = a.solver, &t = b.solver;
  if (s.h != t.h || s.max_iter != t.max_iter || s.tol != t.tol || s.momentum_tol != t.momentum_tol ||
      s.halve_on_chatter != t.halve_on_chatter)
    return false;
  if (a.duration != b.duration || a.record_stride != b.record_stride || a.modal_gravity != b.modal_gravity ||
      a.outputs != b.outputs)
    return false;
  if (a.sweep.has_value() != b.sweep.has_value()) return false;
  if (a.sweep && (a.sweep->parameter != b.sweep->parameter || a.sweep->values != b.sweep->values)) return false;
  return true;
}

ParsedScenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("malformed scenario text: ") + e.what());
  }
  ParsedScenario out;
  auto* dflt = &out.defaulted;
  Scenario& s = out.scenario;
  MapReader r(root, "", dflt);

  s.name = r.value_or<std::string>("name", "scenario");
  s.dim = r.value<int>("dimension");
  if (s.dim != 2 && s.dim != 3) r.fail("dimension must be 2 or 3");
  if (r.has("gravity_m_s2")) {
    s.gravity = MapReader::to_vector(root["gravity_m_s2"], "gravity_m_s2", s.dim);
  } else {
    dflt->push_back("gravity_m_s2");
    s.gravity = VectorXd::Zero(s.dim);
    s.gravity(s.dim - 1) = -9.8;
  }

  std::set<std::string> node_names, member_names;
  for (std::size_t i = 0; const auto& n : r.get("nodes")) {
    const std::string path = "nodes[" + std::to_string(i++) + "]";
    MapReader nr(n, path, dflt);
    NodeSpec ns;
    ns.name = nr.value<std::string>("name");
    ns.position = nr.vector("position_m", s.dim);
    if (nr.has("velocity_m_s")) ns.velocity = nr.vector("velocity_m_s", s.dim);
    nr.finish();
    if (!node_names.insert(ns.name).second) nr.fail("duplicate node name '" + ns.name + "'");
    s.nodes.push_back(std::move(ns));
  }

  for (std::size_t i = 0; const auto& n : r.get("members")) {
    const std::string path = "members[" + std::to_string(i++) + "]";
    MapReader mr(n, path, dflt);
    MemberSpec m;
    m.name = mr.value<std::string>("name");
    try {
      m.tag = coord_tag_from_string(mr.value<std::string>("type"));
    } catch (const Error& e) {
      mr.fail(e.what());
    }
    m.mass = mr.value<double>("mass_kg");
    m.nodes = string_list(mr.get("nodes"), mr.sub("nodes"));
    const CoordType ct{m.tag, s.dim};
    if (mr.has("length_m")) {
      m.uniform_bar = true;
      m.length = mr.value<double>("length_m");
      if (!ct.is_bar()) mr.fail("length_m applies to bars only");
    } else {
      m.basic_point = mr.vector("basic_point_m", s.dim);
      const YAML::Node cols = mr.get("base_m");
      if (!cols.IsSequence() || static_cast<int>(cols.size()) != ct.nbase())
        mr.fail("base_m needs " + std::to_string(ct.nbase()) + " column vectors");
      m.base.resize(s.dim, ct.nbase());
      for (int k = 0; k < ct.nbase(); ++k)
        m.base.col(k) = MapReader::to_vector(cols[static_cast<std::size_t>(k)], mr.sub("base_m"), s.dim);
    }
    if (ct.is_bar()) {
      m.inertia = VectorXd::Constant(1, mr.value<double>("axial_moment_kg_m2"));
    } else if (s.dim == 3) {
      m.inertia = mr.vector("principal_moments_kg_m2", 3);
    } else {
      m.inertia = mr.vector("second_moments_kg_m2", 2);
    }
    mr.finish();
    if (static_cast<int>(m.nodes.size()) != ct.nslots())
      mr.fail("type " + to_string(m.tag) + " needs " + std::to_string(ct.nslots()) + " nodes");
    for (const auto& nn : m.nodes)
      if (!node_names.count(nn)) mr.fail("unknown node '" + nn + "'");
    if (!member_names.insert(m.name).second) mr.fail("duplicate member name '" + m.name + "'");
    s.members.push_back(std::move(m));
  }

  auto check_point = [&](const PointSpec& p, const std::string& where) {
    if (!p.node.empty() && !node_names.count(p.node))
      throw ParseError(where + ": unknown node '" + p.node + "'");
    if (!p.member.empty() && !member_names.count(p.member))
      throw ParseError(where + ": unknown member '" + p.member + "'");
  };

  if (r.has("joints")) {
    for (std::size_t i = 0; const auto& n : root["joints"]) {
      const std::string path = "joints[" + std::to_string(i++) + "]";
      MapReader jr(n, path, dflt);
      JointSpec j;
      j.name = jr.value_or<std::string>("name", "joint" + std::to_string(i - 1));
      j.a = parse_point(jr.get("a"), path + ".a", s.dim);
      j.b = parse_point(jr.get("b"), path + ".b", s.dim);
      jr.finish();
      check_point(j.a, path + ".a");
      check_point(j.b, path + ".b");
      s.joints.push_back(std::move(j));
    }
  }

  if (r.has("prescribed")) {
    for (std::size_t i = 0; const auto& n : root["prescribed"]) {
      const std::string path = "prescribed[" + std::to_string(i++) + "]";
      MapReader pr(n, path, dflt);
      MotionSpec m;
      m.node = pr.value<std::string>("node");
      m.amplitude = pr.value_or<double>("amplitude_m", 0.0);
      m.frequency = pr.value_or<double>("frequency_Hz", 0.0);
      m.phase = pr.value_or<double>("phase_rad", 0.0);
      if (pr.has("axis")) {
        m.axis = pr.vector("axis", s.dim);
      } else {
        dflt->push_back(pr.sub("axis"));
        m.axis = VectorXd::Unit(s.dim, 0);
      }
      pr.finish();
      if (!node_names.count(m.node)) pr.fail("unknown node '" + m.node + "'");
      s.prescribed.push_back(std::move(m));
    }
  }

  if (r.has("cables")) {
    std::set<std::string> cable_names;
    const YAML::Node cs = root["cables"];
    if (!cs.IsSequence() && !cs.IsNull()) r.fail("cables must be a list");
    for (std::size_t i = 0; const auto& n : cs) {
      const std::string path = "cables[" + std::to_string(i++) + "]";
      MapReader cr(n, path, dflt);
      CableScenarioSpec c;
      c.name = cr.value_or<std::string>("name", "c" + std::to_string(i));
      c.group = cr.value_or<std::string>("group", "");
      c.from = parse_point(cr.get("from"), path + ".from", s.dim);
      c.to = parse_point(cr.get("to"), path + ".to", s.dim);
      c.stiffness = cr.value<double>("stiffness_N_per_m");
      c.damping = cr.value_or<double>("damping_N_s_per_m", 0.0);
      const int modes = int(cr.has("rest_length_m")) + int(cr.has("rest_length_factor")) + int(cr.has("rest_length"));
      if (modes != 1) cr.fail("give exactly one of rest_length_m, rest_length_factor, rest_length: statics");
      if (cr.has("rest_length_m")) {
        c.mode = RestLengthMode::Explicit;
        c.rest_length = cr.value<double>("rest_length_m");
      } else if (cr.has("rest_length_factor")) {
        c.mode = RestLengthMode::Factor;
        c.factor = cr.value<double>("rest_length_factor");
      } else {
        if (cr.value<std::string>("rest_length") != "statics") cr.fail("rest_length only accepts 'statics'");
        c.mode = RestLengthMode::Statics;
      }
      c.can_slack = cr.value_or<bool>("can_slack", true);
      if (cr.has("actuation")) {
        MapReader ar(cr.get("actuation"), path + ".actuation", dflt);
        c.final_rest_length = ar.value<double>("final_rest_length_m");
        c.actuation_duration = ar.value<double>("duration_s");
        ar.finish();
        if (c.mode == RestLengthMode::Statics) ar.fail("actuated cables need an explicit initial rest length");
        if (!(c.actuation_duration > 0.0)) ar.fail("duration_s must be positive");
      }
      cr.finish();
      if (!(c.stiffness > 0.0)) cr.fail("stiffness_N_per_m must be positive");
      if (c.damping < 0.0) cr.fail("damping_N_s_per_m must be non-negative");
      check_point(c.from, path + ".from");
      check_point(c.to, path + ".to");
      if (!cable_names.insert(c.name).second) cr.fail("duplicate cable name '" + c.name + "'");
      s.cables.push_back(std::move(c));
    }
  }

  if (r.has("loads")) {
    for (std::size_t i = 0; const auto& n : root["loads"]) {
      const std::string path = "loads[" + std::to_string(i++) + "]";
      MapReader lr(n, path, dflt);
      LoadSpec l;
      l.at = parse_point(lr.get("at"), path + ".at", s.dim);
      l.force = lr.vector("force_N", s.dim);
      lr.finish();
      check_point(l.at, path + ".at");
      s.loads.push_back(std::move(l));
    }
  }

  if (r.has("solver")) {
    MapReader sr(root["solver"], "solver", dflt);
    s.solver.h = sr.value_or<double>("time_step_s", s.solver.h);
    s.solver.max_iter = sr.value_or<int>("max_iterations", s.solver.max_iter);
    s.solver.tol = sr.value_or<double>("constraint_tolerance", s.solver.tol);
    s.solver.momentum_tol = sr.value_or<double>("momentum_tolerance_kg_m", s.solver.momentum_tol);
    s.solver.halve_on_chatter = sr.value_or<bool>("halve_on_chatter", s.solver.halve_on_chatter);
    sr.finish();
    if (!(s.solver.h > 0.0)) sr.fail("time_step_s must be positive");
    if (s.solver.max_iter < 1) sr.fail("max_iterations must be at least 1");
  } else {
    dflt->push_back("solver");
  }

  if (r.has("simulation")) {
    MapReader sr(root["simulation"], "simulation", dflt);
    s.duration = sr.value_or<double>("duration_s", s.duration);
    s.record_stride = sr.value_or<int>("record_stride", s.record_stride);
    sr.finish();
    if (s.duration < 0.0) sr.fail("duration_s must be non-negative");
    if (s.record_stride < 1) sr.fail("record_stride must be at least 1");
  } else {
    dflt->push_back("simulation");
  }

  if (r.has("modal")) {
    MapReader mr(root["modal"], "modal", dflt);
    s.modal_gravity = mr.value_or<bool>("include_gravity", true);
    mr.finish();
  } else {
    dflt->push_back("modal");
  }

  if (r.has("outputs")) {
    s.outputs = string_list(root["outputs"], "outputs");
    static const std::set<std::string> known{"simulate", "modal", "inverse-statics", "sweep"};
    for (const auto& o : s.outputs)
      if (!known.count(o)) r.fail("unknown output '" + o + "'");
  }

  if (r.has("sweep")) {
    MapReader sw(root["sweep"], "sweep", dflt);
    SweepSpec sp;
    try {
      sp.parameter = sweep_parameter_from_string(sw.value<std::string>("parameter"));
    } catch (const ParseError& e) {
      sw.fail(e.what());
    }
    const VectorXd v = sw.vector("values");
    sp.values.assign(v.data(), v.data() + v.size());
    sw.finish();
    s.sweep = sp;
  }
  r.finish();

  for (const auto& m : s.prescribed) {
    if (m.amplitude != 0.0 && m.axis.norm() == 0.0) throw ParseError("prescribed node '" + m.node + "': zero axis");
  }
  return out;
}

ParsedScenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

Scenario load_scenario_file(const std::string& path) { return parse_scenario_file(path).scenario; }

std::string serialize_scenario(const Scenario& s) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << s.name;
  e << YAML::Key << "dimension" << YAML::Value << s.dim;
  e << YAML::Key << "gravity_m_s2" << YAML::Value;
  emit_vector(e, s.gravity);

  e << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& n : s.nodes) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << n.name;
    e << YAML::Key << "position_m" << YAML::Value;
    emit_vector(e, n.position);
    if (n.velocity.size()) {
      e << YAML::Key << "velocity_m_s" << YAML::Value;
      emit_vector(e, n.velocity);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "members" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : s.members) {
    const CoordType ct{m.tag, s.dim};
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << m.name;
    e << YAML::Key << "type" << YAML::Value << to_string(m.tag);
    e << YAML::Key << "mass_kg" << YAML::Value << m.mass;
    e << YAML::Key << "nodes" << YAML::Value << YAML::Flow << m.nodes;
    if (m.uniform_bar) {
      e << YAML::Key << "length_m" << YAML::Value << m.length;
    } else {
      e << YAML::Key << "basic_point_m" << YAML::Value;
      emit_vector(e, m.basic_point);
      e << YAML::Key << "base_m" << YAML::Value << YAML::BeginSeq;
      for (Eigen::Index k = 0; k < m.base.cols(); ++k) emit_vector(e, m.base.col(k));
      e << YAML::EndSeq;
    }
    if (ct.is_bar()) {
      e << YAML::Key << "axial_moment_kg_m2" << YAML::Value << m.inertia(0);
    } else {
      e << YAML::Key << (s.dim == 3 ? "principal_moments_kg_m2" : "second_moments_kg_m2") << YAML::Value;
      emit_vector(e, m.inertia);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  if (!s.joints.empty()) {
    e << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
    for (const auto& j : s.joints) {
      e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << j.name;
      e << YAML::Key << "a" << YAML::Value;
      emit_point(e, j.a);
      e << YAML::Key << "b" << YAML::Value;
      emit_point(e, j.b);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }

  if (!s.prescribed.empty()) {
    e << YAML::Key << "prescribed" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : s.prescribed) {
      e << YAML::Flow << YAML::BeginMap << YAML::Key << "node" << YAML::Value << m.node;
      e << YAML::Key << "amplitude_m" << YAML::Value << m.amplitude;
      e << YAML::Key << "frequency_Hz" << YAML::Value << m.frequency;
      e << YAML::Key << "phase_rad" << YAML::Value << m.phase;
      e << YAML::Key << "axis" << YAML::Value;
      emit_vector(e, m.axis);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }

  e << YAML::Key << "cables" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : s.cables) {
    e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.name;
    if (!c.group.empty()) e << YAML::Key << "group" << YAML::Value << c.group;
    e << YAML::Key << "from" << YAML::Value;
    emit_point(e, c.from);
    e << YAML::Key << "to" << YAML::Value;
    emit_point(e, c.to);
    e << YAML::Key << "stiffness_N_per_m" << YAML::Value << c.stiffness;
    e << YAML::Key << "damping_N_s_per_m" << YAML::Value << c.damping;
    switch (c.mode) {
      case RestLengthMode::Explicit: e << YAML::Key << "rest_length_m" << YAML::Value << c.rest_length; break;
      case RestLengthMode::Factor: e << YAML::Key << "rest_length_factor" << YAML::Value << c.factor; break;
      case RestLengthMode::Statics: e << YAML::Key << "rest_length" << YAML::Value << "statics"; break;
    }
    e << YAML::Key << "can_slack" << YAML::Value << c.can_slack;
    if (c.final_rest_length) {
      e << YAML::Key << "actuation" << YAML::Value << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "final_rest_length_m" << YAML::Value << *c.final_rest_length;
      e << YAML::Key << "duration_s" << YAML::Value << c.actuation_duration;
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  if (!s.loads.empty()) {
    e << YAML::Key << "loads" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : s.loads) {
      e << YAML::BeginMap << YAML::Key << "at" << YAML::Value;
      emit_point(e, l.at);
      e << YAML::Key << "force_N" << YAML::Value;
      emit_vector(e, l.force);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }

  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "time_step_s" << YAML::Value << s.solver.h;
  e << YAML::Key << "max_iterations" << YAML::Value << s.solver.max_iter;
  e << YAML::Key << "constraint_tolerance" << YAML::Value << s.solver.tol;
  e << YAML::Key << "momentum_tolerance_kg_m" << YAML::Value << s.solver.momentum_tol;
  e << YAML::Key << "halve_on_chatter" << YAML::Value << s.solver.halve_on_chatter;
  e << YAML::EndMap;

  e << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "duration_s" << YAML::Value << s.duration;
  e << YAML::Key << "record_stride" << YAML::Value << s.record_stride;
  e << YAML::EndMap;

  e << YAML::Key << "modal" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "include_gravity" << YAML::Value << s.modal_gravity;
  e << YAML::EndMap;

  if (!s.outputs.empty()) e << YAML::Key << "outputs" << YAML::Value << YAML::Flow << s.outputs;
  if (s.sweep) {
    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "parameter" << YAML::Value << to_string(s.sweep->parameter);
    e << YAML::Key << "values" << YAML::Value << YAML::Flow << s.sweep->values;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

PointRef Model::point(const PointSpec& p) const {
  if (!p.node.empty()) return PointRef::at_node(node_index.at(p.node));
  const int mi = member_index.at(p.member);
  const auto& tpl = topology->members()[static_cast<std::size_t>(mi)].tpl;
  if (p.coeffs.size()) {
    if (p.coeffs.size() != tpl.type().nbase())
      throw ModelError("point on member '" + p.member + "' needs " + std::to_string(tpl.type().nbase()) +
                       " coefficients");
    return PointRef::on_member(mi, p.coeffs);
  }
  return PointRef::on_member(mi, tpl.local_coeffs(p.local).coeffs);
}

Model build_model(const Scenario& s) {
  Model m;
  m.scenario = s;
  const int dim = s.dim;
  const int nn = static_cast<int>(s.nodes.size());
  m.q0 = VectorXd::Zero(dim * nn);
  m.qdot0 = VectorXd::Zero(dim * nn);
  for (int i = 0; i < nn; ++i) {
    const auto& n = s.nodes[static_cast<std::size_t>(i)];
    m.node_index[n.name] = i;
    m.q0.segment(dim * i, dim) = n.position;
    if (n.velocity.size()) m.qdot0.segment(dim * i, dim) = n.velocity;
  }

  std::vector<MemberInstance> members;
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    const auto& ms = s.members[i];
    MemberInstance mi{ms.uniform_bar
                          ? MemberTemplate::uniform_bar(ms.tag, dim, ms.mass, ms.length, ms.inertia(0), ms.name)
                          : MemberTemplate::create(make_coord_type(ms.tag, dim), ms.mass, ms.basic_point, ms.base,
                                                   ms.inertia, ms.name),
                      {}};
    for (const auto& nm : ms.nodes) mi.nodes.push_back(m.node_index.at(nm));
    m.member_index[ms.name] = static_cast<int>(i);
    members.push_back(std::move(mi));
  }

  // points can be resolved against the templates before the topology exists
  auto local_ref = [&](const PointSpec& p) {
    if (!p.node.empty()) return PointRef::at_node(m.node_index.at(p.node));
    const int mi = m.member_index.at(p.member);
    const auto& tpl = members[static_cast<std::size_t>(mi)].tpl;
    if (p.coeffs.size()) {
      if (p.coeffs.size() != tpl.type().nbase())
        throw ModelError("point on member '" + p.member + "' has the wrong number of coefficients");
      return PointRef::on_member(mi, p.coeffs);
    }
    return PointRef::on_member(mi, tpl.local_coeffs(p.local).coeffs);
  };

  std::vector<Joint> joints;
  for (const auto& j : s.joints) joints.push_back({local_ref(j.a), local_ref(j.b)});

  std::vector<PrescribedNode> pres;
  for (const auto& ps : s.prescribed) {
    PrescribedNode pn;
    pn.node = m.node_index.at(ps.node);
    pn.motion.position = s.nodes[static_cast<std::size_t>(pn.node)].position;
    pn.motion.amplitude = ps.amplitude;
    pn.motion.frequency = ps.frequency;
    pn.motion.phase = ps.phase;
    pn.motion.axis = ps.axis.size() ? ps.axis : VectorXd::Unit(dim, 0);
    pres.push_back(std::move(pn));
  }

  auto topo = std::make_shared<SystemTopology>(assemble(dim, nn, std::move(members), std::move(joints), pres));
  m.topology = topo;
  topo->apply_prescribed(0.0, m.q0);
  for (const auto& pn : topo->prescribed()) m.qdot0.segment(dim * pn.node, dim) = pn.motion.eval(0.0).v;

  std::vector<CableSpec> cables;
  std::map<int, double> fixed;
  bool need_statics = false;
  for (std::size_t j = 0; j < s.cables.size(); ++j) {
    const auto& cs = s.cables[j];
    CableSpec c;
    c.name = cs.name;
    c.a = m.point(cs.from);
    c.b = m.point(cs.to);
    c.stiffness = cs.stiffness;
    c.damping = cs.damping;
    c.can_slack = cs.can_slack;
    const double l0 = (topo->point(c.b, m.q0) - topo->point(c.a, m.q0)).norm();
    switch (cs.mode) {
      case RestLengthMode::Explicit: c.rest_length = cs.rest_length; break;
      case RestLengthMode::Factor: c.rest_length = cs.factor * l0; break;
      case RestLengthMode::Statics:
        need_statics = true;
        c.rest_length = l0;  // placeholder until inverse statics
        break;
    }
    if (cs.mode != RestLengthMode::Statics) fixed[static_cast<int>(j)] = c.rest_length;
    if (cs.final_rest_length) {
      c.actuated = true;
      c.rest_length_final = *cs.final_rest_length;
      c.actuation_duration = cs.actuation_duration;
    }
    m.cable_index[cs.name] = static_cast<int>(j);
    cables.push_back(std::move(c));
  }

  LoadSet loads;
  loads.gravity = s.gravity;
  for (const auto& l : s.loads) loads.concentrated.push_back({m.point(l.at), l.force, {}});

  m.forces = std::make_shared<ForceModel>(topo, std::move(cables), std::move(loads));
  if (need_statics) {
    m.statics = inverse_statics_rest_lengths(*m.forces, m.q0, fixed);
    m.forces->set_rest_lengths(m.statics->mu);
  }
  return m;
}

}  // namespace tsg

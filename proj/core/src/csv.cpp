#include "tsg/csv.hpp"

namespace tsg {

namespace {

struct Precision {
  explicit Precision(std::ostream& os) : os_(os), old_(os.precision(17)) {}
  ~Precision() { os_.precision(old_); }
  std::ostream& os_;
  std::streamsize old_;
};

}  // namespace

void write_trajectory_csv(std::ostream& os, const ForceModel& model, const SimulationResult& r) {
  Precision p(os);
  const auto& T = model.topology();
  os << "t";
  for (int i = 0; i < T.n(); ++i) os << ",q" << i;
  for (int i : T.free_indices()) os << ",qdot" << i;
  for (const auto& c : model.cables()) os << ",l_" << c.spec.name << ",f_" << c.spec.name << ",slack_" << c.spec.name;
  os << '\n';
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    os << r.t[k];
    for (Eigen::Index i = 0; i < r.q[k].size(); ++i) os << ',' << r.q[k](i);
    for (Eigen::Index i = 0; i < r.qdot[k].size(); ++i) os << ',' << r.qdot[k](i);
    if (k < r.cables.size())
      for (const auto& c : r.cables[k]) os << ',' << c.l << ',' << c.f << ',' << (c.slack ? 1 : 0);
    os << '\n';
  }
}

void write_energy_csv(std::ostream& os, const ForceModel& model, const SimulationResult& r) {
  Precision p(os);
  os << "t,kinetic,gravity,cable,total\n";
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const double vg = model.gravity_potential(r.q[k]);
    const double vc = model.cable_potential(r.q[k], r.t[k]);
    const double kin = r.energy[k] - vg - vc;
    os << r.t[k] << ',' << kin << ',' << vg << ',' << vc << ',' << r.energy[k] << '\n';
  }
}

void write_slack_events_csv(std::ostream& os, const ForceModel& model, const SimulationResult& r) {
  Precision p(os);
  os << "t,cable,status\n";
  for (const auto& e : r.slack_events)
    os << e.t << ',' << model.cables()[static_cast<std::size_t>(e.cable)].spec.name << ','
       << (e.slack ? "slack" : "taut") << '\n';
}

void write_frequencies_csv(std::ostream& os, const ModeSet& ms) {
  Precision p(os);
  os << "mode,frequency_Hz,omega2\n";
  for (Eigen::Index i = 0; i < ms.frequencies.size(); ++i)
    os << i + 1 << ',' << ms.frequencies(i) << ',' << ms.omega2(i) << '\n';
}

void write_modes_csv(std::ostream& os, const LinearizedModel& lin, const ModeSet& ms) {
  Precision p(os);
  os << "mode,frequency_Hz";
  for (Eigen::Index i = 0; i < lin.N.rows(); ++i) os << ",dq" << i;
  os << '\n';
  for (Eigen::Index k = 0; k < ms.frequencies.size(); ++k) {
    const VectorXd dq = lin.N * ms.shapes_reduced.col(k);
    os << k + 1 << ',' << ms.frequencies(k);
    for (Eigen::Index i = 0; i < dq.size(); ++i) os << ',' << dq(i);
    os << '\n';
  }
}

void write_rest_lengths_csv(std::ostream& os, const ForceModel& model, const VectorXd& q, const RestLengthResult& r) {
  Precision p(os);
  const VectorXd zero = VectorXd::Zero(q.size());
  os << "cable,l,mu,gamma,f\n";
  for (int j = 0; j < model.num_cables(); ++j) {
    const double l = model.kinematics(j, q, zero).l;
    const auto jj = static_cast<Eigen::Index>(j);
    os << model.cables()[static_cast<std::size_t>(j)].spec.name << ',' << l << ',' << r.mu(jj) << ','
       << r.gamma(jj) << ',' << r.gamma(jj) * l << '\n';
  }
}

}  // namespace tsg

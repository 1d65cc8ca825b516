#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "tsg/forces.hpp"

namespace tsg {

struct SolverSettings {
  double h = 1e-3;
  int max_iter = 50;
  double tol = 1e-10;           // ‖Φ̌(q_{k+1})‖∞
  double momentum_tol = 1e-12;  // ‖first residual block‖∞, kg·m
  bool halve_on_chatter = true;
};

struct SystemState {
  double t = 0.0;
  VectorXd q;       // full coordinates
  VectorXd p;       // free momenta p̌
  VectorXd qdot;    // free velocities q̌̇
  VectorXd lambda;  // physical multipliers of the last step
};

struct StepInfo {
  int iterations = 0;
  double residual = 0.0;
  double constraint_norm = 0.0;
  int status_changes = 0;
  bool halved = false;
};

class Integrator {
 public:
  Integrator(const ForceModel& model, SolverSettings settings);

  const SolverSettings& settings() const { return settings_; }
  const ForceModel& model() const { return model_; }

  // qdot0 is the full velocity vector; prescribed entries are replaced by the motion velocities.
  SystemState initial_state(const VectorXd& q0, const VectorXd& qdot0, double t0 = 0.0) const;
  // ‖Ǎq̌̇ + ∂Φ̌/∂q̃ q̃̇‖∞ at a state; nonzero means inconsistent initial velocities
  double velocity_defect(const SystemState& s) const;

  StepInfo step(const SystemState& in, SystemState& out) const;

  // Residual (momentum block, constraint block) and Jacobian for unknowns x = (q̌_{k+1}, λ_s).
  void residual_and_jacobian(const SystemState& k, double h, const VectorXd& q_next, const VectorXd& lambda_s,
                             VectorXd& res, MatrixXd& jac) const;

  VectorXd full_velocity(const SystemState& s) const;
  double kinetic_energy(const SystemState& s) const;
  double energy(const SystemState& s) const;  // T + gravity + cable potentials

 private:
  bool advance(const SystemState& in, double h, SystemState& out, StepInfo& info) const;
  VectorXd recover_velocity(const VectorXd& p, double t) const;

  const ForceModel& model_;
  SolverSettings settings_;
  Eigen::LLT<MatrixXd> mass_llt_;
};

struct SlackEvent {
  double t;
  int cable;
  bool slack;  // new status
};

struct SimulationResult {
  std::vector<double> t;
  std::vector<VectorXd> q;
  std::vector<VectorXd> qdot;  // free velocities
  std::vector<double> energy;
  std::vector<std::vector<CableState>> cables;
  std::vector<SlackEvent> slack_events;
  double max_constraint = 0.0;
  long steps = 0;
  long halved_steps = 0;
  bool failed = false;
  bool stopped = false;
  std::string diagnostic;
};

struct SimulationOptions {
  int record_stride = 1;  // store every n-th step (the initial state is always stored)
  bool record_cables = true;
  std::function<bool(const SystemState&)> stop;  // early termination, e.g. collapse
  std::function<void(const SystemState&)> progress;  // called once per simulated second
};

SimulationResult simulate(const ForceModel& model, const VectorXd& q0, const VectorXd& qdot0, double duration,
                          const SolverSettings& settings, const SimulationOptions& options = {});

}  // namespace tsg

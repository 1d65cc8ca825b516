#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tsg/assembly.hpp"

namespace tsg {

struct CableSpec {
  std::string name;
  PointRef a, b;
  double stiffness = 0.0;    // κ, N/m
  double damping = 0.0;      // η, N·s/m
  double rest_length = 0.0;  // μ₀, m
  bool can_slack = true;     // false: linear spring that may push

  // Optional deployment: μ(t) = (1 − τ(t))μ₀ + τ(t)μ₁, τ linear 0 → 1 over [0, T_d].
  bool actuated = false;
  double rest_length_final = 0.0;
  double actuation_duration = 0.0;

  double rest_length_at(double t) const;
};

double actuation_coefficient(double t, double duration);

struct CableState {
  double l = 0.0;
  double ldot = 0.0;
  VectorXd lhat;
  double mu = 0.0;
  double f = 0.0;
  double gamma = 0.0;
  bool slack = false;
};

// (f, slack) from the linear stiffness / linear damping / slack law.
std::pair<double, bool> tension_magnitude(double kappa, double eta, double mu, double l, double ldot,
                                          bool can_slack = true);

struct Cable {
  CableSpec spec;
  MatrixXd J;   // m x n, l_j = J q
  MatrixXd JE;  // J restricted to free columns
  MatrixXd JP;  // J restricted to prescribed columns
};

struct PointLoad {
  PointRef at;
  VectorXd force;
  std::function<double(double)> scale;  // optional time factor
};

struct LoadSet {
  VectorXd gravity;  // acceleration vector; empty means none
  std::vector<PointLoad> concentrated;
};

class ForceModel {
 public:
  ForceModel(std::shared_ptr<const SystemTopology> topo, std::vector<CableSpec> cables, LoadSet loads);

  const SystemTopology& topology() const { return *topo_; }
  std::shared_ptr<const SystemTopology> topology_ptr() const { return topo_; }
  const std::vector<Cable>& cables() const { return cables_; }
  const LoadSet& loads() const { return loads_; }
  int num_cables() const { return static_cast<int>(cables_.size()); }
  void set_rest_lengths(const VectorXd& mu);
  VectorXd rest_lengths(double t = 0.0) const;
  void set_gravity(const VectorXd& g);

  // length, rate and direction only (no tension)
  CableState kinematics(int j, const VectorXd& q, const VectorXd& qdot) const;
  std::vector<CableState> cable_states(const VectorXd& q, const VectorXd& qdot, double t) const;

  // Q̌ = Σ −Ěᵀ J_jᵀ f_j l̂_j
  VectorXd tension_force(const VectorXd& q, const VectorXd& qdot, double t,
                         std::vector<CableState>* states = nullptr) const;
  // Ěᵀ ⊕_j (J_jᵀ l_j): ň x n_cables, so that Q̌ = −D γ
  MatrixXd density_matrix(const VectorXd& q) const;
  VectorXd tension_force_from_densities(const VectorXd& q, const VectorXd& gamma) const;

  VectorXd gravity_force() const;              // Ǧ, constant
  VectorXd external_force(double t) const;     // concentrated loads, F̌^ex
  VectorXd load_force(double t) const { return gravity_force() + external_force(t); }
  VectorXd total_force(const VectorXd& q, const VectorXd& qdot, double t,
                       std::vector<CableState>* states = nullptr) const;

  // exact partial derivatives of Q̌ with respect to q̌ and q̌̇ (slack cables give zero)
  void tension_force_derivatives(const VectorXd& q, const VectorXd& qdot, double t, MatrixXd& dQ_dq,
                                 MatrixXd& dQ_dqdot) const;
  // the β_j I + (κ_j − β_j) l̂ l̂ᵀ form, exact only when η = 0 or q̇ = 0
  void tension_force_derivatives_symmetric(const VectorXd& q, const VectorXd& qdot, double t,
                                            MatrixXd& dQ_dq, MatrixXd& dQ_dqdot) const;

  double gravity_potential(const VectorXd& q) const;
  double cable_potential(const VectorXd& q, double t) const;  // Σ ½κ(l − μ)² over loaded cables
  double kinetic_energy(const VectorXd& qdot) const;

 private:
  std::shared_ptr<const SystemTopology> topo_;
  std::vector<Cable> cables_;
  LoadSet loads_;
  VectorXd G_;
};

}  // namespace tsg

#pragma once

#include <map>
#include <vector>

#include "tsg/forces.hpp"

namespace tsg {

struct StaticResidual {
  VectorXd equation;    // −F̌ − Ǎᵀλ
  VectorXd constraint;  // Φ̌
};

StaticResidual static_residual(const ForceModel& model, const VectorXd& q, const VectorXd& lambda, double t = 0.0);

// Least-squares λ minimizing ‖F̌ + Ǎᵀλ‖ (equals −(ǍǍᵀ)⁻¹ǍF̌ for full-row-rank Ǎ).
VectorXd recover_multipliers(const MatrixXd& A, const VectorXd& F);

struct ForceDensityResult {
  VectorXd gamma;           // minimum-norm particular solution
  MatrixXd homogeneous;     // basis of the solution-set directions
  VectorXd lambda;
  int rank = 0;
  int solution_dim = 0;
  double residual = 0.0;    // ‖Ňᵀ(D γ − Ǧ − F̌^ex)‖
  std::vector<int> negative;  // cables that would need compression
};

ForceDensityResult inverse_statics_force_densities(const ForceModel& model, const VectorXd& q, double t = 0.0);

struct RestLengthResult {
  VectorXd mu;
  VectorXd gamma;
  VectorXd lambda;
  MatrixXd B;
  VectorXd b;
  int rank_B = 0;
  double residual = 0.0;
};

// B = Ňᵀ ⊕ Ěᵀ J_jᵀ κ_j l̂_j and b = B l − Ňᵀ(Ǧ + F̌^ex), so that equilibrium reads Bμ = b.
void rest_length_system(const ForceModel& model, const VectorXd& q, double t, MatrixXd& B, VectorXd& b);

// Solve Bμ = b with the entries of `fixed` (cable index -> μ) substituted as knowns.
RestLengthResult inverse_statics_rest_lengths(const ForceModel& model, const VectorXd& q,
                                              const std::map<int, double>& fixed, double t = 0.0,
                                              double consistency_tol = 1e-8);

struct EquilibriumResult {
  VectorXd q;
  VectorXd lambda;
  double residual = 0.0;
  int iterations = 0;
};

// Damped Newton refinement of (q̌, λ) from a nearby guess; rest lengths taken from the model.
EquilibriumResult refine_equilibrium(const ForceModel& model, const VectorXd& q_guess, double t = 0.0,
                                     double tol = 1e-10, int max_iter = 100);

}  // namespace tsg

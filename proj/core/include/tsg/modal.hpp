#pragma once

#include <vector>

#include "tsg/forces.hpp"

namespace tsg {

struct LinearizedModel {
  MatrixXd M, C, K;  // reduced mass, damping, stiffness
  MatrixXd N;        // nullspace basis used
  VectorXd q, lambda;
  double equilibrium_residual = 0.0;
};

struct ModeSet {
  VectorXd omega2;       // ascending
  VectorXd frequencies;  // Hz; negative entries mark imaginary frequencies (ω² < 0)
  MatrixXd shapes_reduced;            // mass-normalized ξ̂ columns
  std::vector<VectorXd> shapes_natural;  // q_e + Ě Ň ξ̂
  double asymmetry = 0.0;             // ‖K − Kᵀ‖ / ‖K‖
};

// Linearize about a static equilibrium at time t; λ recovered by least squares.
LinearizedModel linearize(const ForceModel& model, const VectorXd& q_e, double t = 0.0, double tol = 1e-8);

ModeSet solve_modes(const LinearizedModel& lin, const SystemTopology& topo);

// Signed frequency in Hz from ω².
double signed_frequency(double omega2);

// Frequencies with near-duplicates (relative gap < rel_tol) merged into one entry.
std::vector<double> distinct_frequencies(const VectorXd& freqs, double rel_tol = 1e-6);

}  // namespace tsg

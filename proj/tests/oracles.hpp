#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <fftw3.h>

#include "tsg/scenario.hpp"

namespace oracle {

// Bar pinned at one end carrying a rigid body hinged at the bar tip; both swing in a vertical plane.
// Angles are measured from the horizontal, counter-clockwise.
struct CompoundPendulum {
  double m1, L1, I1c;  // bar mass, length, central moment
  double m2, c, I2c;   // body mass, hinge-to-centroid distance, central polar moment
  double g;

  using State = std::array<double, 4>;  // θ1, θ2, ω1, ω2

  void operator()(const State& x, State& dx, double) const {
    const double d = x[0] - x[1];
    const double a11 = I1c + m1 * L1 * L1 / 4.0 + m2 * L1 * L1;
    const double a22 = I2c + m2 * c * c;
    const double a12 = m2 * L1 * c * std::cos(d);
    const double r1 = -m2 * L1 * c * std::sin(d) * x[3] * x[3] - g * (m1 * L1 / 2.0 + m2 * L1) * std::cos(x[0]);
    const double r2 = m2 * L1 * c * std::sin(d) * x[2] * x[2] - g * m2 * c * std::cos(x[1]);
    const double det = a11 * a22 - a12 * a12;
    dx[0] = x[2];
    dx[1] = x[3];
    dx[2] = (a22 * r1 - a12 * r2) / det;
    dx[3] = (a11 * r2 - a12 * r1) / det;
  }

  double energy(const State& x) const {
    const double d = x[0] - x[1];
    const double a11 = I1c + m1 * L1 * L1 / 4.0 + m2 * L1 * L1;
    const double a22 = I2c + m2 * c * c;
    const double t = 0.5 * a11 * x[2] * x[2] + 0.5 * a22 * x[3] * x[3] + m2 * L1 * c * std::cos(d) * x[2] * x[3];
    return t + g * ((m1 * L1 / 2.0 + m2 * L1) * std::sin(x[0]) + m2 * c * std::sin(x[1]));
  }

  // Adaptive 5th-order Dormand-Prince with the step capped at max_dt; samples at the given times.
  std::vector<State> integrate(State x0, const std::vector<double>& times, double max_dt = 1e-5) const {
    namespace odeint = boost::numeric::odeint;
    std::vector<State> out;
    auto stepper = odeint::make_controlled(1e-12, 1e-12, max_dt, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, *this, x0, times.begin(), times.end(), max_dt,
                            [&](const State& x, double) { out.push_back(x); });
    return out;
  }
};

// Parameters of the built-in double pendulum in the oracle's terms.
inline CompoundPendulum example1_pendulum(double g) {
  const double m1 = 0.026934977798, L1 = 0.07071067811865477, I1c = 1.1222907415833337e-5;
  const double m2 = 0.1271425597, hyp = 0.1, hgt = 0.05;
  const double c = 2.0 * hgt / 3.0;
  // polar moment of a uniform triangle about its centroid: m/12 Σ|v_k|²
  const double sum_sq = c * c + 2.0 * ((hgt - c) * (hgt - c) + 0.25 * hyp * hyp);
  return CompoundPendulum{m1, L1, I1c, m2, c, m2 / 12.0 * sum_sq, g};
}

// Bar and triangle angles from the built-in example1 coordinates (O, A, u, v).
inline std::array<double, 2> example1_angles(const Eigen::VectorXd& q) {
  const double ax = q(2), ay = q(3);
  const double sx = q(4) + q(6), sy = q(5) + q(7);
  return {std::atan2(ay, ax), std::atan2(sy, sx)};
}

inline double angle_diff(double a, double b) { return std::remainder(a - b, 2.0 * std::numbers::pi); }

// Frequency (Hz) of the dominant spectral peak of a uniformly sampled signal, excluding DC.
// Hann window, zero padding to `pad` × length, parabolic interpolation on the log magnitude.
inline double fft_peak(const std::vector<double>& x, double dt, int pad = 16) {
  const int n = static_cast<int>(x.size());
  const int N = n * pad;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  std::vector<double> in(static_cast<std::size_t>(N), 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    in[static_cast<std::size_t>(i)] = w * (x[static_cast<std::size_t>(i)] - mean);
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(N / 2 + 1));
  fftw_plan p = fftw_plan_dft_r2c_1d(N, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
  std::size_t k = 1;
  for (std::size_t i = 2; i + 1 < out.size(); ++i)
    if (std::abs(out[i]) > std::abs(out[k])) k = i;
  const double a = std::log(std::abs(out[k - 1])), b = std::log(std::abs(out[k])), c = std::log(std::abs(out[k + 1]));
  const double shift = 0.5 * (a - c) / (a - 2.0 * b + c);
  return (static_cast<double>(k) + shift) / (N * dt);
}

}  // namespace oracle

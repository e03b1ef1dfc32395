#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "geoatt/feedback.hpp"
#include "geoatt/types.hpp"

namespace geoatt {

enum class Method {
  lie_rk4,      // Runge-Kutta-Munthe-Kaas: stages in the Lie algebra, update R <- exp(dt*Theta)*R
  rk4_project,  // classical RK4 in ambient space, then polar reprojection onto SO(n)
};

Method method_from_string(const std::string& s);
const char* method_name(Method m);

/// A fixed-step full-attitude run. All fields beyond the first six are
/// artifact plumbing with defaults.
struct SimulationSpec {
  ClosedLoopConfig cfg;
  RotationMatrix R0;
  double dt = 1e-3;
  double t_max = 10.0;
  double stop_V = 1e-9;
  Method method = Method::lie_rk4;
  int record_stride = 1;  // store every record_stride-th step (endpoints always stored)
};

/// Time-stamped rotations with the derived scalar channels used by the
/// figure emitters and the stability checks. Channels are sampled at the
/// recorded steps; the diagnostics below them are accumulated over every
/// integration step regardless of stride.
struct Trajectory {
  int n = 0;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> states;
  std::vector<double> V;
  std::vector<double> Vdot;
  std::vector<double> normU_sq;
  std::vector<double> ortho_residual;
  Eigen::MatrixXd err_axis;   // sample x axis: arccos(R_ii)
  Eigen::MatrixXd dist_axis;  // sample x axis: integral of ||Rdot e_i|| (trapezoid)

  double effort_integral = 0.0;      // integral of ||U||_F^2 dt over the whole run
  double max_V_step_increase = 0.0;  // max over steps of V(t_{j+1}) - V(t_j)
  double max_ortho_residual = 0.0;   // max over steps of ||R^T R - I||_F
  bool converged = false;            // stop_V reached before t_max
  double final_V = 0.0;

  std::size_t samples() const { return times.size(); }
};

/// One integration step of Rdot = U(R) R.
RotationMatrix step(const RotationMatrix& R, const ClosedLoopConfig& cfg, double dt, Method method);

/// Integrates until t_max or V < stop_V, filling channels and diagnostics.
Trajectory simulate(const SimulationSpec& spec);

struct SphereTrajectory {
  int n = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> geodesic_error;   // arccos <e1, r>
  std::vector<double> plane_deviation;  // component outside span{e1, r0}
  double traveled = 0.0;                // integral of ||rdot||
  bool converged = false;

  std::size_t samples() const { return times.size(); }
};

/// Integrates rdot = e1 - <e1, r> r on the sphere. Starting within 1e-9 of
/// the antipode -e1 logs a warning (the flow is still defined there).
SphereTrajectory simulate_reduced(const UnitVector& r0, double dt, double t_max,
                                  double stop_error = 0.0);

}  // namespace geoatt

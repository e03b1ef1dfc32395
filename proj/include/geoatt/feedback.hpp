#pragma once

#include <Eigen/Dense>

#include "geoatt/types.hpp"

namespace geoatt {

/// Everything a closed-loop evaluation needs besides the state: the gain
/// projection pair (which carries k).
struct ClosedLoopConfig {
  ProjectionPair proj;

  int dim() const { return proj.dim(); }
};

namespace detail {

/// Feedback law on SO(n), assembled from the projection gains and explicitly
/// anti-symmetrized to kill floating-point asymmetry before integration.
template <class Mat>
Mat control_impl(const Mat& R, const Mat& P, const Mat& Q, double k) {
  const Mat Rt = R.transpose();
  Mat A = P * Rt - R * P + k * (R * (Q * ((Rt - R) * Q)) * Rt);
  return 0.5 * (A - A.transpose()).eval();
}

}  // namespace detail

/// U(R) = P R^T - R P + k R Q (R^T - R) Q R^T. Skew to 1e-12 by construction.
SkewMatrix control_U(const RotationMatrix& R, const ClosedLoopConfig& cfg);

/// Right-hand side of the closed loop, P - R P R + k R Q (R^T - R) Q,
/// computed directly (not as U*R; the two routes agree to 1e-12 and are
/// cross-checked in tests).
Eigen::MatrixXd closed_loop_rhs(const RotationMatrix& R, const ClosedLoopConfig& cfg);

/// Reduced dynamics on the sphere: rdot = u - <u, r> r, the tangential part
/// of the constant field u at r.
Eigen::VectorXd reduced_rhs(const UnitVector& r, const UnitVector& u);

struct ControlEffort {
  double normU_sq;  // ||U||_F^2
  double Vdot;      // derivative of V = trace(I - R) along the closed loop
};

/// ||U||_F^2 together with Vdot evaluated through its trace expansion
///   -||P||_F^2 + <P, R^2> - k ||QRQ||_F^2 + k <Q R^T Q, Q R Q>.
/// Vdot <= 0 everywhere. The exact relation between the two is
///   normU_sq = -2 Vdot + 2 tr(RQRP) - 2k(1-k) X,
/// X = ||QRQ||_F^2 - <QR^TQ, QRQ> >= 0; the simpler normU_sq = -2 Vdot holds
/// only when P = I, or P = 0 at k = 1 (the mixed P/Q sector carries the
/// tr(RQRP) term and the Q sector scales with k^2 against k).
ControlEffort control_effort(const RotationMatrix& R, const ClosedLoopConfig& cfg);

}  // namespace geoatt

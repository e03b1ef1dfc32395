#include "geoatt/feedback.hpp"

namespace geoatt {

namespace {
void check_dims(const RotationMatrix& R, const ClosedLoopConfig& cfg) {
  if (R.dim() != cfg.dim()) {
    raise(Errc::dimension_mismatch, "state and gain dimensions differ");
  }
}
}  // namespace

SkewMatrix control_U(const RotationMatrix& R, const ClosedLoopConfig& cfg) {
  check_dims(R, cfg);
  return SkewMatrix(
      detail::control_impl<Eigen::MatrixXd>(R.matrix(), cfg.proj.P(), cfg.proj.Q(), cfg.proj.k()));
}

Eigen::MatrixXd closed_loop_rhs(const RotationMatrix& R, const ClosedLoopConfig& cfg) {
  check_dims(R, cfg);
  const Eigen::MatrixXd& Rm = R.matrix();
  const Eigen::MatrixXd& P = cfg.proj.P();
  const Eigen::MatrixXd& Q = cfg.proj.Q();
  return P - Rm * P * Rm + cfg.proj.k() * (Rm * Q * (Rm.transpose() - Rm) * Q);
}

Eigen::VectorXd reduced_rhs(const UnitVector& r, const UnitVector& u) {
  if (r.dim() != u.dim()) raise(Errc::dimension_mismatch, "r and u dimensions differ");
  const Eigen::VectorXd& rv = r.vector();
  const Eigen::VectorXd& uv = u.vector();
  return uv - uv.dot(rv) * rv;
}

ControlEffort control_effort(const RotationMatrix& R, const ClosedLoopConfig& cfg) {
  check_dims(R, cfg);
  const Eigen::MatrixXd& Rm = R.matrix();
  const Eigen::MatrixXd& P = cfg.proj.P();
  const Eigen::MatrixXd& Q = cfg.proj.Q();
  const double k = cfg.proj.k();

  const Eigen::MatrixXd U =
      detail::control_impl<Eigen::MatrixXd>(Rm, P, Q, k);
  const Eigen::MatrixXd QRQ = Q * Rm * Q;
  const Eigen::MatrixXd QRtQ = Q * Rm.transpose() * Q;
  const double Vdot = -P.squaredNorm() + (P * Rm * Rm).trace() - k * QRQ.squaredNorm() +
                      k * (QRtQ.transpose() * QRQ).trace();
  return {U.squaredNorm(), Vdot};
}

}  // namespace geoatt

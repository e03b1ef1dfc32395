#include "geoatt/integrator.hpp"

#include <cmath>
#include <iostream>

#include "geoatt/linalg.hpp"

namespace geoatt {

Method method_from_string(const std::string& s) {
  if (s == "lie_rk4") return Method::lie_rk4;
  if (s == "rk4_project") return Method::rk4_project;
  raise(Errc::config_error, "unknown method '" + s + "' (expected lie_rk4 | rk4_project)");
}

const char* method_name(Method m) {
  return m == Method::lie_rk4 ? "lie_rk4" : "rk4_project";
}

namespace {

template <class Mat>
Mat exp_dispatch(const Mat& S) {
  if constexpr (Mat::RowsAtCompileTime == 3) {
    return detail::expm_so3(S);
  } else {
    return expm(S);
  }
}

template <class Mat>
Mat polar_project(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M.transpose() * M);
  const auto& d = es.eigenvalues();
  const auto& W = es.eigenvectors();
  Mat inv_sqrt = W * d.cwiseMax(1e-300).cwiseInverse().cwiseSqrt().asDiagonal() * W.transpose();
  return M * inv_sqrt;
}

template <class Mat>
struct Loop {
  Mat P, Q;
  double k;

  Mat U(const Mat& R) const { return detail::control_impl<Mat>(R, P, Q, k); }

  Mat commutator(const Mat& A, const Mat& B) const { return A * B - B * A; }

  // Truncated inverse differential of exp, enough terms for order 4:
  // A - [Om,A]/2 + [Om,[Om,A]]/12.
  Mat dexpinv(const Mat& Om, const Mat& A) const {
    const Mat c1 = commutator(Om, A);
    return A - 0.5 * c1 + (1.0 / 12.0) * commutator(Om, c1);
  }

  // Runge-Kutta-Munthe-Kaas step with the classical tableau; k1 is U(R),
  // passed in so the caller can reuse it for the channel computations.
  Mat step_lie(const Mat& R, const Mat& k1, double dt) const {
    const Mat Om2 = (0.5 * dt) * k1;
    const Mat k2 = dexpinv(Om2, U(exp_dispatch<Mat>(Om2) * R));
    const Mat Om3 = (0.5 * dt) * k2;
    const Mat k3 = dexpinv(Om3, U(exp_dispatch<Mat>(Om3) * R));
    const Mat Om4 = dt * k3;
    const Mat k4 = dexpinv(Om4, U(exp_dispatch<Mat>(Om4) * R));
    const Mat Th = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return exp_dispatch<Mat>(Th) * R;
  }

  // Classical RK4 on the ambient right-hand side F(M) = U(M) M, followed by
  // polar reprojection onto the manifold.
  Mat step_project(const Mat& R, const Mat& k1, double dt) const {
    const Mat f1 = k1 * R;
    const Mat R2 = R + (0.5 * dt) * f1;
    const Mat f2 = U(R2) * R2;
    const Mat R3 = R + (0.5 * dt) * f2;
    const Mat f3 = U(R3) * R3;
    const Mat R4 = R + dt * f3;
    const Mat f4 = U(R4) * R4;
    return polar_project<Mat>((R + (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)).eval());
  }

  Mat advance(const Mat& R, const Mat& k1, double dt, Method m) const {
    Mat next = (m == Method::lie_rk4) ? step_lie(R, k1, dt) : step_project(R, k1, dt);
    if (!next.allFinite()) raise(Errc::step_rejected, "non-finite state after step");
    return next;
  }
};

// Vdot through the trace expansion; kept in one place so simulate() and
// control_effort() agree by construction of the same formula.
template <class Mat>
double vdot_expansion(const Mat& R, const Mat& P, const Mat& Q, double k) {
  const Mat QRQ = Q * R * Q;
  const Mat QRtQ = Q * R.transpose() * Q;
  return -P.squaredNorm() + (P * R * R).trace() - k * QRQ.squaredNorm() +
         k * (QRtQ.transpose() * QRQ).trace();
}

template <class Mat>
Trajectory run_simulation(const SimulationSpec& spec) {
  const int n = spec.R0.dim();
  Loop<Mat> loop{spec.cfg.proj.P(), spec.cfg.proj.Q(), spec.cfg.proj.k()};

  Trajectory traj;
  traj.n = n;
  const auto total_steps = static_cast<std::size_t>(std::llround(spec.t_max / spec.dt));
  const int stride = std::max(1, spec.record_stride);
  const std::size_t reserve = total_steps / stride + 2;
  traj.times.reserve(reserve);
  traj.states.reserve(reserve);
  std::vector<Eigen::VectorXd> err_rows, dist_rows;
  err_rows.reserve(reserve);
  dist_rows.reserve(reserve);

  auto ortho_resid = [n](const Mat& M) {
    return (M.transpose() * M - Mat::Identity(n, n)).norm();
  };

  Mat R = spec.R0.matrix();
  Mat Ucur = loop.U(R);
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd speed(n), speed_next(n);
  {
    const Mat Rdot = Ucur * R;
    for (int i = 0; i < n; ++i) speed(i) = Rdot.col(i).norm();
  }
  double effort_cur = Ucur.squaredNorm();
  double V = n - R.trace();

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(R);
    traj.V.push_back(V);
    traj.Vdot.push_back(vdot_expansion<Mat>(R, loop.P, loop.Q, loop.k));
    traj.normU_sq.push_back(Ucur.squaredNorm());
    traj.ortho_residual.push_back(ortho_resid(R));
    Eigen::VectorXd err(n);
    for (int i = 0; i < n; ++i) err(i) = std::acos(std::clamp(R(i, i), -1.0, 1.0));
    err_rows.push_back(err);
    dist_rows.push_back(dist);
  };

  record(0.0);
  traj.max_ortho_residual = traj.ortho_residual.back();

  std::size_t step_index = 0;
  while (V >= spec.stop_V && step_index < total_steps) {
    R = loop.advance(R, Ucur, spec.dt, spec.method);
    ++step_index;

    const Mat Unext = loop.U(R);
    const Mat Rdot = Unext * R;
    for (int i = 0; i < n; ++i) speed_next(i) = Rdot.col(i).norm();
    const double effort_next = Unext.squaredNorm();
    dist += (0.5 * spec.dt) * (speed + speed_next);
    traj.effort_integral += (0.5 * spec.dt) * (effort_cur + effort_next);
    speed.swap(speed_next);
    effort_cur = effort_next;
    Ucur = Unext;

    const double V_next = n - R.trace();
    traj.max_V_step_increase = std::max(traj.max_V_step_increase, V_next - V);
    V = V_next;
    traj.max_ortho_residual = std::max(traj.max_ortho_residual, ortho_resid(R));

    const bool stopping = (V < spec.stop_V) || (step_index == total_steps);
    if (step_index % static_cast<std::size_t>(stride) == 0 || stopping) {
      record(static_cast<double>(step_index) * spec.dt);
    }
  }

  traj.converged = V < spec.stop_V;
  traj.final_V = V;
  const auto m = static_cast<Eigen::Index>(err_rows.size());
  traj.err_axis.resize(m, n);
  traj.dist_axis.resize(m, n);
  for (Eigen::Index r = 0; r < m; ++r) {
    traj.err_axis.row(r) = err_rows[r].transpose();
    traj.dist_axis.row(r) = dist_rows[r].transpose();
  }
  return traj;
}

}  // namespace

RotationMatrix step(const RotationMatrix& R, const ClosedLoopConfig& cfg, double dt,
                    Method method) {
  if (R.dim() != cfg.dim()) raise(Errc::dimension_mismatch, "state and gain dimensions differ");
  if (!(dt > 0.0)) raise(Errc::domain_error, "dt must be positive");
  if (R.dim() == 3) {
    Loop<Eigen::Matrix3d> loop{cfg.proj.P(), cfg.proj.Q(), cfg.proj.k()};
    const Eigen::Matrix3d Rm = R.matrix();
    return RotationMatrix::unchecked(loop.advance(Rm, loop.U(Rm), dt, method));
  }
  Loop<Eigen::MatrixXd> loop{cfg.proj.P(), cfg.proj.Q(), cfg.proj.k()};
  return RotationMatrix::unchecked(loop.advance(R.matrix(), loop.U(R.matrix()), dt, method));
}

Trajectory simulate(const SimulationSpec& spec) {
  if (spec.R0.dim() != spec.cfg.dim()) {
    raise(Errc::dimension_mismatch, "R0 and gain dimensions differ");
  }
  if (!(spec.dt > 0.0) || !(spec.t_max > 0.0) || spec.dt > spec.t_max) {
    raise(Errc::config_error, "need 0 < dt <= t_max");
  }
  if (spec.stop_V < 0.0) raise(Errc::config_error, "stop_V must be non-negative");
  // measure-zero set where convergence fails; still a well-defined flow
  if (in_negative_spectrum_set(spec.R0, 1e-12)) {
    std::cerr << "[geoatt] warning: initial state has -1 in its spectrum within 1e-12; "
                 "convergence to the identity is not expected\n";
  }
  if (spec.R0.dim() == 3) return run_simulation<Eigen::Matrix3d>(spec);
  return run_simulation<Eigen::MatrixXd>(spec);
}

SphereTrajectory simulate_reduced(const UnitVector& r0, double dt, double t_max,
                                  double stop_error) {
  const int n = r0.dim();
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
  if ((r0.vector() + e1).norm() <= 1e-9) {
    std::cerr << "[geoatt] warning: reduced start within 1e-9 of the antipodal "
                 "equilibrium -e1; expect no motion\n";
  }

  auto rhs = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return e1 - e1.dot(r) * r; };

  // span{e1, r0} basis for the deviation channel
  Eigen::VectorXd w = r0.vector() - e1.dot(r0.vector()) * e1;
  const bool have_plane = w.norm() > 1e-12;
  if (have_plane) w.normalize();

  SphereTrajectory traj;
  traj.n = n;
  const auto total_steps = static_cast<std::size_t>(std::llround(t_max / dt));
  traj.times.reserve(total_steps + 1);

  Eigen::VectorXd r = r0.vector();
  double speed = rhs(r).norm();

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(r);
    traj.geodesic_error.push_back(std::acos(std::clamp(e1.dot(r), -1.0, 1.0)));
    Eigen::VectorXd out = r - e1.dot(r) * e1;
    if (have_plane) out -= w.dot(r) * w;
    traj.plane_deviation.push_back(out.norm());
  };
  record(0.0);

  for (std::size_t j = 0; j < total_steps; ++j) {
    const Eigen::VectorXd f1 = rhs(r);
    const Eigen::VectorXd f2 = rhs(r + 0.5 * dt * f1);
    const Eigen::VectorXd f3 = rhs(r + 0.5 * dt * f2);
    const Eigen::VectorXd f4 = rhs(r + dt * f3);
    r += (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    r.normalize();
    const double speed_next = rhs(r).norm();
    traj.traveled += 0.5 * dt * (speed + speed_next);
    speed = speed_next;
    record(static_cast<double>(j + 1) * dt);
    if (stop_error > 0.0 && traj.geodesic_error.back() < stop_error) break;
  }
  traj.converged = traj.geodesic_error.back() < std::max(stop_error, 1e-6);
  return traj;
}

}  // namespace geoatt

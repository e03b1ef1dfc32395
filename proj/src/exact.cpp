#include "geoatt/exact.hpp"

#include <cmath>

#include "geoatt/linalg.hpp"

namespace geoatt {

namespace {

// log(cosh(x)) without overflow; exact limits at +-inf handled by callers.
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

std::complex<double> sech(std::complex<double> z) { return 1.0 / std::cosh(z); }

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& x) {
  Eigen::Matrix3d S;
  S << 0, -x.z(), x.y(), x.z(), 0, -x.x(), -x.y(), x.x(), 0;
  return S;
}

// Rotation whose first row is the given unit axis; maps axis -> e1 under
// conjugation of the frame.
Eigen::Matrix3d alignment_to_e1(const Eigen::Vector3d& axis) {
  const Eigen::Vector3d e = axis.normalized();
  int least = 0;
  e.cwiseAbs().minCoeff(&least);
  Eigen::Vector3d u = Eigen::Vector3d::Unit(least) - e(least) * e;
  u.normalize();
  const Eigen::Vector3d v = e.cross(u);
  Eigen::Matrix3d T;
  T.row(0) = e.transpose();
  T.row(1) = u.transpose();
  T.row(2) = v.transpose();
  return T;
}

}  // namespace

So3Blocks So3Blocks::split(const Eigen::Matrix3d& R) {
  So3Blocks b;
  b.r11 = R(0, 0);
  b.r12 = R.block<1, 2>(0, 1);
  b.r21 = R.block<2, 1>(1, 0);
  b.R22 = R.block<2, 2>(1, 1);
  return b;
}

Eigen::Matrix3d So3Blocks::assemble() const {
  Eigen::Matrix3d R;
  R(0, 0) = r11;
  R.block<1, 2>(0, 1) = r12;
  R.block<2, 1>(1, 0) = r21;
  R.block<2, 2>(1, 1) = R22;
  return R;
}

Eigen::MatrixXd exact_H(double t, const ProjectionPair& proj, const Eigen::MatrixXd& H0) {
  if (H0.rows() != proj.dim() || H0.cols() != proj.dim()) {
    raise(Errc::dimension_mismatch, "H0 and projection dimensions differ");
  }
  // X = sinh(Pt) + cosh(Pt) H0 and Y = cosh(Pt) + sinh(Pt) H0, assembled in
  // exponential-split form
  //   X = Q H0 + P [e^t (I + H0) - e^{-t} (I - H0)] / 2,
  //   Y = Q    + P [e^t (I + H0) + e^{-t} (I - H0)] / 2,
  // which avoids the cosh - sinh cancellation near the antipodal equilibrium
  // H0 = -P at large t.
  const int n = proj.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Ep = std::exp(t) * (I + H0);
  const Eigen::MatrixXd Em = std::exp(-t) * (I - H0);
  const Eigen::MatrixXd X = proj.Q() * H0 + 0.5 * (proj.P() * (Ep - Em));
  const Eigen::MatrixXd Y = proj.Q() + 0.5 * (proj.P() * (Ep + Em));
  // H = X Y^{-1}, via Y^T H^T = X^T
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Y.transpose());
  if (!lu.isInvertible()) {
    raise(Errc::singular_y, "cosh(Pt) + sinh(Pt) H0 numerically singular at t = " +
                                std::to_string(t));
  }
  return lu.solve(X.transpose()).transpose();
}

namespace {

// r11_0 lives in (-1, 1]; reject everything else but absorb roundoff
// overshoot above 1.
double checked_r11_0(double r11_0) {
  if (r11_0 <= -1.0 + 1e-12) {
    raise(Errc::domain_error, "r11_0 <= -1: initial condition has -1 in the spectrum");
  }
  if (r11_0 > 1.0 + 1e-9) {
    raise(Errc::domain_error, "r11_0 > 1 is outside the rotation range");
  }
  return std::min(r11_0, 1.0);
}

}  // namespace

double exact_r11(double t, double r11_0) {
  r11_0 = checked_r11_0(r11_0);
  if (r11_0 == 1.0) return 1.0;
  return std::tanh(t + std::atanh(r11_0));
}

Eigen::Vector2d exact_r21(double t, const Eigen::Vector2d& r21_0, double r11_0) {
  r11_0 = checked_r11_0(r11_0);
  const double denom = 1.0 + std::tanh(t) * r11_0;
  return (1.0 / (std::cosh(t) * denom)) * r21_0;
}

ExactSo3Params ExactSo3Params::from_initial(const Eigen::Matrix3d& R0_aligned, double k) {
  validate_rotation(R0_aligned, 1e-8);
  if (!(k > 0.0)) raise(Errc::domain_error, "gain k must be positive");
  const So3Blocks b = So3Blocks::split(R0_aligned);
  if (b.r11 <= -1.0 + 1e-12) {
    raise(Errc::domain_error, "r11_0 <= -1: initial condition has -1 in the spectrum");
  }

  ExactSo3Params p;
  p.r11_0 = b.r11;
  p.k = k;
  p.trR22_0 = b.R22.trace();
  p.trR22S_0 = (b.R22 * kSpin2).trace();
  p.c = complex_atanh({b.r11, 0.0}).real();

  // |trR22_0| <= 1 + r11_0 on SO(3); clamp roundoff overshoot before atanh.
  const double arg = std::clamp(p.trR22_0 / (1.0 + p.r11_0), -1.0, 1.0);
  p.phi0 = complex_atanh({arg, 0.0}).real();
  p.f = std::complex<double>(p.phi0, 0.0) +
        std::complex<double>(k * std::log(1.0 - p.r11_0), 0.0);

  if (std::isfinite(p.phi0) && std::abs(p.phi0) < 300.0 && std::isfinite(p.c)) {
    p.g = p.trR22S_0 * std::cosh(p.c) * std::cosh(p.phi0);
  } else {
    // trR22S_0 = 0 forces the S-trace to vanish identically; g only ever
    // multiplies that branch.
    p.g = 0.0;
  }
  return p;
}

TracePair exact_traces(double t, const ExactSo3Params& params) {
  const double x0 = params.r11_0;
  const double k = params.k;

  if (x0 >= 1.0) {
    // Fixed first column: the remaining 2x2 block rotates under the k-term
    // alone, with phase rate 2k.
    if (!std::isfinite(params.phi0)) {
      return {std::copysign(2.0, params.trR22_0), 0.0};
    }
    const double phi = params.phi0 + 2.0 * k * t;
    const double tr = 2.0 * std::tanh(phi);
    const double trS =
        params.trR22S_0 * std::exp(log_cosh(params.phi0) - log_cosh(phi));
    return {tr, trS};
  }

  const double x = exact_r11(t, x0);
  if (!std::isfinite(params.phi0)) {
    // Vanishing initial S-trace: tanh saturates at +-1 for all t.
    const double sign = params.phi0 > 0 ? 1.0 : -1.0;
    return {sign * (1.0 + x), 0.0};
  }

  const std::complex<double> w =
      params.f - std::complex<double>(k, 0.0) * std::log(std::complex<double>(1.0 - x, 0.0));
  const std::complex<double> tr_c = std::tanh(w) * (1.0 + x);
  const std::complex<double> trS_c =
      params.g * std::exp(t) * sech({t + params.c, 0.0}) * sech(w);

  const double resid = std::max(std::abs(tr_c.imag()), std::abs(trS_c.imag()));
  if (resid > 1e-6) {
    raise(Errc::reality_error,
          "imaginary residue " + std::to_string(resid) + " in the trace formulas");
  }
  return {tr_c.real(), trS_c.real()};
}

RotationMatrix reconstruct_R(double t, const ExactSo3Params& params, const FirstColumn& col) {
  const TracePair tr = exact_traces(t, params);

  Eigen::Vector3d r1(col.r11, col.r21(0), col.r21(1));
  const Eigen::Matrix3d Sx = cross_matrix(r1);

  // Rows: <r1, c2> = 0; r1 x c2 - c3 = 0; the two trace constraints.
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
  A.block<1, 3>(0, 0) = r1.transpose();
  A.block<3, 3>(1, 0) = Sx;
  A.block<3, 3>(1, 3) = -Eigen::Matrix3d::Identity();
  A(4, 1) = 1.0;
  A(4, 5) = 1.0;
  A(5, 2) = -1.0;
  A(5, 4) = 1.0;
  b(4) = tr.trR22;
  b(5) = tr.trR22S;

  // Normal equations solved through the Schur complement of the lower-right
  // block B22 = I + e2 e2^T + e3 e3^T (inverse diag(1, 1/2, 1/2)).
  const Eigen::Matrix<double, 6, 6> B = A.transpose() * A;
  const Eigen::Matrix<double, 6, 1> c = A.transpose() * b;
  const Eigen::Matrix3d B11 = B.block<3, 3>(0, 0);
  const Eigen::Matrix3d B12 = B.block<3, 3>(0, 3);
  const Eigen::Matrix3d B21 = B.block<3, 3>(3, 0);
  const Eigen::Vector3d B22inv_diag(1.0, 0.5, 0.5);
  const Eigen::Matrix3d schur = B11 - B12 * B22inv_diag.asDiagonal() * B21;

  Eigen::LLT<Eigen::Matrix3d> llt(schur);
  if (llt.info() != Eigen::Success) {
    raise(Errc::singular_system, "Schur complement not positive definite");
  }
  const Eigen::Vector3d rhs1 =
      c.head<3>() - B12 * (B22inv_diag.asDiagonal() * c.tail<3>());
  const Eigen::Vector3d c2 = llt.solve(rhs1);
  const Eigen::Vector3d c3 = B22inv_diag.asDiagonal() * (c.tail<3>() - B21 * c2);

  Eigen::Matrix3d R;
  R.col(0) = r1;
  R.col(1) = c2;
  R.col(2) = c3;
  return validate_rotation(R, 1e-8);
}

BlockResiduals verify_block_relations(const RotationMatrix& R) {
  if (R.dim() != 3) raise(Errc::dimension_mismatch, "block relations are specific to SO(3)");
  const So3Blocks b = So3Blocks::split(R.matrix());
  const Eigen::Matrix2d& S = kSpin2;

  BlockResiduals res;
  res.outer_product = (b.r21 * b.r12 - (b.r11 * b.R22 + S * b.R22 * S)).norm();
  const double tr = b.R22.trace();
  const double trS = (b.R22 * S).trace();
  res.pythagorean = std::abs(tr * tr + trS * trS - (1.0 + b.r11) * (1.0 + b.r11));
  res.block_skew =
      (b.R22 * (b.R22.transpose() - b.R22) - trS * (b.R22 * S)).norm();
  return res;
}

ExactSo3Solution::ExactSo3Solution(const RotationMatrix& R0, const ProjectionPair& proj)
    : rank_(proj.rank()), k_(proj.k()) {
  if (R0.dim() != 3 || proj.dim() != 3) {
    raise(Errc::dimension_mismatch, "exact solutions are specific to SO(3)");
  }
  if (in_negative_spectrum_set(R0, 1e-9)) {
    raise(Errc::domain_error,
          "-1 in the spectrum of R0: closed forms undefined on this measure-zero set");
  }

  const Eigen::Matrix3d R0m = R0.matrix();
  switch (rank_) {
    case 0:
    case 3: {
      // Rdot = s (I - R^2) with s = k (rank 0) or 1 (rank 3); closed form for
      // H = R with the identity projection.
      H0_ = R0m;
      hproj_ = std::make_unique<ProjectionPair>(Eigen::MatrixXd::Identity(3, 3), k_);
      break;
    }
    case 1: {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(proj.P());
      const Eigen::Vector3d axis = es.eigenvectors().col(2);  // eigenvalue 1
      T_ = alignment_to_e1(axis);
      R0_aligned_ = T_ * R0m * T_.transpose();
      params_ = ExactSo3Params::from_initial(R0_aligned_, k_);
      r21_0_ = R0_aligned_.block<2, 1>(1, 0);
      break;
    }
    case 2: {
      // The complement axis spans range(Q); in aligned coordinates the k-term
      // vanishes and H = R P obeys the closed form with P = diag(0, 1, 1).
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(proj.P());
      const Eigen::Vector3d axis = es.eigenvectors().col(0);  // eigenvalue 0
      T_ = alignment_to_e1(axis);
      R0_aligned_ = T_ * R0m * T_.transpose();
      Eigen::MatrixXd Pa = Eigen::MatrixXd::Identity(3, 3);
      Pa(0, 0) = 0.0;
      hproj_ = std::make_unique<ProjectionPair>(Pa, k_);
      H0_ = R0_aligned_ * Pa;
      break;
    }
    default:
      raise(Errc::rank_mismatch, "projection rank outside {0,1,2,3}");
  }
}

const ExactSo3Params& ExactSo3Solution::params() const {
  if (rank_ != 1) raise(Errc::rank_mismatch, "trace parameters exist only for rank-1 gains");
  return params_;
}

RotationMatrix ExactSo3Solution::at(double t) const {
  switch (rank_) {
    case 0:
      return validate_rotation(exact_H(k_ * t, *hproj_, H0_), 1e-8);
    case 3:
      return validate_rotation(exact_H(t, *hproj_, H0_), 1e-8);
    case 1: {
      FirstColumn col{exact_r11(t, params_.r11_0), exact_r21(t, r21_0_, params_.r11_0)};
      const RotationMatrix aligned = reconstruct_R(t, params_, col);
      return RotationMatrix::unchecked(T_.transpose() * aligned.matrix() * T_);
    }
    case 2: {
      const Eigen::MatrixXd H = exact_H(t, *hproj_, H0_);
      Eigen::Matrix3d R;
      R.col(1) = H.col(1);
      R.col(2) = H.col(2);
      R.col(0) = R.col(1).cross(R.col(2)).eval();
      const RotationMatrix aligned = validate_rotation(R, 1e-8);
      return RotationMatrix::unchecked(T_.transpose() * aligned.matrix() * T_);
    }
    default:
      raise(Errc::internal, "unreachable");
  }
}

}  // namespace geoatt

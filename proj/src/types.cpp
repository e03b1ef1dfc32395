#include "geoatt/types.hpp"

#include <algorithm>
#include <cmath>

namespace geoatt {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::not_orthogonal: return "NotOrthogonal";
    case Errc::negative_determinant: return "NegativeDeterminant";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::step_rejected: return "StepRejected";
    case Errc::domain_error: return "DomainError";
    case Errc::reality_error: return "RealityError";
    case Errc::singular_y: return "SingularY";
    case Errc::singular_system: return "SingularSystem";
    case Errc::not_an_equilibrium: return "NotAnEquilibrium";
    case Errc::inconsistent_parameters: return "InconsistentParameters";
    case Errc::rank_mismatch: return "RankMismatch";
    case Errc::config_error: return "ConfigError";
    case Errc::internal: return "InternalError";
  }
  return "UnknownError";
}

double orthogonality_residual(const Eigen::MatrixXd& M) {
  const auto n = M.rows();
  return (M.transpose() * M - Eigen::MatrixXd::Identity(n, n)).norm();
}

RotationMatrix validate_rotation(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols() || M.rows() < 2) {
    raise(Errc::dimension_mismatch, "rotation must be square with n >= 2");
  }
  if (!M.allFinite()) {
    raise(Errc::not_orthogonal, "matrix has non-finite entries");
  }
  const double resid = orthogonality_residual(M);
  if (resid > tol) {
    raise(Errc::not_orthogonal,
          "||R^T R - I||_F = " + std::to_string(resid) + " exceeds tol " + std::to_string(tol));
  }
  if (M.determinant() < 0.0) {
    raise(Errc::negative_determinant, "det(R) < 0: reflection, not a rotation");
  }
  return RotationMatrix(M);
}

SkewMatrix::SkewMatrix(const Eigen::MatrixXd& S, double tol) : m_(S) {
  if (S.rows() != S.cols()) raise(Errc::dimension_mismatch, "skew matrix must be square");
  const double resid = (S + S.transpose()).norm();
  if (!(resid <= tol)) {
    raise(Errc::domain_error, "||S + S^T||_F = " + std::to_string(resid) + " exceeds tol");
  }
}

SkewMatrix SkewMatrix::hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d S;
  S << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return SkewMatrix(S);
}

ProjectionPair::ProjectionPair(const Eigen::MatrixXd& P, double k, double tol)
    : p_(P), k_(k), n_(static_cast<int>(P.rows())) {
  if (P.rows() != P.cols()) raise(Errc::dimension_mismatch, "projection must be square");
  if (!(k > 0.0)) raise(Errc::domain_error, "gain k must be positive");
  if ((P - P.transpose()).norm() > tol) raise(Errc::domain_error, "projection not symmetric");
  if ((P * P - P).norm() > tol) raise(Errc::domain_error, "projection not idempotent");
  q_ = Eigen::MatrixXd::Identity(n_, n_) - p_;
  if ((p_ * q_).norm() > tol) raise(Errc::domain_error, "P Q != 0");
  rank_ = static_cast<int>(std::lround(p_.trace()));
}

ProjectionPair ProjectionPair::from_diag_mask(const std::vector<int>& mask, double k) {
  const int n = static_cast<int>(mask.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (mask[i] != 0 && mask[i] != 1) raise(Errc::domain_error, "diag mask entries must be 0/1");
    P(i, i) = mask[i];
  }
  return ProjectionPair(P, k);
}

ProjectionPair ProjectionPair::rank_one(const Eigen::VectorXd& axis, double k) {
  const double nrm = axis.norm();
  if (nrm <= 0.0) raise(Errc::domain_error, "zero axis");
  Eigen::VectorXd e = axis / nrm;
  return ProjectionPair(e * e.transpose(), k);
}

UnitVector::UnitVector(const Eigen::VectorXd& v, double tol) : v_(v) {
  if (std::abs(v.norm() - 1.0) > tol) raise(Errc::domain_error, "vector is not unit length");
}

UnitVector UnitVector::axis(int n, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(i) = 1.0;
  return UnitVector(v);
}

UnitVector UnitVector::normalized(const Eigen::VectorXd& v) {
  const double nrm = v.norm();
  if (nrm <= 0.0) raise(Errc::domain_error, "cannot normalize the zero vector");
  return UnitVector(v / nrm);
}

void ComplexSpectrum::canonicalize() {
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

double ComplexSpectrum::distance_to(std::complex<double> z) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : values) best = std::min(best, std::abs(v - z));
  return best;
}

double ComplexSpectrum::unit_circle_residual() const {
  double worst = 0.0;
  for (const auto& v : values) worst = std::max(worst, std::abs(std::abs(v) - 1.0));
  return worst;
}

}  // namespace geoatt

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "geoatt/error.hpp"

namespace geoatt {

/// Default orthogonality tolerance for user-supplied matrices. Integrator
/// output is held to much tighter budgets; this one only separates genuine
/// input slop from garbage.
inline constexpr double kRotationTol = 1e-9;

double orthogonality_residual(const Eigen::MatrixXd& M);

/// An element of SO(n). Construction goes through validate_rotation() (or the
/// unchecked() escape hatch for matrices produced by structure-preserving
/// code paths). Immutable after construction.
class RotationMatrix {
 public:
  static RotationMatrix Identity(int n) { return RotationMatrix(Eigen::MatrixXd::Identity(n, n)); }

  /// Wraps a matrix that is orthogonal by construction, skipping validation.
  static RotationMatrix unchecked(Eigen::MatrixXd m) { return RotationMatrix(std::move(m)); }

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  explicit RotationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  friend RotationMatrix validate_rotation(const Eigen::MatrixXd&, double);

  Eigen::MatrixXd m_;
};

/// Checks ||R^T R - I||_F <= tol and det R > 0 and returns the wrapped
/// rotation. Throws Errc::not_orthogonal / Errc::negative_determinant.
RotationMatrix validate_rotation(const Eigen::MatrixXd& M, double tol = kRotationTol);

/// An element of so(n): skew-symmetric real matrix (angular rate when used as
/// a control).
class SkewMatrix {
 public:
  explicit SkewMatrix(const Eigen::MatrixXd& S, double tol = 1e-12);
  static SkewMatrix Zero(int n) { return SkewMatrix(Eigen::MatrixXd::Zero(n, n)); }

  /// Hat map: w in R^3 -> [w]_x, so that [w]_x y = w x y.
  static SkewMatrix hat(const Eigen::Vector3d& w);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Eigen::MatrixXd m_;
};

/// The gain structure of the feedback law: a constant orthogonal projection P
/// with complement Q = I - P and a positive scalar gain k. A scenario is
/// fully specified by (P, k) once the initial state is chosen.
class ProjectionPair {
 public:
  ProjectionPair(const Eigen::MatrixXd& P, double k, double tol = 1e-12);

  static ProjectionPair from_diag_mask(const std::vector<int>& mask, double k);
  static ProjectionPair rank_one(const Eigen::VectorXd& axis, double k);

  const Eigen::MatrixXd& P() const { return p_; }
  const Eigen::MatrixXd& Q() const { return q_; }
  double k() const { return k_; }
  int dim() const { return n_; }
  int rank() const { return rank_; }

 private:
  Eigen::MatrixXd p_, q_;
  double k_;
  int n_, rank_;
};

/// A point on the unit sphere S^{n-1} (reduced attitude).
class UnitVector {
 public:
  explicit UnitVector(const Eigen::VectorXd& v, double tol = 1e-12);
  static UnitVector axis(int n, int i);
  static UnitVector normalized(const Eigen::VectorXd& v);

  const Eigen::VectorXd& vector() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }

 private:
  Eigen::VectorXd v_;
};

/// Eigenvalues with multiplicity, stored in canonical order (by real part,
/// then imaginary part).
struct ComplexSpectrum {
  std::vector<std::complex<double>> values;

  void canonicalize();
  /// min over eigenvalues of |lambda - z|
  double distance_to(std::complex<double> z) const;
  /// max over eigenvalues of | |lambda| - 1 |
  double unit_circle_residual() const;
};

}  // namespace geoatt

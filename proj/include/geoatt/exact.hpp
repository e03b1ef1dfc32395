#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>

#include "geoatt/types.hpp"

namespace geoatt {

/// Fixed 2x2 skew generator used throughout the SO(3) block formulas.
/// Both sign choices satisfy the block identities; one is fixed so that the
/// trace formulas and the residual checks stay mutually consistent.
inline const Eigen::Matrix2d kSpin2 = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

/// 1 + 2x2 block partition of a 3x3 rotation.
struct So3Blocks {
  double r11;
  Eigen::RowVector2d r12;
  Eigen::Vector2d r21;
  Eigen::Matrix2d R22;

  static So3Blocks split(const Eigen::Matrix3d& R);
  Eigen::Matrix3d assemble() const;
};

/// Closed-form solution of Hdot = P - H^2 on the homogeneous space
/// {R P : R in SO(n)}:
///   H(t) = [sinh(Pt) + cosh(Pt) H0] [cosh(Pt) + sinh(Pt) H0]^{-1}.
/// The denominator is nonsingular for all finite t; Errc::singular_y guards
/// numerically degenerate queries.
Eigen::MatrixXd exact_H(double t, const ProjectionPair& proj, const Eigen::MatrixXd& H0);

/// r11(t) = tanh(t + atanh(r11_0)) for r11_0 in (-1, 1]; r11_0 = 1 is the
/// fixed point (extended atanh convention). Errc::domain_error for
/// r11_0 <= -1 (initial condition with -1 in the spectrum).
double exact_r11(double t, double r11_0);

/// r21(t) = sech(t) / (1 + tanh(t) r11_0) * r21_0.
Eigen::Vector2d exact_r21(double t, const Eigen::Vector2d& r21_0, double r11_0);

/// Constants of the SO(3) closed-form trace solutions, precomputed from the
/// (coordinate-aligned) initial rotation and the gain k.
struct ExactSo3Params {
  std::complex<double> f;  // atanh(trR22_0 / (1 + r11_0)) + k log(1 - r11_0)
  double g;                // trR22S_0 * cosh(atanh r11_0) * cosh(phi0)
  double r11_0;
  double k;

  // cached initial data for stable evaluation
  double trR22_0;
  double trR22S_0;
  double c;     // atanh(r11_0), +inf when r11_0 = 1
  double phi0;  // atanh(trR22_0 / (1 + r11_0)), +-inf when trR22S_0 = 0

  /// R0_aligned must satisfy the rotation invariants in coordinates where
  /// P = e1 e1^T. Throws Errc::domain_error when r11_0 <= -1 + 1e-12.
  static ExactSo3Params from_initial(const Eigen::Matrix3d& R0_aligned, double k);
};

struct TracePair {
  double trR22;
  double trR22S;
};

/// Closed-form block traces
///   trace R22(t)  = tanh{f - k log[1 - r11(t)]} {1 + r11(t)},
///   trace R22(t)S = g exp{t} sech{t + atanh r11_0} sech{f - k log[1 - r11(t)]}.
/// Evaluation runs in complex arithmetic; an imaginary residue above 1e-6
/// raises Errc::reality_error.
TracePair exact_traces(double t, const ExactSo3Params& params);

struct FirstColumn {
  double r11;
  Eigen::Vector2d r21;
};

/// Recovers the full rotation from the first column and the block traces by
/// solving the 6x6 linear system (orthogonality of the first two columns,
/// the cross-product constraint, and the two trace constraints) through the
/// Schur complement of its lower-right block.
RotationMatrix reconstruct_R(double t, const ExactSo3Params& params, const FirstColumn& col);

struct BlockResiduals {
  double outer_product;  // ||r21 r12 - (r11 R22 + S R22 S)||_F
  double pythagorean;    // |(tr R22)^2 + (tr R22 S)^2 - (1 + r11)^2|
  double block_skew;     // ||R22 (R22^T - R22) - tr(R22 S) R22 S||_F
};

/// Residuals of the three SO(3) block identities; all vanish on exact
/// rotations.
BlockResiduals verify_block_relations(const RotationMatrix& R);

/// Full exact solution R(t) of the closed loop on SO(3) for any projection
/// rank. A coordinate pre-pass rotates the projection axis onto e1 (rank 1),
/// or the complement axis onto e1 (rank 2, where the k-term vanishes and the
/// closed form for H = R P plus the cross-product constraint suffice);
/// ranks 0 and 3 reduce to Hdot = I - H^2 up to time scaling.
/// Throws Errc::domain_error if R0 has -1 in its spectrum within 1e-9.
class ExactSo3Solution {
 public:
  ExactSo3Solution(const RotationMatrix& R0, const ProjectionPair& proj);

  RotationMatrix at(double t) const;

  int projection_rank() const { return rank_; }
  /// Alignment rotation T (aligned frame = T * world * T^T); identity for
  /// ranks 0 and 3.
  const Eigen::Matrix3d& alignment() const { return T_; }
  const ExactSo3Params& params() const;

 private:
  int rank_;
  double k_;
  Eigen::Matrix3d T_ = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R0_aligned_;
  // rank 1 path
  ExactSo3Params params_{};
  Eigen::Vector2d r21_0_ = Eigen::Vector2d::Zero();
  // rank 0/2/3 path
  Eigen::MatrixXd H0_;
  std::unique_ptr<ProjectionPair> hproj_;
};

}  // namespace geoatt

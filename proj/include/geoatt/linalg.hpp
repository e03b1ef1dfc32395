#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>

#include "geoatt/types.hpp"

namespace geoatt {

/// Matrix exponential of a skew-symmetric matrix. Closed forms for n <= 3,
/// scaling-and-squaring with a fixed-order Pade approximant otherwise. The
/// result satisfies the RotationMatrix invariants to well below 1e-9.
RotationMatrix exp_skew(const SkewMatrix& S);

/// Dense matrix exponential (scaling and squaring, [6/6] Pade). Used by
/// exp_skew for n > 3 and directly by tests.
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

/// The pair (cosh(Pt), sinh(Pt)) for an orthogonal projection P, evaluated
/// through the closed forms cosh(Pt) = Q + cosh(t) P and sinh(Pt) = sinh(t) P
/// rather than any series.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> hyperbolic_Pt(const ProjectionPair& proj, double t);

/// Principal inverse hyperbolic tangent on C, extended so that
/// atanh(+-1) = +-infinity. Everywhere else equals
/// (Log(1+z) - Log(1-z)) / 2 with the principal logarithm (arg in (-pi, pi]).
std::complex<double> complex_atanh(std::complex<double> z);

/// Eigenvalues of a real dense matrix: balancing, Householder reduction to
/// Hessenberg form, then Francis double-shift QR iteration. Subdiagonal
/// deflation tolerance 1e-12, iteration cap 100*n (Errc::no_convergence).
ComplexSpectrum spectrum(const Eigen::MatrixXd& M);

struct EigenPairs {
  ComplexSpectrum spectrum;
  Eigen::MatrixXcd vectors;  // column j pairs with spectrum.values[j]
};

/// Eigenvalues plus eigenvectors (inverse iteration on the original matrix).
/// Each returned pair satisfies ||Mv - lambda v|| <= 1e-8 ||M||_F.
EigenPairs spectrum_with_vectors(const Eigen::MatrixXd& M);

/// True iff -1 is in the spectrum of R within tol, i.e. R belongs to the
/// measure-zero set where convergence to the identity fails.
bool in_negative_spectrum_set(const RotationMatrix& R, double tol = 1e-9);

/// Deterministic Haar-distributed rotation: QR of a standard Gaussian matrix
/// with diagonal sign correction, then a determinant fix-up that negates the
/// last column if needed. Pure in (n, seed).
RotationMatrix haar_sample(int n, std::uint64_t seed);

/// Instance check of the projection lemma: (-1 not in spectrum(R) within tol)
/// implies (-1 not in spectrum(P R P) within tol). Vacuously true when the
/// premise fails. The exact lemma compresses distances at a square-root rate
/// (dist(-1, spectrum(R)) <= sqrt(2 dist(-1, spectrum(PRP))) + h.o.t.), so
/// randomized sweeps at one tolerance should discard samples closer than
/// sqrt(2 tol) to the negative-spectrum set.
bool check_prp_lemma(const RotationMatrix& R, const ProjectionPair& proj, double tol);

/// Deterministic standard-normal stream (splitmix64 uniforms through
/// Box-Muller); used for Haar sampling and anywhere reproducible Gaussians
/// are needed. Pure in the seed, no global state.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : state_(seed) {}
  double next();

 private:
  double uniform01();
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {

/// Rodrigues formula with series fallback near zero angle.
inline Eigen::Matrix3d expm_so3(const Eigen::Matrix3d& S) {
  const double x = S(2, 1), y = S(0, 2), z = S(1, 0);
  const double th2 = x * x + y * y + z * z;
  double a, b;
  if (th2 < 1e-8) {
    a = 1.0 - th2 / 6.0 * (1.0 - th2 / 20.0);
    b = 0.5 - th2 / 24.0 * (1.0 - th2 / 30.0);
  } else {
    const double th = std::sqrt(th2);
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
  }
  return Eigen::Matrix3d::Identity() + a * S + b * (S * S);
}

}  // namespace detail

}  // namespace geoatt

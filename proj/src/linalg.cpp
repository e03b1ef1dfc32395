#include "geoatt/linalg.hpp"

#include <cmath>
#include <numbers>

namespace geoatt {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  // [6/6] Pade coefficients, b_{j+1} = b_j (6-j) / ((12-j)(j+1)).
  static constexpr double b[7] = {1.0,        1.0 / 2.0,     5.0 / 44.0, 1.0 / 66.0,
                                  1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const int n = static_cast<int>(A.rows());
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > 0.25) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.25)));
  const Eigen::MatrixXd As = A / std::ldexp(1.0, s);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = As * As;
  const Eigen::MatrixXd A4 = A2 * A2;
  const Eigen::MatrixXd A6 = A2 * A4;
  const Eigen::MatrixXd V = b[0] * I + b[2] * A2 + b[4] * A4 + b[6] * A6;
  const Eigen::MatrixXd U = As * (b[1] * I + b[3] * A2 + b[5] * A4);
  Eigen::MatrixXd E = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

RotationMatrix exp_skew(const SkewMatrix& S) {
  const int n = S.dim();
  if (n == 2) {
    const double th = S.matrix()(1, 0);
    Eigen::Matrix2d R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return RotationMatrix::unchecked(R);
  }
  if (n == 3) {
    return RotationMatrix::unchecked(detail::expm_so3(S.matrix()));
  }
  return RotationMatrix::unchecked(expm(S.matrix()));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> hyperbolic_Pt(const ProjectionPair& proj, double t) {
  return {proj.Q() + std::cosh(t) * proj.P(), std::sinh(t) * proj.P()};
}

std::complex<double> complex_atanh(std::complex<double> z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (z.imag() == 0.0) {
    z = std::complex<double>(z.real(), +0.0);  // pin the branch on the real line
    if (z.real() == 1.0) return {inf, 0.0};
    if (z.real() == -1.0) return {-inf, 0.0};
  }
  const std::complex<double> one(1.0, 0.0);
  return 0.5 * (std::log(one + z) - std::log(one - z));
}

bool in_negative_spectrum_set(const RotationMatrix& R, double tol) {
  return spectrum(R.matrix()).distance_to({-1.0, 0.0}) <= tol;
}

double GaussianSampler::uniform01() {
  // splitmix64 stream; top 53 bits -> [0, 1)
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t x = state_;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

double GaussianSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

RotationMatrix haar_sample(int n, std::uint64_t seed) {
  if (n < 2) raise(Errc::dimension_mismatch, "haar_sample needs n >= 2");
  GaussianSampler rng(seed);
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.next();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  if (Q.determinant() < 0.0) Q.col(n - 1) = -Q.col(n - 1);
  return RotationMatrix::unchecked(std::move(Q));
}

bool check_prp_lemma(const RotationMatrix& R, const ProjectionPair& proj, double tol) {
  if (R.dim() != proj.dim()) raise(Errc::dimension_mismatch, "R and P dimensions differ");
  const bool premise = spectrum(R.matrix()).distance_to({-1.0, 0.0}) > tol;
  if (!premise) return true;
  const Eigen::MatrixXd PRP = proj.P() * R.matrix() * proj.P();
  return spectrum(PRP).distance_to({-1.0, 0.0}) > tol;
}

}  // namespace geoatt

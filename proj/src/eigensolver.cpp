#include <cmath>
#include <cstdint>

#include "geoatt/linalg.hpp"

// Dense nonsymmetric eigensolver: Parlett-Reinsch balancing, Householder
// reduction to upper Hessenberg form, Francis double-shift QR with the
// classic exceptional-shift strategy. Eigenvalues only; eigenvectors are
// recovered afterwards by inverse iteration on the original matrix.

namespace geoatt {

namespace {

constexpr double kSubdiagTol = 1e-12;

void balance_inplace(Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(A(j, i));
        r += std::abs(A(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r / radix) {
        f *= radix;
        c *= sqrdx;
      }
      while (c > r * radix) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
}

void hessenberg_inplace(Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  for (int k = 0; k < n - 2; ++k) {
    Eigen::VectorXd x = A.col(k).segment(k + 1, n - k - 1);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    Eigen::VectorXd v = x;
    v(0) += (x(0) >= 0.0 ? xnorm : -xnorm);
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    A.block(k + 1, k, n - k - 1, n - k) -=
        2.0 * v * (v.transpose() * A.block(k + 1, k, n - k - 1, n - k));
    A.block(0, k + 1, n, n - k - 1) -= 2.0 * (A.block(0, k + 1, n, n - k - 1) * v) * v.transpose();
    A.col(k).segment(k + 2, n - k - 2).setZero();
  }
}

void push_quadratic_roots(double x, double y, double w, double t,
                          std::vector<std::complex<double>>& out) {
  // roots of the trailing 2x2 block: x = H(en,en), y = H(en-1,en-1),
  // w = H(en,en-1) * H(en-1,en); t is the accumulated exceptional shift
  const double p = 0.5 * (y - x);
  const double q = p * p + w;
  const double xx = x + t;
  if (q >= 0.0) {
    const double z = p + std::copysign(std::sqrt(q), p);
    const double l1 = xx + z;
    const double l2 = (z != 0.0) ? xx - w / z : l1;
    out.emplace_back(l1, 0.0);
    out.emplace_back(l2, 0.0);
  } else {
    out.emplace_back(xx + p, std::sqrt(-q));
    out.emplace_back(xx + p, -std::sqrt(-q));
  }
}

std::vector<std::complex<double>> francis_eigenvalues(Eigen::MatrixXd H) {
  const int n = static_cast<int>(H.rows());
  std::vector<std::complex<double>> out;
  out.reserve(n);

  double anorm = H.cwiseAbs().sum();
  if (anorm == 0.0) anorm = 1.0;

  int en = n - 1;
  double t = 0.0;
  int budget = 100 * n;

  while (en >= 0) {
    int its = 0;
    for (;;) {
      // scan for a negligible subdiagonal entry
      int l = en;
      while (l > 0) {
        double s = std::abs(H(l - 1, l - 1)) + std::abs(H(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(H(l, l - 1)) <= kSubdiagTol * s) break;
        --l;
      }

      double x = H(en, en);
      if (l == en) {
        out.emplace_back(x + t, 0.0);
        --en;
        break;
      }
      double y = H(en - 1, en - 1);
      double w = H(en, en - 1) * H(en - 1, en);
      if (l == en - 1) {
        push_quadratic_roots(x, y, w, t, out);
        en -= 2;
        break;
      }

      if (budget-- <= 0) {
        raise(Errc::no_convergence, "QR iteration cap reached");
      }
      if (its == 10 || its == 20) {
        // exceptional shift
        t += x;
        for (int i = 0; i <= en; ++i) H(i, i) -= x;
        const double s = std::abs(H(en, en - 1)) + std::abs(H(en - 1, en - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      ++its;

      // look for two consecutive small subdiagonal elements
      int m = en - 2;
      double p = 0.0, q = 0.0, r = 0.0;
      for (; m >= l; --m) {
        const double z = H(m, m);
        const double rr = x - z;
        const double ss = y - z;
        p = (rr * ss - w) / H(m + 1, m) + H(m, m + 1);
        q = H(m + 1, m + 1) - z - rr - ss;
        r = H(m + 2, m + 1);
        const double scale = std::abs(p) + std::abs(q) + std::abs(r);
        p /= scale;
        q /= scale;
        r /= scale;
        if (m == l) break;
        const double tst = std::abs(p) * (std::abs(H(m - 1, m - 1)) + std::abs(z) +
                                          std::abs(H(m + 1, m + 1)));
        if (std::abs(H(m, m - 1)) * (std::abs(q) + std::abs(r)) <= kSubdiagTol * tst) break;
      }
      for (int i = m + 2; i <= en; ++i) {
        H(i, i - 2) = 0.0;
        if (i > m + 2) H(i, i - 3) = 0.0;
      }

      // double QR sweep on rows l..en
      for (int k = m; k <= en - 1; ++k) {
        const bool notlast = (k != en - 1);
        if (k != m) {
          p = H(k, k - 1);
          q = H(k + 1, k - 1);
          r = notlast ? H(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
        if (k != m) {
          H(k, k - 1) = -s * x;
        } else if (l != m) {
          H(k, k - 1) = -H(k, k - 1);
        }
        p += s;
        x = p / s;
        y = q / s;
        double z = r / s;
        q /= p;
        r /= p;
        if (notlast) {
          for (int j = k; j <= en; ++j) {
            double pp = H(k, j) + q * H(k + 1, j) + r * H(k + 2, j);
            H(k, j) -= pp * x;
            H(k + 1, j) -= pp * y;
            H(k + 2, j) -= pp * z;
          }
          const int hi = std::min(en, k + 3);
          for (int i = l; i <= hi; ++i) {
            double pp = x * H(i, k) + y * H(i, k + 1) + z * H(i, k + 2);
            H(i, k) -= pp;
            H(i, k + 1) -= pp * q;
            H(i, k + 2) -= pp * r;
          }
        } else {
          for (int j = k; j <= en; ++j) {
            double pp = H(k, j) + q * H(k + 1, j);
            H(k, j) -= pp * x;
            H(k + 1, j) -= pp * y;
          }
          const int hi = std::min(en, k + 3);
          for (int i = l; i <= hi; ++i) {
            double pp = x * H(i, k) + y * H(i, k + 1);
            H(i, k) -= pp;
            H(i, k + 1) -= pp * q;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

ComplexSpectrum spectrum(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  if (M.rows() != M.cols()) raise(Errc::dimension_mismatch, "spectrum needs a square matrix");
  if (n > 64) raise(Errc::domain_error, "spectrum supports n <= 64");
  if (!M.allFinite()) raise(Errc::domain_error, "spectrum: non-finite entries");

  ComplexSpectrum spec;
  if (n == 1) {
    spec.values = {{M(0, 0), 0.0}};
    return spec;
  }
  if (n == 2) {
    push_quadratic_roots(M(1, 1), M(0, 0), M(1, 0) * M(0, 1), 0.0, spec.values);
    spec.canonicalize();
    return spec;
  }
  Eigen::MatrixXd A = M;
  balance_inplace(A);
  hessenberg_inplace(A);
  spec.values = francis_eigenvalues(std::move(A));
  spec.canonicalize();
  return spec;
}

EigenPairs spectrum_with_vectors(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  EigenPairs result;
  result.spectrum = spectrum(M);
  result.vectors.resize(n, n);

  double scale = M.norm();
  if (scale == 0.0) scale = 1.0;
  const Eigen::MatrixXcd Mc = M.cast<std::complex<double>>();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);

  GaussianSampler rng(0x5eedULL);
  for (int j = 0; j < n; ++j) {
    const std::complex<double> lambda = result.spectrum.values[j];
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = {rng.next(), rng.next()};
    v.normalize();

    double best_resid = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd best = v;
    double delta = 1e-12 * scale;
    for (int attempt = 0; attempt < 4 && best_resid > 1e-9 * scale; ++attempt) {
      const std::complex<double> shift = lambda + std::complex<double>(delta, 0.5 * delta);
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Mc - shift * I);
      Eigen::VectorXcd w = v;
      for (int it = 0; it < 4; ++it) {
        Eigen::VectorXcd u = lu.solve(w);
        if (!u.allFinite() || u.norm() == 0.0) break;
        w = u / u.norm();
        const double resid = (Mc * w - lambda * w).norm();
        if (resid < best_resid) {
          best_resid = resid;
          best = w;
        }
        if (best_resid <= 1e-9 * scale) break;
      }
      delta *= 32.0;
    }
    if (best_resid > 1e-8 * scale) {
      raise(Errc::no_convergence, "inverse iteration residual above 1e-8 * ||M||_F");
    }
    result.vectors.col(j) = best;
  }
  return result;
}

}  // namespace geoatt

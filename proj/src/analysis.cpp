#include "geoatt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "geoatt/feedback.hpp"
#include "geoatt/linalg.hpp"

namespace geoatt {

namespace {

long long choose2(long long a) { return a >= 2 ? a * (a - 1) / 2 : 0; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::pair<int, int>> skew_basis_index(int n) {
  std::vector<std::pair<int, int>> idx;
  idx.reserve(n * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) idx.emplace_back(a, b);
  return idx;
}

int default_thread_count(int samples) {
  if (const char* env = std::getenv("GEOATT_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return std::min(t, samples);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(hc ? static_cast<int>(hc) : 1, samples));
}

}  // namespace

double lyapunov(const RotationMatrix& R) {
  return static_cast<double>(R.dim()) - R.matrix().trace();
}

EquilibriumClass classify_equilibrium(const RotationMatrix& R, const ProjectionPair& proj,
                                      double tol) {
  if (R.dim() != proj.dim()) raise(Errc::dimension_mismatch, "R and P dimensions differ");
  const Eigen::MatrixXd& Rm = R.matrix();
  EquilibriumClass cls;
  cls.symmetry_residual = (Rm.transpose() - Rm).norm();
  cls.commutation_residual = (Rm * proj.P() - proj.P() * Rm).norm();
  cls.stationarity_residual = closed_loop_rhs(R, {proj}).norm();

  const int n = R.dim();
  if ((Rm - Eigen::MatrixXd::Identity(n, n)).norm() <= tol) {
    cls.kind = EquilibriumKind::identity;
    cls.i = 0;
    return cls;
  }
  const bool stationary = cls.symmetry_residual <= tol && cls.commutation_residual <= tol &&
                          cls.stationarity_residual <= tol;
  if (stationary) {
    const double V = lyapunov(R);
    const int i = static_cast<int>(std::lround(V / 2.0));
    if (i >= 2 && i % 2 == 0 && i <= n && std::abs(V - 2.0 * i) <= 1e-6) {
      cls.kind = EquilibriumKind::saddle;
      cls.i = i;
      return cls;
    }
  }
  cls.kind = EquilibriumKind::non_equilibrium;
  return cls;
}

Eigen::MatrixXd linearization_matrix(const RotationMatrix& R, const ProjectionPair& proj) {
  const auto cls = classify_equilibrium(R, proj);
  if (cls.kind == EquilibriumKind::non_equilibrium) {
    raise(Errc::not_an_equilibrium, "linearization is defined on the equilibrium set only");
  }
  const int n = R.dim();
  const Eigen::MatrixXd& Rm = R.matrix();
  const Eigen::MatrixXd& P = proj.P();
  const Eigen::MatrixXd& Q = proj.Q();
  const double k = proj.k();
  const auto idx = skew_basis_index(n);
  const int d = static_cast<int>(idx.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  Eigen::MatrixXd F(d, d);
  for (int col = 0; col < d; ++col) {
    const auto [a, b] = idx[col];
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    S(a, b) = inv_sqrt2;
    S(b, a) = -inv_sqrt2;
    const Eigen::MatrixXd X = S * Rm;
    const Eigen::MatrixXd FX =
        -X * P * Rm - Rm * P * X + k * (Rm * Q * (X.transpose() - X) * Q);
    Eigen::MatrixXd G = FX * Rm.transpose();
    G = 0.5 * (G - G.transpose().eval());
    for (int row = 0; row < d; ++row) {
      const auto [c, e] = idx[row];
      F(row, col) = std::sqrt(2.0) * G(c, e);
    }
  }
  return F;
}

std::vector<std::pair<double, int>> predicted_identity_spectrum(int n, int p, double k) {
  if (n < 2 || p < 0 || p > n) raise(Errc::inconsistent_parameters, "need n >= 2, 0 <= p <= n");
  if (!(k > 0.0)) raise(Errc::inconsistent_parameters, "k must be positive");
  std::vector<std::pair<double, int>> entries = {
      {-2.0, static_cast<int>(choose2(p))},
      {-1.0, p * (n - p)},
      {-2.0 * k, static_cast<int>(choose2(n - p))},
  };
  std::vector<std::pair<double, int>> merged;
  for (const auto& [lam, mult] : entries) {
    if (mult == 0) continue;
    bool found = false;
    for (auto& [l, m] : merged) {
      if (std::abs(l - lam) <= 1e-12) {
        m += mult;
        found = true;
        break;
      }
    }
    if (!found) merged.emplace_back(lam, mult);
  }
  std::sort(merged.begin(), merged.end());
  return merged;
}

int unstable_count(int n, int p, int i, int j, int m) {
  if (n < 2) raise(Errc::inconsistent_parameters, "need n >= 2");
  if (m != p) {
    raise(Errc::inconsistent_parameters,
          "m is the dimension of range(P) shared with the eigenbasis, so m = rank P");
  }
  if (p < 0 || p > n) raise(Errc::inconsistent_parameters, "need 0 <= p <= n");
  if (i < 0 || i > n || i % 2 != 0) {
    raise(Errc::inconsistent_parameters, "the -1-eigenspace dimension i must be even, 0 <= i <= n");
  }
  if (j < 0 || j > std::min(i, m)) {
    raise(Errc::inconsistent_parameters, "need 0 <= j <= min(i, m)");
  }
  if (i - j > n - m) raise(Errc::inconsistent_parameters, "need i - j <= n - m");

  const long long raw = choose2(j) + choose2(m - j) + static_cast<long long>(m) * (n - m) +
                        choose2(i - j) + choose2(n - m - (i - j));
  const long long simplified =
      choose2(n) - static_cast<long long>(j) * (m - j) -
      static_cast<long long>(i - j) * (n - m - (i - j));
  if (raw != simplified) raise(Errc::internal, "the two count formulas disagree");
  return static_cast<int>(raw);
}

SaddleParameters extract_saddle_parameters(const RotationMatrix& R, const ProjectionPair& proj) {
  SaddleParameters out;
  out.m = proj.rank();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (R.matrix() + R.matrix().transpose()));
  const auto& vals = es.eigenvalues();
  const int n = R.dim();

  double worst = 0.0;
  std::vector<int> minus;
  for (int a = 0; a < n; ++a) {
    worst = std::max(worst, std::abs(std::abs(vals(a)) - 1.0));
    if (vals(a) < 0.0) minus.push_back(a);
  }
  out.i = static_cast<int>(minus.size());

  // j = trace of P restricted to the -1-eigenspace (basis independent).
  Eigen::MatrixXd Vm(n, out.i);
  for (int c = 0; c < out.i; ++c) Vm.col(c) = es.eigenvectors().col(minus[c]);
  const double jtrace = (Vm.transpose() * proj.P() * Vm).trace();
  out.j = static_cast<int>(std::lround(jtrace));
  out.well_conditioned =
      worst <= 1e-6 && std::abs(jtrace - out.j) <= 1e-6 && out.i % 2 == 0;
  return out;
}

int kernel_dimension(const RotationMatrix& R, const ProjectionPair& proj) {
  const Eigen::MatrixXd F = linearization_matrix(R, proj);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double thresh = 1e-8 * sv(0);
  int nullity = 0;
  for (Eigen::Index a = 0; a < sv.size(); ++a) {
    if (sv(a) <= thresh) ++nullity;
  }
  return nullity;
}

int kernel_dimension_by_constraints(const RotationMatrix& R, const ProjectionPair& proj) {
  const int n = R.dim();
  const auto idx = skew_basis_index(n);
  const int d = static_cast<int>(idx.size());
  const Eigen::MatrixXd& Rm = R.matrix();
  const Eigen::MatrixXd& P = proj.P();

  Eigen::MatrixXd K(2 * n * n, d);
  for (int col = 0; col < d; ++col) {
    const auto [a, b] = idx[col];
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    S(a, b) = 1.0;
    S(b, a) = -1.0;
    const Eigen::MatrixXd anti = S * Rm + Rm * S;
    const Eigen::MatrixXd comm = P * S - S * P;
    K.block(0, col, n * n, 1) = Eigen::Map<const Eigen::VectorXd>(anti.data(), n * n);
    K.block(n * n, col, n * n, 1) = Eigen::Map<const Eigen::VectorXd>(comm.data(), n * n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index a = 0; a < sv.size(); ++a) {
    if (sv(a) > 1e-8 * smax) ++rank;
  }
  return d - rank;
}

BasinReport monte_carlo_basin(const ProjectionPair& proj, int samples, std::uint64_t seed,
                              const BasinParams& params) {
  if (samples < 1) raise(Errc::domain_error, "samples must be >= 1");
  const int n = proj.dim();

  BasinReport report;
  report.samples = samples;
  report.t_max = params.t_max;
  report.dt = params.dt;
  report.stop_V = params.stop_V;

  struct Outcome {
    bool converged;
    double final_V;
    std::uint64_t seed;
  };
  std::vector<Outcome> outcomes(samples);

  auto run_range = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const std::uint64_t si = mix_seed(seed, static_cast<std::uint64_t>(i));
      RotationMatrix R0 = params.forced_R0 ? validate_rotation(*params.forced_R0, 1e-8)
                                           : haar_sample(n, si);
      SimulationSpec spec{{proj}, R0, params.dt, params.t_max, params.stop_V, params.method,
                          /*record_stride=*/1 << 30};
      const Trajectory traj = simulate(spec);
      outcomes[i] = {traj.converged, traj.final_V, si};
    }
  };

  const int threads = params.threads > 0 ? std::min(params.threads, samples)
                                         : default_thread_count(samples);
  if (threads <= 1) {
    run_range(0, samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(samples, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  for (int i = 0; i < samples; ++i) {
    if (outcomes[i].converged) {
      ++report.converged;
    } else {
      report.failures.push_back({i, outcomes[i].seed, outcomes[i].final_V});
    }
  }
  return report;
}

namespace {

GeodesicReport geodesic_report_from_axis(const Trajectory& traj, const Eigen::VectorXd& axis) {
  const int n = traj.n;
  GeodesicReport rep;
  rep.traveled = traj.dist_axis.row(traj.samples() - 1).transpose();
  rep.initial_geodesic = traj.err_axis.row(0).transpose();
  Eigen::Index amax = 0;
  axis.cwiseAbs().maxCoeff(&amax);
  rep.geodesic_axis = static_cast<int>(amax);

  const Eigen::VectorXd r0 = traj.states.front() * axis;
  Eigen::VectorXd w = r0 - axis.dot(r0) * axis;
  const bool have_plane = w.norm() > 1e-12;
  if (have_plane) w.normalize();
  for (const auto& Rm : traj.states) {
    const Eigen::VectorXd r = Rm * axis;
    Eigen::VectorXd out = r - axis.dot(r) * axis;
    if (have_plane) out -= w.dot(r) * w;
    rep.max_deviation = std::max(rep.max_deviation, out.norm());
  }
  (void)n;
  return rep;
}

}  // namespace

GeodesicReport geodesic_deviation(const Trajectory& traj, const ProjectionPair& proj) {
  if (proj.rank() != 1) {
    raise(Errc::rank_mismatch, "great-circle diagnostics need a rank-1 projection");
  }
  if (traj.samples() == 0) raise(Errc::domain_error, "empty trajectory");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj.P());
  const Eigen::VectorXd axis = es.eigenvectors().col(proj.dim() - 1);
  return geodesic_report_from_axis(traj, axis);
}

GeodesicReport geodesic_deviation(const SphereTrajectory& traj) {
  if (traj.samples() == 0) raise(Errc::domain_error, "empty trajectory");
  GeodesicReport rep;
  rep.geodesic_axis = 0;
  rep.max_deviation = *std::max_element(traj.plane_deviation.begin(), traj.plane_deviation.end());
  rep.traveled = Eigen::VectorXd::Constant(1, traj.traveled);
  rep.initial_geodesic = Eigen::VectorXd::Constant(1, traj.geodesic_error.front());
  return rep;
}

}  // namespace geoatt

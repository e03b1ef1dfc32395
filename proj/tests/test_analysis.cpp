#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geoatt/analysis.hpp"
#include "geoatt/linalg.hpp"
#include "oracles.hpp"

using namespace geoatt;
using Eigen::MatrixXd;

namespace {

Eigen::Matrix3d sec8_initial() {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  Eigen::Matrix3d R;
  R << 0, 1 / s3, -2 / s6, 1 / s2, -1 / s3, -1 / s6, -1 / s2, -1 / s3, -1 / s6;
  return R;
}

RotationMatrix diag_rotation(const std::vector<int>& signs) {
  const int n = static_cast<int>(signs.size());
  MatrixXd D = MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = signs[i];
  return validate_rotation(D);
}

// all diagonal +-1 rotations with an even, nonzero number of -1 entries,
// paired with all diagonal projection masks
struct DiagSaddle {
  RotationMatrix R;
  ProjectionPair proj;
  int i, j, m;  // -1 count, -1 count inside range P, rank P
};

std::vector<DiagSaddle> diagonal_saddles(int n, double k) {
  std::vector<DiagSaddle> out;
  for (int rbits = 0; rbits < (1 << n); ++rbits) {
    const int minus = __builtin_popcount(rbits);
    if (minus == 0 || minus % 2 != 0) continue;
    for (int pbits = 0; pbits < (1 << n); ++pbits) {
      std::vector<int> signs(n), mask(n);
      int j = 0;
      for (int b = 0; b < n; ++b) {
        signs[b] = (rbits >> b) & 1 ? -1 : 1;
        mask[b] = (pbits >> b) & 1;
        if (signs[b] == -1 && mask[b] == 1) ++j;
      }
      out.push_back({diag_rotation(signs), ProjectionPair::from_diag_mask(mask, k), minus, j,
                     __builtin_popcount(pbits)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("lyapunov values") {
  CHECK(lyapunov(RotationMatrix::Identity(3)) == 0.0);
  CHECK(lyapunov(diag_rotation({1, -1, -1})) == 4.0);
  const double expected = 3.0 + 1.0 / std::sqrt(3.0) + 1.0 / std::sqrt(6.0);
  CHECK(lyapunov(validate_rotation(sec8_initial())) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("equilibrium classification") {
  const ProjectionPair p1 = ProjectionPair::from_diag_mask({1, 0, 0}, 1.0);
  CHECK(classify_equilibrium(RotationMatrix::Identity(3), p1).kind == EquilibriumKind::identity);

  const auto saddle = classify_equilibrium(diag_rotation({-1, -1, 1}), p1);
  CHECK(saddle.kind == EquilibriumKind::saddle);
  CHECK(saddle.i == 2);

  const auto moved = classify_equilibrium(
      exp_skew(SkewMatrix(oracles::random_skew(3, 5, 0.1))), p1);
  CHECK(moved.kind == EquilibriumKind::non_equilibrium);
  CHECK(moved.stationarity_residual > 1e-8);

  SUBCASE("saddle value ties to the class index") {
    for (int n : {3, 4, 5}) {
      for (const auto& s : diagonal_saddles(n, 1.0)) {
        const auto cls = classify_equilibrium(s.R, s.proj);
        REQUIRE(cls.kind == EquilibriumKind::saddle);
        CHECK(cls.i == s.i);
        CHECK(std::abs(lyapunov(s.R) - 2.0 * cls.i) <= 1e-8);
      }
    }
  }
}

TEST_CASE("linearization at the identity matches the predicted spectrum") {
  SUBCASE("fixed example: n = 3, rank 1, arbitrary k") {
    for (double k : {0.5, 1.0, 2.0, 7.0}) {
      const ProjectionPair proj = ProjectionPair::from_diag_mask({1, 0, 0}, k);
      const MatrixXd F = linearization_matrix(RotationMatrix::Identity(3), proj);
      const ComplexSpectrum s = spectrum(F);
      CHECK(oracles::multiset_distance(
                s.values, {{-1.0, 0.0}, {-1.0, 0.0}, {-2.0 * k, 0.0}}) <= 1e-10);
    }
  }
  SUBCASE("all dimensions, ranks and gains; conjugated projections too") {
    for (int n : {3, 4, 5}) {
      for (int p = 0; p <= n; ++p) {
        for (double k : {0.5, 1.0, 2.0}) {
          std::vector<int> mask(n, 0);
          for (int i = 0; i < p; ++i) mask[i] = 1;
          for (int variant = 0; variant < 2; ++variant) {
            const ProjectionPair proj =
                variant == 0
                    ? ProjectionPair::from_diag_mask(mask, k)
                    : ProjectionPair(oracles::random_projection(n, p, 13 * n + p), k);
            const MatrixXd F = linearization_matrix(RotationMatrix::Identity(n), proj);
            const ComplexSpectrum s = spectrum(F);
            std::vector<std::complex<double>> predicted;
            for (const auto& [lam, mult] : predicted_identity_spectrum(n, p, k)) {
              for (int c = 0; c < mult; ++c) predicted.push_back({lam, 0.0});
            }
            CHECK(oracles::multiset_distance(s.values, predicted) <= 1e-8);
          }
        }
      }
    }
  }
}

TEST_CASE("predicted_identity_spectrum fixed values") {
  using pairs = std::vector<std::pair<double, int>>;
  CHECK(predicted_identity_spectrum(3, 1, 2.0) == pairs{{-4.0, 1}, {-1.0, 2}});
  CHECK(predicted_identity_spectrum(3, 2, 5.0) == pairs{{-2.0, 1}, {-1.0, 2}});
  const auto n5 = predicted_identity_spectrum(5, 2, 1.0);
  // {(-2, 1+3 merged), (-1, 6)}: multiplicities sum to dim so(5) = 10
  int total = 0;
  for (const auto& [lam, mult] : n5) total += mult;
  CHECK(total == 10);
  CHECK(n5 == pairs{{-2.0, 4}, {-1.0, 6}});
}

TEST_CASE("saddle spectra: imaginary axis, instability, counts") {
  for (int n : {3, 4}) {
    for (double k : {0.5, 1.0, 2.0}) {
      for (const auto& s : diagonal_saddles(n, k)) {
        const MatrixXd F = linearization_matrix(s.R, s.proj);
        const ComplexSpectrum spec = spectrum(F);

        double max_re = -1e9;
        int nonzero_re = 0;
        for (const auto& z : spec.values) {
          if (std::abs(z.real()) <= 1e-8) {
            CHECK(std::abs(z) <= 1e-8);  // zero is the only imaginary-axis eigenvalue
          } else {
            ++nonzero_re;
          }
          max_re = std::max(max_re, z.real());
        }

        // exponential instability with the sharp per-class rate
        const bool has_pair_construction = s.j >= 2 || (s.i - s.j) >= 2;
        if (has_pair_construction) {
          CHECK(max_re >= std::min(2.0, 2.0 * k) - 1e-6);
        } else {
          CHECK(max_re >= 1.0 - 1e-6);
        }

        const int expected = unstable_count(n, s.m, s.i, s.j, s.m);
        CHECK(nonzero_re == expected);

        const int d = n * (n - 1) / 2;
        CHECK(d - kernel_dimension(s.R, s.proj) == expected);
        CHECK(kernel_dimension_by_constraints(s.R, s.proj) ==
              kernel_dimension(s.R, s.proj));

        const SaddleParameters sp = extract_saddle_parameters(s.R, s.proj);
        CHECK(sp.well_conditioned);
        CHECK(sp.i == s.i);
        CHECK(sp.j == s.j);
        CHECK(sp.m == s.m);
      }
    }
  }
}

TEST_CASE("linearization spectrum is invariant under frame changes") {
  // conjugating state and gains by a fixed rotation must not move the
  // spectrum, the kernel, or the recovered class parameters
  const Eigen::MatrixXd W = haar_sample(4, 99).matrix();
  Eigen::Vector4d d(-1.0, -1.0, 1.0, 1.0);
  const Eigen::MatrixXd Rd = d.asDiagonal();
  const Eigen::MatrixXd Pd = Eigen::Vector4d(1, 0, 1, 0).asDiagonal();
  const double k = 1.3;

  const RotationMatrix R1 = validate_rotation(Rd);
  const ProjectionPair p1(Pd, k);
  const RotationMatrix R2 = validate_rotation(W * Rd * W.transpose(), 1e-8);
  const ProjectionPair p2(0.5 * (W * Pd * W.transpose() +
                                 (W * Pd * W.transpose()).transpose().eval()),
                          k, 1e-10);

  const auto s1 = spectrum(linearization_matrix(R1, p1));
  const auto s2 = spectrum(linearization_matrix(R2, p2));
  CHECK(oracles::multiset_distance(s1.values, s2.values) <= 1e-7);
  CHECK(kernel_dimension(R1, p1) == kernel_dimension(R2, p2));

  const auto sp1 = extract_saddle_parameters(R1, p1);
  const auto sp2 = extract_saddle_parameters(R2, p2);
  CHECK(sp2.well_conditioned);
  CHECK(sp1.i == sp2.i);
  CHECK(sp1.j == sp2.j);
  CHECK(sp1.m == sp2.m);
}

TEST_CASE("unstable_count: corrected closed form and guards") {
  // values cross-checked against eigenvalue counts of the linearization; the
  // tempting shortcut C(n,2) - j(m-j) - (i-j)(n-m) drops an (i-j)^2 term
  CHECK(unstable_count(3, 1, 2, 1, 1) == 2);
  CHECK(unstable_count(3, 1, 2, 0, 1) == 3);
  CHECK(unstable_count(4, 2, 2, 1, 2) == 4);
  CHECK(unstable_count(3, 3, 2, 2, 3) == 1);  // P = I: one +2 pair, two kernel directions

  CHECK_THROWS_AS(unstable_count(3, 1, 2, 2, 1), Error);   // j > min(i, m)
  CHECK_THROWS_AS(unstable_count(3, 1, 3, 1, 1), Error);   // odd i
  CHECK_THROWS_AS(unstable_count(3, 2, 2, 0, 1), Error);   // m != rank P
  CHECK_THROWS_AS(unstable_count(4, 3, 4, 1, 3), Error);   // i - j > n - m
}

TEST_CASE("kernel dimension: identity and fixed saddles") {
  const ProjectionPair p1 = ProjectionPair::from_diag_mask({1, 0, 0}, 1.0);
  CHECK(kernel_dimension(RotationMatrix::Identity(3), p1) == 0);

  CHECK(kernel_dimension(diag_rotation({1, -1, -1}), p1) == 0);
  CHECK(kernel_dimension(diag_rotation({-1, 1, -1}), p1) == 1);

  const ProjectionPair p2 = ProjectionPair::from_diag_mask({1, 1, 0, 0}, 1.0);
  const RotationMatrix R4 = diag_rotation({-1, -1, 1, 1});
  CHECK(kernel_dimension(R4, p2) == kernel_dimension_by_constraints(R4, p2));

  CHECK_THROWS_AS(kernel_dimension(haar_sample(3, 3), p1), Error);
}

TEST_CASE("monte carlo basin: forced starts") {
  const ProjectionPair proj = ProjectionPair::from_diag_mask({0, 1, 0}, 1.0);
  BasinParams params;
  params.t_max = 5.0;
  params.threads = 1;

  SUBCASE("identity start converges") {
    params.forced_R0 = MatrixXd::Identity(3, 3);
    const BasinReport rep = monte_carlo_basin(proj, 1, 7, params);
    CHECK(rep.converged == 1);
    CHECK(rep.failures.empty());
  }
  SUBCASE("saddle start fails and is reported") {
    Eigen::Vector3d d(1.0, -1.0, -1.0);
    params.forced_R0 = MatrixXd(d.asDiagonal());
    const BasinReport rep = monte_carlo_basin(proj, 1, 7, params);
    CHECK(rep.converged == 0);
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].final_V == doctest::Approx(4.0).epsilon(1e-10));
  }
}

TEST_CASE("monte carlo basin: deterministic in seed, independent of threads") {
  const ProjectionPair proj = ProjectionPair::from_diag_mask({0, 1, 0}, 1.0);
  BasinParams p1;
  p1.t_max = 30.0;
  p1.threads = 1;
  BasinParams p4 = p1;
  p4.threads = 4;
  const BasinReport a = monte_carlo_basin(proj, 16, 12345, p1);
  const BasinReport b = monte_carlo_basin(proj, 16, 12345, p4);
  CHECK(a.converged == 16);
  CHECK(a.converged == b.converged);
  CHECK(a.failures.size() == b.failures.size());
}

TEST_CASE("monotone separation below the first saddle level") {
  // once V drops below V|saddle = 4, the run can only end at the identity
  for (std::uint64_t seed : {3ULL, 11ULL, 42ULL}) {
    SimulationSpec spec{{ProjectionPair::from_diag_mask({0, 1, 0}, 1.0)},
                        haar_sample(3, seed), 1e-3, 40.0, 1e-9, Method::lie_rk4, 10};
    const Trajectory traj = simulate(spec);
    bool below = false;
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      if (traj.V[s] < 4.0 - 1e-6) {
        below = true;
        break;
      }
    }
    CHECK(below);
    CHECK(traj.converged);
  }
}

TEST_CASE("geodesic report on a constant trajectory") {
  SimulationSpec spec{{ProjectionPair::from_diag_mask({1, 0, 0}, 1.0)},
                      RotationMatrix::Identity(3), 1e-3, 1.0, 1e-9};
  const Trajectory traj = simulate(spec);
  const GeodesicReport rep = geodesic_deviation(traj, spec.cfg.proj);
  CHECK(rep.max_deviation == 0.0);
  CHECK(rep.traveled.norm() == 0.0);
  CHECK(rep.initial_geodesic.norm() == 0.0);

  CHECK_THROWS_AS(geodesic_deviation(traj, ProjectionPair::from_diag_mask({1, 1, 0}, 1.0)),
                  Error);
}

TEST_CASE("reduced-trajectory geodesic report") {
  const SphereTrajectory traj = simulate_reduced(UnitVector::axis(3, 1), 1e-3, 12.0);
  const GeodesicReport rep = geodesic_deviation(traj);
  CHECK(rep.max_deviation <= 1e-9);
  CHECK(std::abs(rep.traveled(0) - rep.initial_geodesic(0)) <= 1e-4);
}

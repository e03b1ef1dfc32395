#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geoatt/exact.hpp"
#include "geoatt/feedback.hpp"
#include "geoatt/integrator.hpp"
#include "geoatt/linalg.hpp"
#include "oracles.hpp"

using namespace geoatt;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector2d;

namespace {

Matrix3d sec8_initial() {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  Matrix3d R;
  R << 0, 1 / s3, -2 / s6, 1 / s2, -1 / s3, -1 / s6, -1 / s2, -1 / s3, -1 / s6;
  return R;
}

// permuted so the projection axis is the first coordinate
Matrix3d sec8_aligned() {
  Eigen::PermutationMatrix<3> perm;
  perm.indices() << 1, 0, 2;  // swaps coordinates 1 and 2
  Matrix3d T = perm.toDenseMatrix().cast<double>();
  return T * sec8_initial() * T.transpose();
}

// ambient RK4 oracle for Hdot = P - H^2
MatrixXd oracle_H(const MatrixXd& P, const MatrixXd& H0, double t, int steps) {
  return oracles::rk4([&](double, const MatrixXd& H) { return (P - H * H).eval(); }, H0, 0.0, t,
                      steps);
}

}  // namespace

TEST_CASE("exact_H: equilibria stay put") {
  const ProjectionPair proj = ProjectionPair::from_diag_mask({1, 0, 0}, 1.0);
  const MatrixXd P = proj.P();
  for (double t : {0.0, 0.5, 3.0, 20.0}) {
    CHECK((exact_H(t, proj, P) - P).norm() <= 1e-12);
    CHECK((exact_H(t, proj, (-P).eval()) + P).norm() <= 1e-12);
  }
}

TEST_CASE("exact_H matches the matrix ODE oracle") {
  SUBCASE("printed instance, aligned coordinates") {
    const ProjectionPair proj = ProjectionPair::from_diag_mask({1, 0, 0}, 1.0);
    const MatrixXd H0 = sec8_aligned() * proj.P();
    for (double t : {0.5, 1.0, 2.0}) {
      const MatrixXd expected = oracle_H(proj.P(), H0, t, 4000);
      CHECK((exact_H(t, proj, H0) - expected).norm() <= 1e-8);
    }
  }
  SUBCASE("random instances across dimensions and ranks") {
    for (int n : {3, 4, 5}) {
      for (int rank = 1; rank <= n; ++rank) {
        const std::uint64_t seed = 17 * n + rank;
        const ProjectionPair proj(oracles::random_projection(n, rank, seed), 1.0);
        const MatrixXd H0 = haar_sample(n, 1000 + seed).matrix() * proj.P();
        const double t = 0.8;
        CHECK((exact_H(t, proj, H0) - oracle_H(proj.P(), H0, t, 4000)).norm() <= 1e-8);
      }
    }
  }
}

TEST_CASE("exact_H satisfies its differential equation by finite differences") {
  for (int n : {3, 4, 5}) {
    for (int rank = 1; rank <= n; ++rank) {
      const std::uint64_t seed = 31 * n + rank;
      const ProjectionPair proj(oracles::random_projection(n, rank, seed), 1.0);
      const MatrixXd H0 = haar_sample(n, 500 + seed).matrix() * proj.P();
      for (double t : {0.3, 1.0, 2.7}) {
        const MatrixXd dH = oracles::central_difference(
            [&](double s) { return exact_H(s, proj, H0); }, t, 1e-5);
        const MatrixXd H = exact_H(t, proj, H0);
        CHECK((dH - (proj.P() - H * H)).norm() <= 1e-6);
      }
    }
  }
}

TEST_CASE("exact_H converges to the projection for admissible starts") {
  for (int n : {3, 4, 5}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const RotationMatrix R0 = haar_sample(n, 7000 + 13 * n + seed);
      if (in_negative_spectrum_set(R0, 1e-6)) continue;
      const int rank = 1 + static_cast<int>(seed) % n;
      const ProjectionPair proj(oracles::random_projection(n, rank, 100 + seed), 1.0);
      CHECK((exact_H(20.0, proj, R0.matrix() * proj.P()) - proj.P()).norm() <= 1e-6);
    }
  }
}

TEST_CASE("exact_r11: fixed values and the scalar ODE oracle") {
  CHECK(exact_r11(1.0, 0.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(exact_r11(5.0, 1.0) == 1.0);
  CHECK_THROWS_AS(exact_r11(1.0, -1.0), Error);

  const double x0 = -1.0 / std::sqrt(3.0);  // printed instance after alignment
  CHECK(sec8_aligned()(0, 0) == doctest::Approx(x0).epsilon(1e-15));
  for (double t : {0.5, 2.0}) {
    const double expected =
        oracles::rk4_scalar([](double, double x) { return 1.0 - x * x; }, x0, 0.0, t, 20000);
    CHECK(std::abs(exact_r11(t, x0) - expected) <= 1e-10);
  }
}

TEST_CASE("exact_r21: fixed values and the vector ODE oracle") {
  const double x0 = sec8_aligned()(0, 0);
  const Vector2d r21_0 = sec8_aligned().block<2, 1>(1, 0);

  CHECK(exact_r21(3.0, Vector2d::Zero(), 0.3).norm() == 0.0);
  CHECK((exact_r21(0.0, r21_0, x0) - r21_0).norm() == 0.0);

  // coupled oracle: x' = 1 - x^2, r21' = -x r21
  const double t = 1.0;
  Eigen::Vector3d state(x0, r21_0(0), r21_0(1));
  state = oracles::rk4(
      [](double, const Eigen::Vector3d& s) {
        return Eigen::Vector3d(1.0 - s(0) * s(0), -s(0) * s(1), -s(0) * s(2));
      },
      state, 0.0, t, 20000);
  CHECK((exact_r21(t, r21_0, x0) - state.tail<2>()).norm() <= 1e-10);

  SUBCASE("unit first column when inputs come from a rotation") {
    for (double s : {0.5, 1.0, 4.0}) {
      const double r11 = exact_r11(s, x0);
      const Vector2d r21 = exact_r21(s, r21_0, x0);
      CHECK(std::abs(r11 * r11 + r21.squaredNorm() - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("exact_traces: equilibrium and initial conditions") {
  SUBCASE("identity start") {
    const auto params = ExactSo3Params::from_initial(Matrix3d::Identity(), 1.0);
    for (double t : {0.0, 1.0, 10.0}) {
      const auto [tr, trS] = exact_traces(t, params);
      CHECK(tr == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(trS == 0.0);
    }
  }
  SUBCASE("t = 0 recovers the initial block traces") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const RotationMatrix R0 = haar_sample(3, 2000 + seed);
      if (in_negative_spectrum_set(R0, 1e-6)) continue;
      const double k = 0.5 + (seed % 4) * 0.5;
      const auto params = ExactSo3Params::from_initial(R0.matrix(), k);
      const auto [tr, trS] = exact_traces(0.0, params);
      const So3Blocks b = So3Blocks::split(R0.matrix());
      CHECK(std::abs(tr - b.R22.trace()) <= 1e-12);
      CHECK(std::abs(trS - (b.R22 * kSpin2).trace()) <= 1e-12);
    }
  }
}

TEST_CASE("exact_traces matches the coupled scalar ODE oracle") {
  // tau' = k(1+x)^2 + (1-x) tau - k tau^2,  sigma' = (1 - x - k tau) sigma,
  // with x(t) the scalar closed form; this pins down the formula variant.
  auto oracle = [](const Matrix3d& R0a, double k, double t) {
    const So3Blocks b = So3Blocks::split(R0a);
    const double x0 = b.r11;
    Eigen::Vector3d s(x0, b.R22.trace(), (b.R22 * kSpin2).trace());
    return oracles::rk4(
        [k](double, const Eigen::Vector3d& v) {
          const double x = v(0), tau = v(1), sig = v(2);
          return Eigen::Vector3d(1.0 - x * x,
                                 k * (1.0 + x) * (1.0 + x) + (1.0 - x) * tau - k * tau * tau,
                                 (1.0 - x - k * tau) * sig);
        },
        s, 0.0, t, 40000);
  };

  SUBCASE("printed instance") {
    for (double k : {1.0, 0.5, 2.0}) {
      const auto params = ExactSo3Params::from_initial(sec8_aligned(), k);
      for (double t : {0.5, 1.0, 2.0}) {
        const Eigen::Vector3d ref = oracle(sec8_aligned(), k, t);
        const auto [tr, trS] = exact_traces(t, params);
        CHECK(std::abs(tr - ref(1)) <= 1e-8);
        CHECK(std::abs(trS - ref(2)) <= 1e-8);
      }
    }
  }
  SUBCASE("random instances") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      const RotationMatrix R0 = haar_sample(3, 4000 + seed);
      if (in_negative_spectrum_set(R0, 1e-4)) continue;
      const double k = 0.5 + (seed % 4) * 0.5;
      const auto params = ExactSo3Params::from_initial(R0.matrix(), k);
      const Eigen::Vector3d ref = oracle(R0.matrix(), k, 1.3);
      const auto [tr, trS] = exact_traces(1.3, params);
      CHECK(std::abs(tr - ref(1)) <= 1e-8);
      CHECK(std::abs(trS - ref(2)) <= 1e-8);
    }
  }
  SUBCASE("block-trace identity along the solution") {
    const auto params = ExactSo3Params::from_initial(sec8_aligned(), 1.0);
    for (double t : {0.0, 0.4, 1.1, 3.0, 8.0}) {
      const double x = exact_r11(t, params.r11_0);
      const auto [tr, trS] = exact_traces(t, params);
      CHECK(std::abs(tr * tr + trS * trS - (1.0 + x) * (1.0 + x)) <= 1e-8);
    }
  }
}

TEST_CASE("exact_traces satisfies its differential equations by finite differences") {
  for (std::uint64_t seed : {3ULL, 9ULL}) {
    const RotationMatrix R0 = haar_sample(3, 4100 + seed);
    if (in_negative_spectrum_set(R0, 1e-4)) continue;
    const double k = seed == 3 ? 1.0 : 2.0;
    const auto params = ExactSo3Params::from_initial(R0.matrix(), k);
    for (double t : {0.4, 1.5}) {
      const double h = 1e-5;
      const auto [tr, trS] = exact_traces(t, params);
      const double x = exact_r11(t, params.r11_0);
      const double dtr =
          (exact_traces(t + h, params).trR22 - exact_traces(t - h, params).trR22) / (2 * h);
      const double dtrS =
          (exact_traces(t + h, params).trR22S - exact_traces(t - h, params).trR22S) / (2 * h);
      CHECK(std::abs(dtr - (k * (1 + x) * (1 + x) + (1 - x) * tr - k * tr * tr)) <= 1e-6);
      CHECK(std::abs(dtrS - (1 - x - k * tr) * trS) <= 1e-6);
    }
  }
}

TEST_CASE("reconstruct_R: identity and initial data") {
  const auto id_params = ExactSo3Params::from_initial(Matrix3d::Identity(), 1.0);
  for (double t : {0.0, 1.0, 6.0}) {
    const FirstColumn col{exact_r11(t, 1.0), exact_r21(t, Vector2d::Zero(), 1.0)};
    CHECK((reconstruct_R(t, id_params, col).matrix() - Matrix3d::Identity()).norm() <= 1e-12);
  }

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RotationMatrix R0 = haar_sample(3, 4200 + seed);
    if (in_negative_spectrum_set(R0, 1e-4)) continue;
    const auto params = ExactSo3Params::from_initial(R0.matrix(), 1.0);
    const FirstColumn col{R0.matrix()(0, 0), R0.matrix().block<2, 1>(1, 0)};
    CHECK((reconstruct_R(0.0, params, col).matrix() - R0.matrix()).norm() <= 1e-10);
  }
}

TEST_CASE("So3Blocks splits and reassembles rotations") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix3d R = haar_sample(3, 60000 + seed).matrix();
    const So3Blocks b = So3Blocks::split(R);
    CHECK((b.assemble() - R).norm() == 0.0);
    CHECK_NOTHROW(validate_rotation(b.assemble(), 1e-9));
  }
}

TEST_CASE("verify_block_relations") {
  const BlockResiduals id = verify_block_relations(RotationMatrix::Identity(3));
  CHECK(id.outer_product == 0.0);
  CHECK(id.pythagorean == 0.0);
  CHECK(id.block_skew == 0.0);

  const BlockResiduals s8 = verify_block_relations(validate_rotation(sec8_initial()));
  CHECK(s8.outer_product <= 1e-12);
  CHECK(s8.pythagorean <= 1e-12);
  CHECK(s8.block_skew <= 1e-12);

  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const BlockResiduals r = verify_block_relations(haar_sample(3, 50000 + seed));
    worst = std::max({worst, r.outer_product, r.pythagorean, r.block_skew});
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("first-column consistency between the scalar solutions and exact_H") {
  const ProjectionPair proj = ProjectionPair::from_diag_mask({1, 0, 0}, 1.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RotationMatrix R0 = haar_sample(3, 4300 + seed);
    if (in_negative_spectrum_set(R0, 1e-4)) continue;
    const double x0 = R0.matrix()(0, 0);
    const Vector2d r21_0 = R0.matrix().block<2, 1>(1, 0);
    for (double t : {0.5, 2.0}) {
      const MatrixXd H = exact_H(t, proj, R0.matrix() * proj.P());
      CHECK(std::abs(H(0, 0) - exact_r11(t, x0)) <= 1e-10);
      CHECK((H.block<2, 1>(1, 0) - exact_r21(t, r21_0, x0)).norm() <= 1e-10);
    }
  }
}

TEST_CASE("ExactSo3Solution agrees with the integrator for every projection rank") {
  const Matrix3d R0m = sec8_initial();

  auto check_rank = [&](const ProjectionPair& proj, const RotationMatrix& R0, double tol) {
    const ExactSo3Solution exact(R0, proj);
    SimulationSpec spec{{proj}, R0, 1e-4, 2.5, 0.0, Method::lie_rk4, 1000};
    const Trajectory traj = simulate(spec);
    double worst = 0.0;
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      worst = std::max(worst, (exact.at(traj.times[s]).matrix() - traj.states[s]).norm());
    }
    CHECK(worst <= tol);
  };

  SUBCASE("rank 1, printed instance (axis permuted internally)") {
    check_rank(ProjectionPair::from_diag_mask({0, 1, 0}, 1.0), validate_rotation(R0m), 1e-6);
  }
  SUBCASE("rank 1, random axis and gains") {
    for (std::uint64_t seed : {2ULL, 8ULL, 15ULL}) {
      const RotationMatrix R0 = haar_sample(3, 4400 + seed);
      if (in_negative_spectrum_set(R0, 1e-4)) continue;
      geoatt::GaussianSampler rng(seed);
      Eigen::Vector3d axis(rng.next(), rng.next(), rng.next());
      const double k = 0.5 + (seed % 4) * 0.5;
      check_rank(ProjectionPair::rank_one(axis, k), R0, 1e-6);
    }
  }
  SUBCASE("rank 2: the k-term drops out") {
    for (double k : {0.7, 2.0}) {
      check_rank(ProjectionPair::from_diag_mask({1, 0, 1}, k), validate_rotation(R0m), 1e-6);
    }
  }
  SUBCASE("rank 0 and rank 3") {
    check_rank(ProjectionPair(MatrixXd::Identity(3, 3), 1.0), validate_rotation(R0m), 1e-6);
    check_rank(ProjectionPair(MatrixXd::Zero(3, 3), 1.7), validate_rotation(R0m), 1e-6);
  }
  SUBCASE("figure times on the printed instance against a fine reference") {
    const ProjectionPair proj = ProjectionPair::from_diag_mask({0, 1, 0}, 1.0);
    const RotationMatrix R0 = validate_rotation(R0m);
    const ExactSo3Solution exact(R0, proj);
    SimulationSpec spec{{proj}, R0, 1e-4, 2.4, 0.0, Method::lie_rk4, 1};
    const Trajectory traj = simulate(spec);
    for (double t : {0.6, 1.2, 2.4}) {
      const auto idx = static_cast<std::size_t>(std::llround(t / 1e-4));
      REQUIRE(idx < traj.samples());
      CHECK((exact.at(t).matrix() - traj.states[idx]).norm() <= 1e-6);
    }
  }
}

TEST_CASE("reconstructed solution satisfies the full block system") {
  // rdot12 = r12 [-r11 I + k (R22^T - R22)],
  // Rdot22 = -r21 r12 + k R22 (R22^T - R22),
  // checked by finite differences on the aligned closed-form solution
  for (std::uint64_t seed : {2ULL, 6ULL}) {
    const RotationMatrix R0 = haar_sample(3, 4700 + seed);
    if (in_negative_spectrum_set(R0, 1e-4)) continue;
    const double k = seed == 2 ? 1.0 : 0.7;
    const ProjectionPair proj = ProjectionPair::from_diag_mask({1, 0, 0}, k);
    const ExactSo3Solution exact(R0, proj);
    auto aligned_at = [&](double t) {
      return Matrix3d(exact.alignment() * exact.at(t).matrix() * exact.alignment().transpose());
    };
    const double h = 1e-5;
    for (double t : {0.3, 1.4}) {
      const So3Blocks b = So3Blocks::split(aligned_at(t));
      const Matrix3d dR = oracles::central_difference(aligned_at, t, h);
      const Eigen::RowVector2d dr12_expected =
          b.r12 * (-b.r11 * Eigen::Matrix2d::Identity() + k * (b.R22.transpose() - b.R22));
      CHECK((dR.block<1, 2>(0, 1) - dr12_expected).norm() <= 1e-6);
      const Eigen::Matrix2d dR22_expected =
          -b.r21 * b.r12 + k * b.R22 * (b.R22.transpose() - b.R22);
      CHECK((dR.block<2, 2>(1, 1) - dR22_expected).norm() <= 1e-6);
    }
  }
}

TEST_CASE("closed form agrees with the projected integrator as well") {
  // independent of the Lie-algebra stepping used everywhere else
  const RotationMatrix R0 = haar_sample(3, 4600);
  const ProjectionPair proj = ProjectionPair::rank_one(Eigen::Vector3d(1, 2, -1), 1.0);
  const ExactSo3Solution exact(R0, proj);
  SimulationSpec spec{{proj}, R0, 1e-4, 2.0, 0.0, Method::rk4_project, 2000};
  const Trajectory traj = simulate(spec);
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    CHECK((exact.at(traj.times[s]).matrix() - traj.states[s]).norm() <= 1e-6);
  }
}

TEST_CASE("starts with -1 in the spectrum are rejected") {
  Eigen::Vector3d d(-1.0, 1.0, -1.0);
  const RotationMatrix bad = validate_rotation(MatrixXd(d.asDiagonal()));
  const ProjectionPair proj = ProjectionPair::from_diag_mask({1, 0, 0}, 1.0);
  CHECK_THROWS_AS(ExactSo3Solution(bad, proj), Error);
  CHECK_THROWS_AS(ExactSo3Params::from_initial(Matrix3d(d.asDiagonal()), 1.0), Error);
}

TEST_CASE("r11 = 1 with a nonzero column tail is not a rotation and is rejected") {
  Matrix3d M = Matrix3d::Identity();
  M(1, 0) = 0.3;  // breaks the unit first column
  CHECK_THROWS_AS(ExactSo3Params::from_initial(M, 1.0), Error);
}

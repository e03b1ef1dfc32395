#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "geoatt/integrator.hpp"
#include "geoatt/types.hpp"

namespace geoatt {

enum class EquilibriumKind { identity, saddle, non_equilibrium };

struct EquilibriumClass {
  EquilibriumKind kind = EquilibriumKind::non_equilibrium;
  int i = 0;  // V = 2i on the saddle components, i even
  double symmetry_residual = 0.0;      // ||R^T - R||_F
  double commutation_residual = 0.0;   // ||R P - P R||_F
  double stationarity_residual = 0.0;  // ||closed_loop_rhs||_F
};

/// V(R) = trace(I - R); zero exactly at the identity, non-increasing along
/// the closed loop.
double lyapunov(const RotationMatrix& R);

/// identity / saddle(i) / non_equilibrium, by thresholding the symmetry,
/// commutation and stationarity residuals at tol.
EquilibriumClass classify_equilibrium(const RotationMatrix& R, const ProjectionPair& proj,
                                      double tol = 1e-8);

/// Matrix of the linearized flow X -> -X P R - R P X + k R Q (X^T - X) Q,
/// X = S R, in the orthonormal basis {(e_a e_b^T - e_b e_a^T)/sqrt(2) * R},
/// a < b lexicographic. Dimension n(n-1)/2. Requires an equilibrium
/// (Errc::not_an_equilibrium).
Eigen::MatrixXd linearization_matrix(const RotationMatrix& R, const ProjectionPair& proj);

/// Predicted spectrum of the linearization at the identity:
/// {(-2, C(p,2)), (-1, p(n-p)), (-2k, C(n-p,2))}. Coinciding eigenvalues are
/// merged; zero multiplicities dropped. Multiplicities sum to n(n-1)/2.
std::vector<std::pair<double, int>> predicted_identity_spectrum(int n, int p, double k);

/// Number of nonzero eigenvalues of the linearization at a saddle whose
/// -1-eigenspace splits as j directions inside range(P) and i-j inside
/// range(Q), with m = rank P:
///   C(j,2) + C(m-j,2) + m(n-m) + C(i-j,2) + C(n-m-(i-j),2)
///     = C(n,2) - j(m-j) - (i-j)(n-m-(i-j)).
/// Both forms are evaluated and must agree. Errc::inconsistent_parameters for
/// parameter sets that correspond to no equilibrium.
int unstable_count(int n, int p, int i, int j, int m);

/// Decomposition parameters (i, j, m) of a saddle equilibrium, recovered
/// basis-independently: i = dim of the -1-eigenspace of R, j = trace of P
/// restricted to it, m = rank P. well_conditioned is false when R's spectrum
/// strays from +-1 or the restricted trace is far from an integer.
struct SaddleParameters {
  int i = 0, j = 0, m = 0;
  bool well_conditioned = false;
};
SaddleParameters extract_saddle_parameters(const RotationMatrix& R, const ProjectionPair& proj);

/// Nullity of the linearization matrix: singular values below 1e-8 times the
/// largest count as zero. The kernel does not depend on k.
int kernel_dimension(const RotationMatrix& R, const ProjectionPair& proj);

/// Independent count of the same space: dim{S in so(n) : SR + RS = 0,
/// PS - SP = 0}, from the rank of the stacked constraint system.
int kernel_dimension_by_constraints(const RotationMatrix& R, const ProjectionPair& proj);

struct BasinReport {
  int samples = 0;
  int converged = 0;
  struct Failure {
    int index;
    std::uint64_t seed;
    double final_V;
  };
  std::vector<Failure> failures;
  double t_max = 0, dt = 0, stop_V = 0;
};

struct BasinParams {
  double dt = 1e-3;
  double t_max = 40.0;
  double stop_V = 1e-9;
  Method method = Method::lie_rk4;
  int threads = 0;  // 0: GEOATT_THREADS env or hardware concurrency
  std::optional<Eigen::MatrixXd> forced_R0;  // use this start instead of Haar samples
};

/// Draws Haar samples (sub-seeded deterministically from seed), simulates
/// each, and counts runs reaching V < stop_V. Fan-out is parallel; the merge
/// is by sample index, so the report is deterministic in (seed, samples).
BasinReport monte_carlo_basin(const ProjectionPair& proj, int samples, std::uint64_t seed,
                              const BasinParams& params = {});

struct GeodesicReport {
  double max_deviation = 0.0;           // out-of-plane component of the steered axis
  int geodesic_axis = 0;                // standard axis closest to the projection axis
  Eigen::VectorXd traveled;             // per standard axis
  Eigen::VectorXd initial_geodesic;     // arccos R_ii(0)
};

/// Great-circle diagnostics of a full-attitude run under a rank-1 projection
/// (Errc::rank_mismatch otherwise).
GeodesicReport geodesic_deviation(const Trajectory& traj, const ProjectionPair& proj);
GeodesicReport geodesic_deviation(const SphereTrajectory& traj);

}  // namespace geoatt

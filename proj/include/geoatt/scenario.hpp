#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "geoatt/integrator.hpp"
#include "geoatt/types.hpp"

#include <json.hpp>

namespace geoatt {

/// A reproducible scenario: gains, initial condition, integration parameters
/// and output destination. Loadable from a single JSON document with a
/// "preset" escape hatch; CLI flags override individual fields.
struct ScenarioConfig {
  int n = 3;
  Eigen::MatrixXd P;         // projection (validated on use)
  double k = 1.0;
  Eigen::MatrixXd R0;        // explicit initial rotation
  std::optional<std::uint64_t> r0_haar_seed;  // alternative: Haar draw
  // true when R0 came from the user's config (not a preset); montecarlo only
  // pins its samples to R0 in that case
  bool r0_explicit = false;
  double dt = 1e-3;
  double t_max = 10.0;
  double stop_V = 1e-9;
  Method method = Method::lie_rk4;
  std::string out;
  std::string format = "csv";  // csv | json
  int samples = 1000;
  std::uint64_t seed = 1;
  double figure_density = 200.0;  // path points per unit time in figure data

  static ScenarioConfig paper_sec8();
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Resolves R0 (explicit matrix, Haar seed, or identity default) and
  /// validates everything. Throws Errc::config_error with a field diagnostic.
  RotationMatrix initial_rotation() const;
  ProjectionPair projection() const;
  SimulationSpec simulation_spec() const;
};

/// Shortest round-trip decimal text for a double.
std::string format_double(double x);

/// Writes the trajectory time series with the fixed column schema
/// t, r11..rnn (row-major), V, Vdot, u_norm_sq, err_axis_i, dist_axis_i,
/// ortho_resid.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_trajectory_json(const Trajectory& traj, const std::string& path);

struct TrajectoryFile {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

TrajectoryFile read_trajectory_csv(const std::string& path);

}  // namespace geoatt

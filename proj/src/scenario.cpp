#include "geoatt/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "geoatt/linalg.hpp"

namespace geoatt {

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) raise(Errc::config_error, field + ": expected a matrix");
  const auto rows = j.size();
  const auto cols = j[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) raise(Errc::config_error, field + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> trajectory_columns(int n) {
  std::vector<std::string> cols = {"t"};
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) cols.push_back("r" + std::to_string(i) + std::to_string(j));
  cols.insert(cols.end(), {"V", "Vdot", "u_norm_sq"});
  for (int i = 1; i <= n; ++i) cols.push_back("err_axis_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) cols.push_back("dist_axis_" + std::to_string(i));
  cols.push_back("ortho_resid");
  return cols;
}

std::vector<double> trajectory_row(const Trajectory& traj, std::size_t s) {
  const int n = traj.n;
  std::vector<double> row;
  row.reserve(2 + n * n + 2 * n + 2);
  row.push_back(traj.times[s]);
  const Eigen::MatrixXd& R = traj.states[s];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) row.push_back(R(i, j));
  row.push_back(traj.V[s]);
  row.push_back(traj.Vdot[s]);
  row.push_back(traj.normU_sq[s]);
  for (int i = 0; i < n; ++i) row.push_back(traj.err_axis(s, i));
  for (int i = 0; i < n; ++i) row.push_back(traj.dist_axis(s, i));
  row.push_back(traj.ortho_residual[s]);
  return row;
}

}  // namespace

ScenarioConfig ScenarioConfig::paper_sec8() {
  ScenarioConfig cfg;
  cfg.n = 3;
  cfg.P = Eigen::Vector3d(0, 1, 0).asDiagonal();
  cfg.k = 1.0;
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  cfg.R0.resize(3, 3);
  cfg.R0 << 0, 1 / s3, -2 / s6,
      1 / s2, -1 / s3, -1 / s6,
      -1 / s2, -1 / s3, -1 / s6;
  cfg.dt = 1e-3;
  cfg.t_max = 10.0;
  cfg.stop_V = 1e-9;
  cfg.method = Method::lie_rk4;
  return cfg;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j["preset"].get<std::string>();
    if (preset != "paper-sec8") raise(Errc::config_error, "preset: unknown preset '" + preset + "'");
    cfg = paper_sec8();
  }
  if (j.contains("n")) cfg.n = j["n"].get<int>();
  if (cfg.n < 2) raise(Errc::config_error, "n: must be >= 2");

  if (j.contains("P")) {
    const auto& p = j["P"];
    if (p.is_object() && p.contains("diag")) {
      const auto mask = p["diag"].get<std::vector<int>>();
      if (static_cast<int>(mask.size()) != cfg.n) raise(Errc::config_error, "P.diag: wrong length");
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(cfg.n, cfg.n);
      for (int i = 0; i < cfg.n; ++i) P(i, i) = mask[i];
      cfg.P = P;
    } else if (p.is_object() && p.contains("matrix")) {
      cfg.P = matrix_from_json(p["matrix"], "P.matrix");
    } else {
      cfg.P = matrix_from_json(p, "P");
    }
  }
  if (j.contains("k")) cfg.k = j["k"].get<double>();

  if (j.contains("R0")) {
    cfg.r0_explicit = true;
    const auto& r = j["R0"];
    if (r.is_string()) {
      const std::string s = r.get<std::string>();
      if (s == "identity") {
        cfg.R0 = Eigen::MatrixXd::Identity(cfg.n, cfg.n);
      } else if (s == "paper-sec8") {
        cfg.R0 = paper_sec8().R0;
      } else {
        raise(Errc::config_error, "R0: unknown preset '" + s + "'");
      }
    } else if (r.is_object() && r.contains("haar_seed")) {
      cfg.r0_haar_seed = r["haar_seed"].get<std::uint64_t>();
      cfg.R0.resize(0, 0);
    } else if (r.is_object() && r.contains("matrix")) {
      cfg.R0 = matrix_from_json(r["matrix"], "R0.matrix");
    } else {
      cfg.R0 = matrix_from_json(r, "R0");
    }
  }

  if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
  if (j.contains("t_max")) cfg.t_max = j["t_max"].get<double>();
  if (j.contains("stop_V")) cfg.stop_V = j["stop_V"].get<double>();
  if (j.contains("method")) cfg.method = method_from_string(j["method"].get<std::string>());
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (j.contains("format")) cfg.format = j["format"].get<std::string>();
  if (j.contains("samples")) cfg.samples = j["samples"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("figure_density")) cfg.figure_density = j["figure_density"].get<double>();

  if (cfg.format != "csv" && cfg.format != "json") {
    raise(Errc::config_error, "format: expected csv or json");
  }
  return cfg;
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["P"] = matrix_to_json(P);
  j["k"] = k;
  if (r0_haar_seed) {
    j["R0"] = {{"haar_seed", *r0_haar_seed}};
  } else if (R0.size() > 0) {
    j["R0"] = matrix_to_json(R0);
  }
  j["dt"] = dt;
  j["t_max"] = t_max;
  j["stop_V"] = stop_V;
  j["method"] = method_name(method);
  if (!out.empty()) j["out"] = out;
  j["format"] = format;
  j["samples"] = samples;
  j["seed"] = seed;
  j["figure_density"] = figure_density;
  return j;
}

RotationMatrix ScenarioConfig::initial_rotation() const {
  if (r0_haar_seed) return haar_sample(n, *r0_haar_seed);
  if (R0.size() == 0) return RotationMatrix::Identity(n);
  if (R0.rows() != n || R0.cols() != n) raise(Errc::config_error, "R0: wrong dimensions");
  return validate_rotation(R0, kRotationTol);
}

ProjectionPair ScenarioConfig::projection() const {
  if (P.size() == 0) raise(Errc::config_error, "P: missing projection");
  if (P.rows() != n || P.cols() != n) raise(Errc::config_error, "P: wrong dimensions");
  try {
    return ProjectionPair(P, k);
  } catch (const Error& e) {
    raise(Errc::config_error, std::string("P/k: ") + e.what());
  }
}

SimulationSpec ScenarioConfig::simulation_spec() const {
  return SimulationSpec{{projection()}, initial_rotation(), dt, t_max, stop_V, method};
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::config_error, "cannot open output file " + path);
  const auto cols = trajectory_columns(traj.n);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    const auto row = trajectory_row(traj, s);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << "\n";
  }
}

void write_trajectory_json(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::config_error, "cannot open output file " + path);
  nlohmann::json j;
  j["columns"] = trajectory_columns(traj.n);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t s = 0; s < traj.samples(); ++s) rows.push_back(trajectory_row(traj, s));
  j["rows"] = rows;
  j["converged"] = traj.converged;
  j["final_V"] = traj.final_V;
  out << j.dump(2) << "\n";
}

TrajectoryFile read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::config_error, "cannot open " + path);
  TrajectoryFile file;
  std::string line;
  if (!std::getline(in, line)) raise(Errc::config_error, "empty file " + path);
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) file.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != file.columns.size()) raise(Errc::config_error, "ragged row in " + path);
    file.rows.push_back(std::move(row));
  }
  return file;
}

}  // namespace geoatt

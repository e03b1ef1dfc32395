// Command-line front end: scenario simulation, closed-form comparison,
// figure-data emission, equilibrium analysis and Monte-Carlo basin runs.
//
// Exit codes: 0 converged/pass, 1 invalid input, 2 no convergence,
// 3 Monte-Carlo failures.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoatt/analysis.hpp"
#include "geoatt/exact.hpp"
#include "geoatt/linalg.hpp"
#include "geoatt/scenario.hpp"

namespace {

using geoatt::ScenarioConfig;

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::optional<double> k, dt, tmax, stop_v;
  std::optional<std::string> method, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "scenario JSON file");
  cmd->add_option("--preset", f.preset, "named scenario preset (paper-sec8)");
  cmd->add_option("--k", f.k, "feedback gain k > 0");
  cmd->add_option("--dt", f.dt, "integration step");
  cmd->add_option("--tmax", f.tmax, "time horizon");
  cmd->add_option("--stop-v", f.stop_v, "convergence threshold on V");
  cmd->add_option("--method", f.method, "lie_rk4 | rk4_project");
  cmd->add_option("--seed", f.seed, "RNG seed (Haar initial state / Monte Carlo)");
  cmd->add_option("--samples", f.samples, "Monte Carlo sample count");
  cmd->add_option("--out", f.out, "output path (or prefix for figures)");
  cmd->add_option("--format", f.format, "csv | json");
}

ScenarioConfig resolve_config(const CommonFlags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) geoatt::raise(geoatt::Errc::config_error, "cannot open " + f.config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      geoatt::raise(geoatt::Errc::config_error, f.config_path + ": " + e.what());
    }
  }
  if (!f.preset.empty()) j["preset"] = f.preset;
  ScenarioConfig cfg = ScenarioConfig::from_json(j);
  if (f.k) cfg.k = *f.k;
  if (f.dt) cfg.dt = *f.dt;
  if (f.tmax) cfg.t_max = *f.tmax;
  if (f.stop_v) cfg.stop_V = *f.stop_v;
  if (f.method) cfg.method = geoatt::method_from_string(*f.method);
  if (f.out) cfg.out = *f.out;
  if (f.format) cfg.format = *f.format;
  if (f.samples) cfg.samples = *f.samples;
  if (f.seed) {
    cfg.seed = *f.seed;
    if (cfg.R0.size() == 0 && !cfg.r0_haar_seed) cfg.r0_haar_seed = *f.seed;
  }
  return cfg;
}

int cmd_simulate(const CommonFlags& f) {
  ScenarioConfig cfg = resolve_config(f);
  const geoatt::Trajectory traj = geoatt::simulate(cfg.simulation_spec());
  const std::string path = cfg.out.empty() ? "trajectory." + cfg.format : cfg.out;
  if (cfg.format == "json") {
    geoatt::write_trajectory_json(traj, path);
  } else {
    geoatt::write_trajectory_csv(traj, path);
  }
  std::cout << "samples=" << traj.samples() << " final_V=" << geoatt::format_double(traj.final_V)
            << " converged=" << (traj.converged ? "yes" : "no") << " wrote " << path << "\n";
  return traj.converged ? 0 : 2;
}

int cmd_compare(const CommonFlags& f) {
  ScenarioConfig cfg = resolve_config(f);
  if (cfg.n != 3) geoatt::raise(geoatt::Errc::config_error, "compare requires n = 3");
  const geoatt::RotationMatrix R0 = cfg.initial_rotation();
  const geoatt::ProjectionPair proj = cfg.projection();
  if (geoatt::in_negative_spectrum_set(R0, 1e-9)) {
    std::cerr << "error: R0 has -1 in its spectrum within 1e-9; "
                 "the closed-form solution is undefined there\n";
    return 1;
  }
  const geoatt::ExactSo3Solution exact(R0, proj);
  const geoatt::Trajectory traj = geoatt::simulate(cfg.simulation_spec());

  const std::string path = cfg.out.empty() ? "compare.csv" : cfg.out;
  std::ofstream out(path);
  if (!out) geoatt::raise(geoatt::Errc::config_error, "cannot open " + path);
  out << "t,frob_error,dV,d_err_axis_1,d_err_axis_2,d_err_axis_3\n";
  double max_err = 0.0;
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    const geoatt::RotationMatrix Re = exact.at(traj.times[s]);
    const Eigen::MatrixXd& Rn = traj.states[s];
    const double err = (Re.matrix() - Rn).norm();
    max_err = std::max(max_err, err);
    out << geoatt::format_double(traj.times[s]) << "," << geoatt::format_double(err) << ","
        << geoatt::format_double(geoatt::lyapunov(Re) - traj.V[s]);
    for (int i = 0; i < 3; ++i) {
      const double ei = std::acos(std::clamp(Re(i, i), -1.0, 1.0));
      out << "," << geoatt::format_double(ei - traj.err_axis(s, i));
    }
    out << "\n";
  }
  std::cout << "max ||R_exact - R_numeric||_F = " << geoatt::format_double(max_err) << " over "
            << traj.samples() << " samples, wrote " << path << "\n";
  return max_err <= 1e-5 ? 0 : 2;
}

int cmd_figures(const CommonFlags& f) {
  ScenarioConfig cfg = resolve_config(f);
  if (cfg.n != 3) geoatt::raise(geoatt::Errc::config_error, "figures requires n = 3");
  const std::vector<double> boundaries = {0.0, 1.2, 2.4, 3.9};

  geoatt::SimulationSpec spec = cfg.simulation_spec();
  spec.t_max = std::max(5.0, boundaries.back());
  spec.stop_V = 0.0;  // keep the full horizon so both figures share one run
  const int stride = std::max(1, static_cast<int>(std::lround(1.0 / (cfg.figure_density * spec.dt))));
  spec.record_stride = stride;
  const geoatt::Trajectory traj = geoatt::simulate(spec);

  const std::string prefix = cfg.out.empty() ? "figures" : cfg.out;
  const std::string sphere_csv = prefix + "_sphere.csv";
  const std::string conv_csv = prefix + "_convergence.csv";

  {
    std::ofstream out(sphere_csv);
    if (!out) geoatt::raise(geoatt::Errc::config_error, "cannot open " + sphere_csv);
    out << "t,axis,x,y,z,boundary\n";
    auto emit = [&](double t, const Eigen::MatrixXd& R, int axis, bool boundary) {
      out << geoatt::format_double(t) << "," << axis + 1;
      for (int r = 0; r < 3; ++r) out << "," << geoatt::format_double(R(r, axis));
      out << "," << (boundary ? 1 : 0) << "\n";
    };
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      if (traj.times[s] > boundaries.back() + 1e-12) break;
      for (int axis = 0; axis < 3; ++axis) emit(traj.times[s], traj.states[s], axis, false);
    }
    for (double tb : boundaries) {
      // nearest recorded sample
      std::size_t best = 0;
      for (std::size_t s = 1; s < traj.samples(); ++s) {
        if (std::abs(traj.times[s] - tb) < std::abs(traj.times[best] - tb)) best = s;
      }
      for (int axis = 0; axis < 3; ++axis) emit(traj.times[best], traj.states[best], axis, true);
    }
  }
  {
    std::ofstream out(conv_csv);
    if (!out) geoatt::raise(geoatt::Errc::config_error, "cannot open " + conv_csv);
    out << "t,err_axis_1,err_axis_2,err_axis_3,dist_axis_1,dist_axis_2,dist_axis_3\n";
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      if (traj.times[s] > 5.0 + 1e-12) break;
      out << geoatt::format_double(traj.times[s]);
      for (int i = 0; i < 3; ++i) out << "," << geoatt::format_double(traj.err_axis(s, i));
      for (int i = 0; i < 3; ++i) out << "," << geoatt::format_double(traj.dist_axis(s, i));
      out << "\n";
    }
  }
  {
    std::ofstream gp(prefix + "_sphere.gp");
    gp << "set parametric\nset isosamples 24\nset urange [0:2*pi]\nset vrange [-pi/2:pi/2]\n"
          "set view equal xyz\nsplot cos(u)*cos(v), sin(u)*cos(v), sin(v) w l lc rgb 'gray' "
          "notitle, \\\n  '" << sphere_csv
       << "' u 3:4:5 w p pt 7 ps 0.2 lc variable t 'frame axes'\n";
  }
  {
    std::ofstream gp(prefix + "_convergence.gp");
    gp << "set xlabel 't'\nplot for [i=2:4] '" << conv_csv
       << "' u 1:i w l t columnheader(i), \\\n  for [i=5:7] '" << conv_csv
       << "' u 1:i w l dt 2 t columnheader(i)\n";
  }
  std::cout << "wrote " << sphere_csv << ", " << conv_csv << " and gnuplot scripts\n";
  return 0;
}

int cmd_analyze(const CommonFlags& f) {
  ScenarioConfig cfg = resolve_config(f);
  const geoatt::RotationMatrix R0 = cfg.initial_rotation();
  const geoatt::ProjectionPair proj = cfg.projection();

  nlohmann::json rep;
  rep["n"] = cfg.n;
  rep["lyapunov"] = geoatt::lyapunov(R0);

  const auto cls = geoatt::classify_equilibrium(R0, proj);
  nlohmann::json eq;
  switch (cls.kind) {
    case geoatt::EquilibriumKind::identity: eq["kind"] = "identity"; break;
    case geoatt::EquilibriumKind::saddle: eq["kind"] = "saddle"; eq["i"] = cls.i; break;
    case geoatt::EquilibriumKind::non_equilibrium: eq["kind"] = "non_equilibrium"; break;
  }
  eq["residuals"] = {{"symmetry", cls.symmetry_residual},
                     {"commutation", cls.commutation_residual},
                     {"stationarity", cls.stationarity_residual}};
  rep["equilibrium"] = eq;

  if (cls.kind != geoatt::EquilibriumKind::non_equilibrium) {
    const Eigen::MatrixXd F = geoatt::linearization_matrix(R0, proj);
    const geoatt::ComplexSpectrum spec = geoatt::spectrum(F);
    nlohmann::json eig = nlohmann::json::array();
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& z : spec.values) {
      eig.push_back({z.real(), z.imag()});
      max_re = std::max(max_re, z.real());
    }
    rep["linearization"] = {{"eigenvalues", eig},
                            {"max_real_part", max_re},
                            {"kernel_dimension", geoatt::kernel_dimension(R0, proj)}};
    if (cls.kind == geoatt::EquilibriumKind::identity) {
      nlohmann::json pred = nlohmann::json::array();
      for (const auto& [lam, mult] : geoatt::predicted_identity_spectrum(cfg.n, proj.rank(), cfg.k)) {
        nlohmann::json entry;
        entry["eigenvalue"] = lam;
        entry["multiplicity"] = mult;
        entry["computed_multiplicity"] =
            static_cast<int>(std::count_if(spec.values.begin(), spec.values.end(), [&](auto z) {
              return std::abs(z - std::complex<double>(lam, 0.0)) <= 1e-8;
            }));
        pred.push_back(entry);
      }
      rep["linearization"]["predicted"] = pred;
    }
  }

  if (cfg.n == 3) {
    const auto res = geoatt::verify_block_relations(R0);
    rep["block_relation_residuals"] = {res.outer_product, res.pythagorean, res.block_skew};
  }

  const std::string text = rep.dump(2);
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) geoatt::raise(geoatt::Errc::config_error, "cannot open " + cfg.out);
    out << text << "\n";
  }
  std::cout << text << "\n";
  return 0;
}

int cmd_montecarlo(const CommonFlags& f) {
  ScenarioConfig cfg = resolve_config(f);
  if (cfg.samples < 1) geoatt::raise(geoatt::Errc::config_error, "samples: must be >= 1");
  geoatt::BasinParams params;
  params.dt = cfg.dt;
  params.t_max = cfg.t_max;
  params.stop_V = cfg.stop_V;
  params.method = cfg.method;
  // pin every sample to a user-supplied start; preset initial states do not
  // count (a basin sweep over one fixed point would be vacuous)
  if (cfg.r0_explicit && cfg.R0.size() > 0) params.forced_R0 = cfg.R0;

  const geoatt::BasinReport rep =
      geoatt::monte_carlo_basin(cfg.projection(), cfg.samples, cfg.seed, params);

  nlohmann::json j;
  j["samples"] = rep.samples;
  j["converged"] = rep.converged;
  j["t_max"] = rep.t_max;
  j["dt"] = rep.dt;
  j["stop_V"] = rep.stop_V;
  nlohmann::json fails = nlohmann::json::array();
  for (const auto& fl : rep.failures) {
    fails.push_back({{"index", fl.index}, {"seed", fl.seed}, {"final_V", fl.final_V}});
  }
  j["failures"] = fails;
  const std::string text = j.dump(2);
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) geoatt::raise(geoatt::Errc::config_error, "cannot open " + cfg.out);
    out << text << "\n";
  }
  std::cout << text << "\n";
  return rep.converged == rep.samples ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoatt: attitude stabilization on SO(n) with geodesic reduced-attitude steering"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* sim = app.add_subcommand("simulate", "integrate the closed loop and write the time series");
  auto* cmp = app.add_subcommand("compare", "closed-form vs numeric trajectory (n = 3)");
  auto* fig = app.add_subcommand("figures", "emit sphere-path and convergence figure data");
  auto* ana = app.add_subcommand("analyze", "equilibrium classification and linearization report");
  auto* mc = app.add_subcommand("montecarlo", "Haar-seeded basin-of-attraction run");
  for (auto* cmd : {sim, cmp, fig, ana, mc}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(flags);
    if (cmp->parsed()) return cmd_compare(flags);
    if (fig->parsed()) return cmd_figures(flags);
    if (ana->parsed()) return cmd_analyze(flags);
    if (mc->parsed()) return cmd_montecarlo(flags);
  } catch (const geoatt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

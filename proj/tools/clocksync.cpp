#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clocksync/config.hpp"
#include "clocksync/errors.hpp"
#include "clocksync/experiments.hpp"
#include "clocksync/metrics.hpp"
#include "clocksync/model.hpp"
#include "clocksync/output.hpp"
#include "clocksync/steadystate.hpp"

namespace cs = clocksync;
namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config_file;
  std::string config_json;
  std::string preset;
  nlohmann::json overrides = nlohmann::json::object();
};

// Registers a flag whose value is forwarded into the JSON override object.
template <typename T>
void forward(CLI::App* cmd, Flags& flags, const std::string& name, const std::string& key,
             const std::string& help) {
  cmd->add_option_function<T>(
      name, [&flags, key](const T& v) { flags.overrides[key] = v; }, help);
}

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_file, "JSON configuration file");
  cmd->add_option("--config-json", flags.config_json, "inline JSON configuration");
  cmd->add_option("--preset", flags.preset, "parameter preset (paper, degenerate)");
  forward<std::uint64_t>(cmd, flags, "--seed", "master_seed", "master seed");
  forward<std::string>(cmd, flags, "--out", "out", "output directory");
  forward<std::string>(cmd, flags, "--sign", "coupling_sign", "opposite (G1 = -G2) or same");
  cmd->add_flag_function(
      "--svg", [&flags](std::int64_t) { flags.overrides["svg"] = true; }, "also write SVG plots");
}

cs::RunConfig resolve(const Flags& flags) {
  cs::RunConfig c;
  if (!flags.preset.empty()) cs::merge_config(c, nlohmann::json{{"preset", flags.preset}}.dump());
  if (!flags.config_file.empty()) {
    std::ifstream in(flags.config_file);
    if (!in) throw cs::IoError("cannot read config file '" + flags.config_file + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    cs::merge_config(c, text);
  }
  if (!flags.config_json.empty()) cs::merge_config(c, flags.config_json);
  cs::merge_config(c, flags.overrides.dump());
  return c;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw cs::ConfigError("--grid: cannot parse '" + item + "'");
    }
    start = end + 1;
  }
  return out;
}

std::string prepare_output(const cs::RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out))
    throw cs::IoError("cannot create output directory '" + c.out + "'");
  const std::string path = (fs::path(c.out) / "config.json").string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << cs::config_to_json(c)).flush()) throw cs::IoError("cannot write " + path);
  return c.out;
}

std::string at(const cs::RunConfig& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

void with_default(double& value, double fallback) {
  if (value <= 0.0) value = fallback;
}

int run_ness(cs::RunConfig c) {
  prepare_output(c);
  const cs::PhysicalParams p = c.params.with_coupling(c.g_over_kappa, c.sign);
  const cs::ReducedDynamics dyn = cs::reduced_dynamics(p);
  const cs::EffectiveCoupling coupling = cs::effective_coupling(p);
  const cs::NormalModes modes = cs::normal_modes_numeric(dyn);
  const cs::ReducedCovariance cov = cs::steady_state(dyn);
  const cs::EntropyRates rates = cs::entropy_rates(cov, p);
  cs::Table t;
  t.header = {"g_over_kappa", "delta",  "Gamma", "omega_plus", "omega_minus", "gamma_plus",
              "gamma_minus",  "ratio",  "n_b1",  "n_b2",       "n_a",         "n_cross",
              "mu_b1",        "mu_b2",  "mu_a",  "pi_s",       "analytic_C"};
  t.rows.push_back({c.g_over_kappa, coupling.delta, coupling.Gamma, modes.omega_plus(),
                    modes.omega_minus(), modes.gamma_plus(), modes.gamma_minus(),
                    modes.linewidth_ratio(), cov.n_b1_eff, cov.n_b2_eff, cov.n_a_eff,
                    cov.n_cross_eff, rates.mu_b1, rates.mu_b2, rates.mu_a, rates.Pi_s,
                    cs::analytic_sync_degree(cov)});
  cs::write_csv(at(c, "ness.csv"), t);
  for (std::size_t k = 0; k < t.header.size(); ++k)
    std::cout << t.header[k] << " = " << cs::format_number(t.rows[0][k]) << '\n';
  return 0;
}

int run_sweep(cs::RunConfig c) {
  with_default(c.duration, 10.0);
  with_default(c.dt, 1.0e-6);
  prepare_output(c);
  cs::SweepOptions o;
  o.protocol = c.protocol;
  o.sign = c.sign;
  o.master_seed = c.master_seed;
  o.duration = c.duration;
  o.dt = c.dt;
  o.burn_in = c.burn_in;
  o.deviation_ticks = c.deviation_ticks;
  o.accuracy_ticks = c.accuracy_ticks;
  const std::vector<cs::SweepRow> rows = cs::sweep_coupling(c.params, c.grid, o);
  const cs::Table table = cs::sweep_table(rows);
  cs::write_csv(at(c, "sweep.csv"), table);
  if (c.svg)
    cs::write_svg(at(c, "sweep.svg"), table, {"analytic_C", "C", "D", "ratio", "pi_s"},
                  "sweep over |G|/kappa");

  cs::Table summary;
  summary.header = {"threshold", "turning_point"};
  double threshold = std::numeric_limits<double>::quiet_NaN(), turning = threshold;
  try {
    threshold = cs::find_threshold(rows);
  } catch (const cs::PhysicsError& e) {
    std::cerr << "warning: " << e.what() << '\n';
  }
  try {
    turning = cs::find_turning_point(rows);
  } catch (const cs::PhysicsError& e) {
    std::cerr << "warning: " << e.what() << '\n';
  }
  summary.rows.push_back({threshold, turning});
  cs::write_csv(at(c, "sweep_summary.csv"), summary);
  std::cout << "threshold = " << cs::format_number(threshold)
            << "\nturning_point = " << cs::format_number(turning) << '\n';
  return 0;
}

int run_modes(cs::RunConfig c) {
  prepare_output(c);
  cs::Table t;
  t.header = {"g_over_kappa", "delta",      "Gamma",           "omega_plus",     "omega_minus",
              "gamma_plus",   "gamma_minus", "full_gamma_plus", "full_gamma_minus"};
  for (double g : c.grid) {
    const cs::PhysicalParams p = c.params.with_coupling(g, c.sign);
    const cs::EffectiveCoupling coupling = cs::effective_coupling(p);
    const cs::NormalModes modes = cs::normal_modes_numeric(cs::reduced_dynamics(p, coupling));
    double full_plus = std::numeric_limits<double>::quiet_NaN(), full_minus = full_plus;
    try {
      const cs::NormalModes full = cs::normal_modes_numeric(cs::full_dynamics(p));
      full_plus = full.gamma_plus();
      full_minus = full.gamma_minus();
    } catch (const cs::NumericalError& e) {
      std::cerr << "warning: |G|/kappa = " << g << ": " << e.what() << '\n';
    }
    t.rows.push_back({g, coupling.delta, coupling.Gamma, modes.omega_plus(), modes.omega_minus(),
                      modes.gamma_plus(), modes.gamma_minus(), full_plus, full_minus});
  }
  cs::write_csv(at(c, "modes.csv"), t);
  if (c.svg)
    cs::write_svg(at(c, "modes.svg"), t, {"omega_plus", "omega_minus", "gamma_plus", "gamma_minus"},
                  "normal modes");
  return 0;
}

int run_trajectory(cs::RunConfig c) {
  with_default(c.duration, 1.0);
  with_default(c.dt, 1.0e-5);
  prepare_output(c);
  const cs::PhysicalParams p = c.params.with_coupling(c.g_over_kappa, c.sign);
  const cs::ReducedDynamics dyn = cs::reduced_dynamics(p);
  cs::SimulationOptions sim;
  sim.duration = c.duration;
  sim.dt = c.dt;
  sim.seed = cs::derive_seed(c.master_seed, 0);
  sim.initial = cs::InitialState::steady_state;
  const cs::Trajectory traj = cs::propagate_exact(dyn, sim);
  cs::write_csv(at(c, "trajectory.csv"), cs::trajectory_table(traj));

  const int segment = cs::spectrum_segment_length(traj.dt, p.delta_omega());
  const cs::Spectrum s1 = cs::displacement_spectrum(traj, 1, segment, c.spectrum_offset_hz);
  const cs::Spectrum s2 = cs::displacement_spectrum(traj, 2, segment, c.spectrum_offset_hz);
  cs::Table spec;
  spec.header = {"f_hz", "psd1", "psd2"};
  for (Eigen::Index k = 0; k < s1.psd.size(); ++k)
    spec.rows.push_back({s1.frequency(k), s1.psd(k), s2.psd(k)});
  cs::write_csv(at(c, "spectrum.csv"), spec);
  if (c.svg) cs::write_svg(at(c, "spectrum.svg"), spec, {"psd1", "psd2"}, "displacement spectra");

  const cs::SyncMetrics dev = cs::clock_stats(cs::extract_ticks(traj, 1, c.deviation_ticks),
                                              cs::extract_ticks(traj, 2, c.deviation_ticks));
  const cs::SyncMetrics acc = cs::clock_stats(cs::extract_ticks(traj, 1, c.accuracy_ticks),
                                              cs::extract_ticks(traj, 2, c.accuracy_ticks));
  cs::Table summary;
  summary.header = {"g_over_kappa", "C", "D", "N1", "N2", "peak1_hz", "peak2_hz"};
  summary.rows.push_back({c.g_over_kappa, cs::sync_degree(traj), dev.D, acc.N1, acc.N2,
                          cs::find_peaks(s1).front().frequency,
                          cs::find_peaks(s2).front().frequency});
  cs::write_csv(at(c, "trajectory_summary.csv"), summary);
  return 0;
}

int run_transient(cs::RunConfig c) {
  with_default(c.duration, 0.1);
  with_default(c.dt, 1.0e-5);
  prepare_output(c);
  cs::TransientOptions o;
  o.n_traj = c.n_traj;
  o.master_seed = c.master_seed;
  o.duration = c.duration;
  o.dt = c.dt;
  o.sign = c.sign;
  const cs::TransientResult r = cs::transient_experiment(c.params, c.g_over_kappa, o);
  const cs::Table table = cs::transient_table(r);
  cs::write_csv(at(c, "transient.csv"), table);
  if (c.svg)
    cs::write_svg(at(c, "transient.svg"), table, {"R", "mu_b1", "mu_b2", "mu_a"},
                  "quench transient");
  cs::Table summary;
  summary.header = {"g_over_kappa", "n_traj", "transient_time", "integrated_mu_a"};
  summary.rows.push_back({c.g_over_kappa, static_cast<double>(c.n_traj), r.transient_time,
                          r.integrated_mu_a});
  cs::write_csv(at(c, "transient_summary.csv"), summary);
  std::cout << "transient_time = " << cs::format_number(r.transient_time) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two thermodynamic clocks coupled through a cavity: NESS, sweeps, transients"};
  app.require_subcommand(1);

  Flags flags;
  std::string grid_text;
  auto* ness = app.add_subcommand("ness", "single-point NESS report");
  auto* sweep = app.add_subcommand("sweep", "sweep |G|/kappa (C, D, N, linewidths, entropy rates)");
  auto* traj = app.add_subcommand("trajectory", "one NESS trajectory with spectra and tick stats");
  auto* transient = app.add_subcommand("transient", "quench ensemble: R(t), fluxes, transient time");
  auto* modes = app.add_subcommand("modes", "normal-mode table over the grid");

  for (CLI::App* cmd : {ness, sweep, traj, transient, modes}) add_common(cmd, flags);
  for (CLI::App* cmd : {ness, traj, transient})
    forward<double>(cmd, flags, "--g-over-kappa", "g_over_kappa", "coupling |G|/kappa");
  for (CLI::App* cmd : {sweep, traj, transient}) {
    forward<double>(cmd, flags, "--duration", "duration", "simulated time per run (s)");
    forward<double>(cmd, flags, "--dt", "dt", "time step (s)");
  }
  for (CLI::App* cmd : {sweep, modes})
    cmd->add_option("--grid", grid_text, "comma-separated |G|/kappa values");
  forward<std::string>(sweep, flags, "--protocol", "protocol", "analytic, monte-carlo or both");
  forward<int>(transient, flags, "--n-traj", "n_traj", "ensemble size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (!grid_text.empty()) flags.overrides["grid"] = parse_list(grid_text);
    const cs::RunConfig config = resolve(flags);
    if (*ness) return run_ness(config);
    if (*sweep) return run_sweep(config);
    if (*traj) return run_trajectory(config);
    if (*transient) return run_transient(config);
    if (*modes) return run_modes(config);
  } catch (const cs::ConfigError& e) {
    std::cerr << "error: configuration: " << e.what() << '\n';
    return 2;
  } catch (const cs::PhysicsError& e) {
    std::cerr << "error: physics: " << e.what() << '\n';
    return 3;
  } catch (const cs::IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

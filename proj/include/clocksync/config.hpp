#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clocksync/experiments.hpp"
#include "clocksync/params.hpp"

namespace clocksync {

// Everything a CLI run needs. Loaded from a JSON document on top of a preset;
// command-line flags are applied afterwards by the caller.
struct RunConfig {
  std::string preset = "paper";
  PhysicalParams params = paper_preset();
  CouplingSign sign = CouplingSign::opposite;
  double g_over_kappa = 0.02;
  std::vector<double> grid = default_grid();
  SweepProtocol protocol = SweepProtocol::both;
  // Non-positive values mean "use the command's default".
  double duration = 0.0;
  double dt = 0.0;
  double burn_in = -1.0;
  int n_traj = 600;
  std::uint64_t master_seed = 0;
  TickOptions deviation_ticks{0.01, 0.2};
  TickOptions accuracy_ticks{0.0, 0.2};
  double spectrum_offset_hz = 10.0e3;
  std::string out = "out";
  bool svg = false;
};

// Parses a JSON document (object). Frequencies may be given as *_hz or *_rad
// (omega1, omega2, gamma1, gamma2, kappa, detuning); unknown keys, duplicate
// unit spellings and invalid physics are ConfigErrors.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// Applies a JSON object on top of an existing configuration.
void merge_config(RunConfig& config, const std::string& json_text);

// Resolved configuration with every field spelled out (rates in rad/s).
std::string config_to_json(const RunConfig& config);

std::string to_string(SweepProtocol protocol);
std::string to_string(CouplingSign sign);
SweepProtocol parse_protocol(const std::string& text);
CouplingSign parse_sign(const std::string& text);

}  // namespace clocksync

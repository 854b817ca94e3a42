#pragma once

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace clocksync {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class CouplingSign {
  opposite,  // G1 = G, G2 = -G: in-phase synchronization
  same,      // G1 = G2 = G: out-of-phase synchronization
};

// All rates are angular (rad/s). kappa is the cavity amplitude decay rate
// (half linewidth). Occupations are dimensionless.
struct PhysicalParams {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double kappa = 0.0;
  double detuning = 0.0;  // negative = red detuned
  double G1 = 0.0;
  double G2 = 0.0;
  double nth1 = 0.0;
  double nth2 = 0.0;
  double na_in = 0.0;

  double delta_omega() const { return omega1 - omega2; }
  double mean_frequency() const { return 0.5 * (omega1 + omega2); }
  double g_over_kappa() const;

  // Copy with |G1| = |G2| = g_over_kappa * kappa and the requested sign pattern.
  PhysicalParams with_coupling(double g_over_kappa,
                               CouplingSign sign = CouplingSign::opposite) const;

  // Throws ConfigError on violated invariants.
  void validate() const;
};

// Two membranes near 400 kHz split by 200 Hz, cavity half-width 2 MHz.
// Detuning and bath occupations are not measured quantities; the preset
// fixes detuning = -kappa and nth = 2e9 (see README).
PhysicalParams paper_preset();

PhysicalParams preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace clocksync

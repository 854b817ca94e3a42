#include "clocksync/params.hpp"

#include <algorithm>
#include <cmath>

#include "clocksync/errors.hpp"

namespace clocksync {

double PhysicalParams::g_over_kappa() const {
  return std::max(std::abs(G1), std::abs(G2)) / kappa;
}

PhysicalParams PhysicalParams::with_coupling(double g_over_kappa,
                                             CouplingSign sign) const {
  PhysicalParams p = *this;
  const double g = g_over_kappa * kappa;
  p.G1 = g;
  p.G2 = sign == CouplingSign::opposite ? -g : g;
  return p;
}

void PhysicalParams::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid parameters: " + what);
  };
  const double all[] = {omega1, omega2, gamma1, gamma2, kappa, detuning,
                        G1,     G2,     nth1,   nth2,   na_in};
  for (double v : all) require(std::isfinite(v), "all fields must be finite");
  require(omega1 > 0.0 && omega2 > 0.0, "omega1, omega2 > 0");
  require(gamma1 > 0.0, "gamma1 > 0");
  require(gamma2 > 0.0, "gamma2 > 0");
  require(kappa > 0.0, "kappa > 0");
  require(nth1 >= 0.0 && nth2 >= 0.0, "nth1, nth2 >= 0");
  require(na_in >= 0.0, "na_in >= 0");
}

PhysicalParams paper_preset() {
  PhysicalParams p;
  p.omega2 = kTwoPi * 400.0e3;
  p.omega1 = p.omega2 + kTwoPi * 200.0;
  p.gamma1 = kTwoPi * 7.0;
  p.gamma2 = kTwoPi * 14.0;
  p.kappa = kTwoPi * 2.0e6;
  p.detuning = -p.kappa;
  p.nth1 = 2.0e9;
  p.nth2 = 2.0e9;
  p.na_in = 0.0;
  return p;
}

PhysicalParams preset(std::string_view name) {
  if (name == "paper") return paper_preset();
  if (name == "degenerate") {
    PhysicalParams p = paper_preset();
    p.omega1 = p.omega2;
    return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"paper", "degenerate"}; }

}  // namespace clocksync

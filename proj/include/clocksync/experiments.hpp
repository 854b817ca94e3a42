#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "clocksync/metrics.hpp"
#include "clocksync/params.hpp"

namespace clocksync {

struct SweepRow {
  double g_over_kappa = 0.0;
  // Monte Carlo observables; NaN when the sweep ran analytically only.
  double C = 0.0;
  double D = 0.0;
  double N1 = 0.0;
  double N2 = 0.0;
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  double ratio = 0.0;
  double mu_b1 = 0.0;
  double mu_b2 = 0.0;
  double mu_a = 0.0;
  double Pi_s = 0.0;
  double analytic_C = 0.0;
  double C_error = 0.0;  // batch-means standard error of C (Monte Carlo only)
};

enum class SweepProtocol { analytic, monte_carlo, both };

struct SweepOptions {
  SweepProtocol protocol = SweepProtocol::analytic;
  CouplingSign sign = CouplingSign::opposite;
  std::uint64_t master_seed = 0;
  double duration = 10.0;
  // Fine enough to sample every carrier period, which the accuracy N needs.
  double dt = 1.0e-6;
  // Discarded before recording; negative selects 5 / gamma_plus.
  double burn_in = -1.0;
  Integrator integrator = Integrator::exact;
  // D is computed on phase-smoothed ticks, N on ticks of the raw phase.
  TickOptions deviation_ticks{0.01, 0.2};
  TickOptions accuracy_ticks{0.0, 0.2};
};

// |G|/kappa from 0 to 0.05 in 26 points.
std::vector<double> default_grid();

// Rows ordered by grid index; point k uses seed derive_seed(master_seed, k).
std::vector<SweepRow> sweep_coupling(const PhysicalParams& params, const std::vector<double>& grid,
                                     const SweepOptions& options = {});

// Monte Carlo observables for one coupled configuration.
SweepRow monte_carlo_point(const PhysicalParams& coupled, std::uint64_t seed,
                           const SweepOptions& options);
SweepRow analytic_point(const PhysicalParams& coupled);

// First upward crossing of analytic_C through 0.5, linearly interpolated.
double find_threshold(const std::vector<SweepRow>& rows);

// Location of the maximum of Pi_s from a parabola through the discrete
// maximum and its two neighbours.
double find_turning_point(const std::vector<SweepRow>& rows);

// A pair (i, j) with Pi_s(i) < Pi_s(j) but analytic_C(i) > analytic_C(j);
// of all such pairs, the one with the largest difference in C.
std::optional<std::pair<std::size_t, std::size_t>> find_nonmonotonic_pair(
    const std::vector<SweepRow>& rows);

struct TransientOptions {
  int n_traj = 600;
  std::uint64_t master_seed = 0;
  double duration = 0.1;
  double dt = 1.0e-5;
  CouplingSign sign = CouplingSign::opposite;
};

// Quench from the uncoupled thermal state at t = 0.
TransientResult transient_experiment(const PhysicalParams& params, double g_over_kappa,
                                     const TransientOptions& options = {});

}  // namespace clocksync

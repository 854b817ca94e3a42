#include "clocksync/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "clocksync/errors.hpp"
#include "clocksync/steadystate.hpp"

namespace clocksync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(k) for k in [0, n) on up to worker_count() threads.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned n_workers = std::min<std::size_t>(worker_count(), n);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<double> default_grid() {
  std::vector<double> grid(26);
  for (int k = 0; k < 26; ++k) grid[k] = 0.002 * k;
  return grid;
}

SweepRow analytic_point(const PhysicalParams& coupled) {
  const ReducedDynamics dyn = reduced_dynamics(coupled);
  const ReducedCovariance cov = steady_state(dyn);
  const EntropyRates rates = entropy_rates(cov, coupled);
  const NormalModes modes = normal_modes_numeric(dyn);

  SweepRow row;
  row.g_over_kappa = coupled.g_over_kappa();
  row.C = row.D = row.N1 = row.N2 = row.C_error = kNaN;
  row.gamma_plus = modes.gamma_plus();
  row.gamma_minus = modes.gamma_minus();
  row.ratio = modes.linewidth_ratio();
  row.mu_b1 = rates.mu_b1;
  row.mu_b2 = rates.mu_b2;
  row.mu_a = rates.mu_a;
  row.Pi_s = rates.Pi_s;
  row.analytic_C = analytic_sync_degree(cov);
  return row;
}

SweepRow monte_carlo_point(const PhysicalParams& coupled, std::uint64_t seed,
                           const SweepOptions& options) {
  SweepRow row = analytic_point(coupled);
  const ReducedDynamics dyn = reduced_dynamics(coupled);

  SimulationOptions sim;
  sim.duration = options.duration;
  sim.dt = options.dt;
  sim.seed = seed;
  sim.initial = InitialState::steady_state;
  sim.burn_in = options.burn_in >= 0.0 ? options.burn_in : 5.0 / row.gamma_plus;
  const Trajectory traj =
      options.integrator == Integrator::exact ? propagate_exact(dyn, sim) : simulate(dyn, sim);

  const Estimate C = sync_degree_estimate(traj);
  row.C = C.value;
  row.C_error = C.error;
  row.D = clock_stats(extract_ticks(traj, 1, options.deviation_ticks),
                      extract_ticks(traj, 2, options.deviation_ticks))
              .D;
  const SyncMetrics acc = clock_stats(extract_ticks(traj, 1, options.accuracy_ticks),
                                      extract_ticks(traj, 2, options.accuracy_ticks));
  row.N1 = acc.N1;
  row.N2 = acc.N2;
  return row;
}

std::vector<SweepRow> sweep_coupling(const PhysicalParams& params, const std::vector<double>& grid,
                                     const SweepOptions& options) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  for (double g : grid)
    if (!(g >= 0.0)) throw ConfigError("sweep: grid values must be >= 0");
  params.validate();

  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    const PhysicalParams coupled = params.with_coupling(grid[k], options.sign);
    rows[k] = options.protocol == SweepProtocol::analytic
                  ? analytic_point(coupled)
                  : monte_carlo_point(coupled, derive_seed(options.master_seed, k), options);
  });
  return rows;
}

double find_threshold(const std::vector<SweepRow>& rows) {
  if (rows.size() < 2) throw ConfigError("find_threshold: need at least 2 rows");
  if (rows.front().analytic_C >= 0.5)
    throw PhysicsError("find_threshold: C already >= 0.5 at the first grid point; extend the "
                       "grid towards zero coupling");
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double c0 = rows[k].analytic_C, c1 = rows[k + 1].analytic_C;
    if (c0 < 0.5 && c1 >= 0.5) {
      const double g0 = rows[k].g_over_kappa, g1 = rows[k + 1].g_over_kappa;
      return g0 + (g1 - g0) * (0.5 - c0) / (c1 - c0);
    }
  }
  throw PhysicsError("find_threshold: analytic C never crosses 0.5 on the grid");
}

double find_turning_point(const std::vector<SweepRow>& rows) {
  if (rows.size() < 3) throw ConfigError("find_turning_point: need at least 3 rows");
  const auto it = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a,
                                                                const SweepRow& b) {
    return a.Pi_s < b.Pi_s;
  });
  const std::size_t k = static_cast<std::size_t>(it - rows.begin());
  if (k == 0 || k + 1 == rows.size())
    throw PhysicsError("find_turning_point: maximum of Pi_s lies on the grid boundary; widen "
                       "the sweep range");
  const double x0 = rows[k - 1].g_over_kappa, x1 = rows[k].g_over_kappa,
               x2 = rows[k + 1].g_over_kappa;
  const double y0 = rows[k - 1].Pi_s, y1 = rows[k].Pi_s, y2 = rows[k + 1].Pi_s;
  // Vertex of the interpolating parabola (divided differences).
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return x1;
  const double b = d01 - a * (x0 + x1);
  return -b / (2.0 * a);
}

std::optional<std::pair<std::size_t, std::size_t>> find_nonmonotonic_pair(
    const std::vector<SweepRow>& rows) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double widest = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double gap = rows[i].analytic_C - rows[j].analytic_C;
      if (rows[i].Pi_s < rows[j].Pi_s && gap > widest) {
        widest = gap;
        best = std::make_pair(i, j);
      }
    }
  return best;
}

TransientResult transient_experiment(const PhysicalParams& params, double g_over_kappa,
                                     const TransientOptions& options) {
  const PhysicalParams coupled = params.with_coupling(g_over_kappa, options.sign);
  coupled.validate();
  const ReducedDynamics dyn = reduced_dynamics(coupled);

  EnsembleOptions ens;
  ens.n_traj = options.n_traj;
  ens.master_seed = options.master_seed;
  ens.quench = true;
  ens.integrator = Integrator::exact;
  ens.simulation.duration = options.duration;
  ens.simulation.dt = options.dt;
  const std::vector<Trajectory> ensemble = run_ensemble(dyn, ens);

  const CorrelationSeries corr = transient_correlation(ensemble);
  const FluxSeries flux = transient_entropy_flux(ensemble, dyn, coupled);

  TransientResult out;
  out.times = corr.times;
  out.R = corr.R;
  out.mu_b1_t = flux.mu_b1;
  out.mu_b2_t = flux.mu_b2;
  out.mu_a_t = flux.mu_a;
  out.mu_b1_err = flux.mu_b1_err;
  out.mu_b2_err = flux.mu_b2_err;
  out.mu_a_err = flux.mu_a_err;
  out.transient_time = transient_time(out.times, out.R);
  for (Eigen::Index k = 0; k + 1 < out.times.size() && out.times(k) < out.transient_time; ++k)
    out.integrated_mu_a += 0.5 * (std::abs(out.mu_a_t(k)) + std::abs(out.mu_a_t(k + 1))) *
                           (out.times(k + 1) - out.times(k));
  return out;
}

}  // namespace clocksync

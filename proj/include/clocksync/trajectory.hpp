#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "clocksync/model.hpp"

namespace clocksync {

// Sampled envelopes of the reduced model in the frame rotating at
// reference_frequency (omega2 for both clocks).
struct Trajectory {
  double dt = 0.0;  // sample spacing
  Eigen::VectorXd times;
  Eigen::VectorXcd b1;
  Eigen::VectorXcd b2;
  Frame frame = Frame::reduced_rotating;
  double reference_frequency = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return times.size(); }
  // clock is 1 or 2.
  const Eigen::VectorXcd& envelope(int clock) const;
  // x_i(t) = sqrt(2) Re[b_i(t) exp(-i carrier t)]; carrier defaults to the
  // frame frequency, which reconstructs the lab-frame displacement.
  Eigen::VectorXd displacement(int clock) const;
  Eigen::VectorXd displacement(int clock, double carrier) const;
};

enum class InitialState { uncoupled_thermal, steady_state, given };
enum class Integrator { euler_maruyama, exact };

struct SimulationOptions {
  double duration = 10.0;  // recorded span (s)
  double dt = 1.0e-5;      // integration step (s)
  std::uint64_t seed = 0;
  InitialState initial = InitialState::uncoupled_thermal;
  Eigen::Vector2cd initial_state = Eigen::Vector2cd::Zero();  // InitialState::given
  double burn_in = 0.0;     // simulated and discarded before recording (s)
  int record_stride = 1;    // keep every k-th step
};

// Euler-Maruyama for dz = A z dt + L dW. Requires dt <= 0.05 / max|eig(A)|;
// throws ConfigError with the largest admissible dt otherwise.
Trajectory simulate(const ReducedDynamics& dyn, const SimulationOptions& options);

// Exact OU update z <- e^{A dt} z + xi, xi ~ CN(0, V - e^{A dt} V e^{A^H dt}),
// V the stationary covariance. Statistically exact for any dt.
Trajectory propagate_exact(const ReducedDynamics& dyn, const SimulationOptions& options);

struct EnsembleOptions {
  int n_traj = 1;
  std::uint64_t master_seed = 0;
  // Quench: start from the uncoupled thermal state and evolve under the
  // coupled drift from t = 0. Otherwise start from the coupled NESS.
  bool quench = true;
  Integrator integrator = Integrator::exact;
  SimulationOptions simulation;  // seed and initial state are overridden
};

// Trajectory j uses seed derive_seed(master_seed, j); output is ordered by j
// and independent of thread scheduling.
std::vector<Trajectory> run_ensemble(const ReducedDynamics& dyn, const EnsembleOptions& options);

// Counter-based seed derivation: std::seed_seq over the four 32-bit halves of
// (master, index), first two generated words packed high:low.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Worker threads for parallel loops: CLOCKSYNC_THREADS if set (>= 1),
// otherwise hardware concurrency.
unsigned worker_count();

}  // namespace clocksync

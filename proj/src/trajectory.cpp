#include "clocksync/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "clocksync/errors.hpp"
#include "clocksync/lyapunov.hpp"

namespace clocksync {

namespace {

// Square root factor L with L L^H = M for a Hermitian PSD matrix; negative
// round-off eigenvalues are clamped to zero.
Eigen::Matrix2cd psd_factor(const Eigen::Matrix2cd& M) {
  const Eigen::Matrix2cd H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
  const Eigen::Vector2d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

class ComplexNormal {
 public:
  explicit ComplexNormal(std::uint64_t seed) : engine_(seed) {}
  // Two independent CN(0, 1) draws.
  Eigen::Vector2cd draw() {
    const double a = normal_(engine_), b = normal_(engine_);
    const double c = normal_(engine_), d = normal_(engine_);
    return Eigen::Vector2cd(cdouble(a, b), cdouble(c, d)) * M_SQRT1_2;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

void check_reduced(const ReducedDynamics& dyn, const SimulationOptions& options) {
  if (dyn.frame != Frame::reduced_rotating || dyn.dimension() != 2)
    throw ConfigError("trajectories are generated for the reduced 2x2 model only");
  if (!(options.dt > 0.0) || !(options.duration > 0.0))
    throw ConfigError("simulation: dt and duration must be > 0");
  if (options.burn_in < 0.0) throw ConfigError("simulation: burn_in must be >= 0");
  if (options.record_stride < 1) throw ConfigError("simulation: record_stride must be >= 1");
  const double abscissa = spectral_abscissa(dyn.drift);
  if (!(abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "unstable drift: max Re(eigenvalue) = " << abscissa;
    throw StabilityError(msg.str());
  }
}

Eigen::Vector2cd initial_state(const ReducedDynamics& dyn, const SimulationOptions& options,
                               const Eigen::Matrix2cd& stationary, ComplexNormal& rng) {
  switch (options.initial) {
    case InitialState::given:
      return options.initial_state;
    case InitialState::steady_state:
      return psd_factor(stationary) * rng.draw();
    case InitialState::uncoupled_thermal:
      break;
  }
  return psd_factor(Eigen::Matrix2cd(dyn.uncoupled_covariance)) * rng.draw();
}

template <typename Step>
Trajectory integrate(const ReducedDynamics& dyn, const SimulationOptions& options,
                     const Eigen::Matrix2cd& stationary, Step&& step) {
  ComplexNormal rng(options.seed);
  Eigen::Vector2cd z = initial_state(dyn, options, stationary, rng);

  const auto burn_steps = static_cast<std::int64_t>(std::llround(options.burn_in / options.dt));
  const auto steps = static_cast<std::int64_t>(std::llround(options.duration / options.dt));
  const std::int64_t samples = (steps + options.record_stride - 1) / options.record_stride;

  for (std::int64_t k = 0; k < burn_steps; ++k) z = step(z, rng);

  Trajectory traj;
  traj.dt = options.dt * options.record_stride;
  traj.frame = Frame::reduced_rotating;
  traj.reference_frequency = dyn.reference_frequency;
  traj.seed = options.seed;
  traj.times.resize(samples);
  traj.b1.resize(samples);
  traj.b2.resize(samples);
  const double t0 = static_cast<double>(burn_steps) * options.dt;
  std::int64_t k = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    traj.times(s) = t0 + static_cast<double>(k) * options.dt;
    traj.b1(s) = z(0);
    traj.b2(s) = z(1);
    if (!std::isfinite(std::norm(z(0))) || !std::isfinite(std::norm(z(1))))
      throw NumericalError("trajectory diverged at t = " + std::to_string(traj.times(s)));
    for (int r = 0; r < options.record_stride; ++r, ++k) z = step(z, rng);
  }
  return traj;
}

}  // namespace

const Eigen::VectorXcd& Trajectory::envelope(int clock) const {
  if (clock == 1) return b1;
  if (clock == 2) return b2;
  throw ConfigError("clock index must be 1 or 2");
}

Eigen::VectorXd Trajectory::displacement(int clock) const {
  return displacement(clock, reference_frequency);
}

Eigen::VectorXd Trajectory::displacement(int clock, double carrier) const {
  const Eigen::VectorXcd& b = envelope(clock);
  Eigen::VectorXd x(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k)
    x(k) = M_SQRT2 * (b(k) * std::polar(1.0, -carrier * times(k))).real();
  return x;
}

Trajectory simulate(const ReducedDynamics& dyn, const SimulationOptions& options) {
  check_reduced(dyn, options);
  const Eigen::Matrix2cd A = dyn.drift;
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(A, false);
  const double rate = es.eigenvalues().cwiseAbs().maxCoeff();
  const double max_dt = 0.05 / rate;
  if (options.dt > max_dt) {
    std::ostringstream msg;
    msg << "dt = " << options.dt << " s too large for Euler-Maruyama; use dt <= " << max_dt
        << " s or the exact propagator";
    throw ConfigError(msg.str());
  }
  Eigen::Matrix2cd stationary = Eigen::Matrix2cd::Zero();
  if (options.initial == InitialState::steady_state)
    stationary = solve_lyapunov(A, Eigen::Matrix2cd(dyn.diffusion));

  const Eigen::Matrix2cd P = Eigen::Matrix2cd::Identity() + A * options.dt;
  const Eigen::Matrix2cd L = psd_factor(Eigen::Matrix2cd(dyn.diffusion) * options.dt);
  return integrate(dyn, options, stationary, [&](const Eigen::Vector2cd& z, ComplexNormal& rng) {
    return Eigen::Vector2cd(P * z + L * rng.draw());
  });
}

Trajectory propagate_exact(const ReducedDynamics& dyn, const SimulationOptions& options) {
  check_reduced(dyn, options);
  const Eigen::Matrix2cd A = dyn.drift;
  const Eigen::Matrix2cd V = solve_lyapunov(A, Eigen::Matrix2cd(dyn.diffusion));
  const Eigen::Matrix2cd E = (A * options.dt).exp();
  const Eigen::Matrix2cd L = psd_factor(V - E * V * E.adjoint());
  return integrate(dyn, options, V, [&](const Eigen::Vector2cd& z, ComplexNormal& rng) {
    return Eigen::Vector2cd(E * z + L * rng.draw());
  });
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master >> 32), static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(index >> 32), static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

unsigned worker_count() {
  if (const char* env = std::getenv("CLOCKSYNC_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Trajectory> run_ensemble(const ReducedDynamics& dyn, const EnsembleOptions& options) {
  if (options.n_traj < 1) throw ConfigError("run_ensemble: n_traj must be >= 1");
  check_reduced(dyn, options.simulation);

  std::vector<Trajectory> out(static_cast<std::size_t>(options.n_traj));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int j = next++; j < options.n_traj; j = next++) {
      try {
        SimulationOptions sim = options.simulation;
        sim.seed = derive_seed(options.master_seed, static_cast<std::uint64_t>(j));
        sim.initial = options.quench ? InitialState::uncoupled_thermal : InitialState::steady_state;
        out[static_cast<std::size_t>(j)] = options.integrator == Integrator::exact
                                               ? propagate_exact(dyn, sim)
                                               : simulate(dyn, sim);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = options.n_traj;
      }
    }
  };

  const unsigned n_workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(options.n_traj));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace clocksync

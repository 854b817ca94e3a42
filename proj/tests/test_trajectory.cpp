#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

#include <Eigen/Eigenvalues>

#include "clocksync/errors.hpp"
#include "clocksync/metrics.hpp"
#include "clocksync/steadystate.hpp"
#include "clocksync/trajectory.hpp"

using namespace clocksync;

namespace {

ReducedDynamics noiseless(const PhysicalParams& p) {
  ReducedDynamics dyn = reduced_dynamics(p);
  dyn.diffusion.setZero();
  return dyn;
}

struct Moments {
  Estimate n1, n2, cross;
};

Moments moments(const Trajectory& tr) {
  const Eigen::VectorXd q1 = tr.b1.cwiseAbs2();
  const Eigen::VectorXd q2 = tr.b2.cwiseAbs2();
  const Eigen::VectorXd qx = (tr.b1.array() * tr.b2.conjugate().array()).real();
  return {batch_mean(q1), batch_mean(q2), batch_mean(qx)};
}

bool within(const Estimate& a, double expected, double sigmas = 3.0) {
  return std::abs(a.value - expected) <= sigmas * a.error;
}

bool agree(const Estimate& a, const Estimate& b, double sigmas = 3.0) {
  return std::abs(a.value - b.value) <= sigmas * std::hypot(a.error, b.error);
}

}  // namespace

TEST_CASE("noiseless Euler-Maruyama decays at gamma/2") {
  const PhysicalParams p = preset("degenerate");
  SimulationOptions o;
  o.duration = 0.05;
  o.dt = 1.0e-5;
  o.initial = InitialState::given;
  o.initial_state = Eigen::Vector2cd(1.0, 0.0);
  const Trajectory tr = simulate(noiseless(p), o);
  for (Eigen::Index k = 0; k < tr.size(); k += 500)
    CHECK(std::abs(tr.b1(k)) == doctest::Approx(std::exp(-p.gamma1 * tr.times(k) / 2.0)).epsilon(1e-3));
}

TEST_CASE("same seed reproduces the trajectory bit for bit") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset().with_coupling(0.01));
  SimulationOptions o;
  o.duration = 0.02;
  o.dt = 1.0e-6;
  o.seed = 99;
  const Trajectory a = simulate(dyn, o), b = simulate(dyn, o);
  CHECK(a.b1 == b.b1);
  CHECK(a.b2 == b.b2);
  const Trajectory c = propagate_exact(dyn, o), d = propagate_exact(dyn, o);
  CHECK(c.b1 == d.b1);
  o.seed = 100;
  CHECK(simulate(dyn, o).b1 != a.b1);
}

TEST_CASE("uncoupled variance matches the thermal occupation") {
  // Without a frame rotation the Euler-Maruyama bias is gamma dt / 4, far below 3 sigma.
  const PhysicalParams p = preset("degenerate");
  SimulationOptions o;
  o.duration = 10.0;
  o.dt = 1.0e-5;
  o.seed = 4;
  const Moments m = moments(simulate(reduced_dynamics(p), o));
  CHECK(within(m.n1, p.nth1 + 0.5));
  CHECK(within(m.n2, p.nth2 + 0.5));
}

TEST_CASE("Euler-Maruyama variance converges at first order in dt") {
  // For z <- (1 + lambda dt) z + sqrt(D dt) xi the stationary variance is
  // D dt / (1 - |1 + lambda dt|^2) = D / (gamma - |lambda|^2 dt). In the frame
  // of clock 2, clock 1 rotates at delta_omega, so |lambda|^2 dt / gamma is
  // not small at the default step.
  const PhysicalParams p = paper_preset();
  const cdouble lambda(-p.gamma1 / 2.0, -p.delta_omega());
  const double D = p.gamma1 * (p.nth1 + 0.5);
  double previous = std::numeric_limits<double>::infinity();
  for (double dt : {1.0e-5, 5.0e-6, 2.5e-6}) {
    SimulationOptions o;
    o.duration = 20.0;
    o.dt = dt;
    o.seed = 8;
    const Moments m = moments(simulate(reduced_dynamics(p), o));
    const double expected = D / (p.gamma1 - std::norm(lambda) * dt);
    CHECK(within(m.n1, expected));
    CHECK(m.n1.value < previous);
    previous = m.n1.value;
  }
}

TEST_CASE("step size and stability preconditions") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset().with_coupling(0.04));
  SimulationOptions o;
  o.duration = 0.01;
  o.dt = 1.0e-3;
  try {
    simulate(dyn, o);
    FAIL("expected a step-size error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dt <=") != std::string::npos);
  }
  CHECK_NOTHROW(propagate_exact(dyn, o));

  PhysicalParams blue = paper_preset();
  blue.detuning = blue.kappa;
  o.dt = 1.0e-7;
  CHECK_THROWS_AS(simulate(reduced_dynamics(blue.with_coupling(0.05)), o), StabilityError);
  CHECK_THROWS_AS(propagate_exact(reduced_dynamics(blue.with_coupling(0.05)), o), StabilityError);
}

TEST_CASE("exact propagator without noise is the matrix-exponential flow") {
  const ReducedDynamics dyn = noiseless(paper_preset().with_coupling(0.02));
  SimulationOptions o;
  o.duration = 0.01;
  o.dt = 1.0e-4;
  o.initial = InitialState::given;
  o.initial_state = Eigen::Vector2cd(cdouble(1.0, 0.5), cdouble(-0.3, 2.0));
  const Trajectory tr = propagate_exact(dyn, o);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(Eigen::Matrix2cd(dyn.drift));
  const Eigen::Matrix2cd P = es.eigenvectors();
  for (Eigen::Index k : {Eigen::Index(0), Eigen::Index(37), tr.size() - 1}) {
    const double t = tr.times(k);
    const Eigen::Vector2cd decay = (es.eigenvalues() * t).array().exp();
    const Eigen::Vector2cd z = P * decay.asDiagonal() * P.inverse() * o.initial_state;
    CHECK(std::abs(tr.b1(k) - z(0)) <= 1e-9 * z.norm());
    CHECK(std::abs(tr.b2(k) - z(1)) <= 1e-9 * z.norm());
  }
}

TEST_CASE("one very long exact step lands in the NESS") {
  const PhysicalParams p = paper_preset().with_coupling(0.02);
  const ReducedDynamics dyn = reduced_dynamics(p);
  const Eigen::MatrixXcd V = solve_lyapunov(dyn.drift, dyn.diffusion);
  EnsembleOptions e;
  e.n_traj = 4000;
  e.master_seed = 8;
  e.simulation.dt = 100.0;
  e.simulation.duration = 200.0;
  const std::vector<Trajectory> ens = run_ensemble(dyn, e);
  Eigen::VectorXd q1(e.n_traj), qx(e.n_traj);
  for (int j = 0; j < e.n_traj; ++j) {
    q1(j) = std::norm(ens[j].b1(1));
    qx(j) = (ens[j].b1(1) * std::conj(ens[j].b2(1))).real();
  }
  CHECK(within(batch_mean(q1, 40), V(0, 0).real()));
  CHECK(within(batch_mean(qx, 40), V(0, 1).real()));
}

TEST_CASE("Euler-Maruyama and exact propagation agree on moments") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset().with_coupling(0.02));
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(Eigen::Matrix2cd(dyn.drift), false);
  SimulationOptions o;
  o.dt = 0.01 / es.eigenvalues().cwiseAbs().maxCoeff();
  o.duration = 2.0;
  o.seed = 21;
  o.initial = InitialState::steady_state;
  const Moments em = moments(simulate(dyn, o));
  o.seed = 22;
  const Moments ex = moments(propagate_exact(dyn, o));
  CHECK(agree(em.n1, ex.n1));
  CHECK(agree(em.n2, ex.n2));
  CHECK(agree(em.cross, ex.cross));
}

TEST_CASE("exact propagation reproduces the Lyapunov covariance") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset().with_coupling(0.02));
  const Eigen::MatrixXcd V = solve_lyapunov(dyn.drift, dyn.diffusion);
  SimulationOptions o;
  o.dt = 1.0e-5;
  o.duration = 10.0;
  o.seed = 5;
  o.initial = InitialState::steady_state;
  const Moments m = moments(propagate_exact(dyn, o));
  CHECK(within(m.n1, V(0, 0).real()));
  CHECK(within(m.n2, V(1, 1).real()));
  CHECK(within(m.cross, V(0, 1).real()));
}

TEST_CASE("second moments scale linearly with the diffusion") {
  const ReducedDynamics base = reduced_dynamics(paper_preset().with_coupling(0.01));
  SimulationOptions o;
  o.dt = 1.0e-5;
  o.duration = 0.2;
  o.seed = 77;
  o.initial = InitialState::steady_state;
  const Moments m0 = moments(propagate_exact(base, o));
  for (double c : {0.25, 9.0}) {
    ReducedDynamics scaled = base;
    scaled.diffusion *= c;
    const Moments mc = moments(propagate_exact(scaled, o));
    CHECK(mc.n1.value == doctest::Approx(c * m0.n1.value).epsilon(1e-9));
    CHECK(mc.cross.value == doctest::Approx(c * m0.cross.value).epsilon(1e-9));
    const Eigen::MatrixXcd V0 = solve_lyapunov(base.drift, base.diffusion);
    const Eigen::MatrixXcd Vc = solve_lyapunov(scaled.drift, scaled.diffusion);
    CHECK((Vc - c * V0).norm() <= 1e-9 * Vc.norm());
  }
}

TEST_CASE("stationary ensembles keep their covariance") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset().with_coupling(0.02));
  EnsembleOptions e;
  e.n_traj = 400;
  e.master_seed = 2;
  e.quench = false;
  e.simulation.dt = 1.0e-3;
  e.simulation.duration = 0.5;
  const std::vector<Trajectory> ens = run_ensemble(dyn, e);
  for (Eigen::Index t : {Eigen::Index(0), Eigen::Index(250), Eigen::Index(499)}) {
    Eigen::VectorXd q(e.n_traj);
    for (int j = 0; j < e.n_traj; ++j) q(j) = std::norm(ens[j].b1(t));
    const Estimate m = batch_mean(q, 40);
    CHECK(within(m, solve_lyapunov(dyn.drift, dyn.diffusion)(0, 0).real()));
  }
}

TEST_CASE("ensembles: seeding, ordering and thread independence") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset().with_coupling(0.01));
  EnsembleOptions e;
  e.n_traj = 1;
  e.master_seed = 1234;
  e.integrator = Integrator::euler_maruyama;
  e.simulation.dt = 1.0e-6;
  e.simulation.duration = 1.0e-3;
  const std::vector<Trajectory> one = run_ensemble(dyn, e);
  SimulationOptions o = e.simulation;
  o.seed = derive_seed(1234, 0);
  o.initial = InitialState::uncoupled_thermal;
  CHECK(one.front().b1 == simulate(dyn, o).b1);

  e.n_traj = 12;
  e.integrator = Integrator::exact;
  setenv("CLOCKSYNC_THREADS", "1", 1);
  const std::vector<Trajectory> serial = run_ensemble(dyn, e);
  setenv("CLOCKSYNC_THREADS", "4", 1);
  const std::vector<Trajectory> threaded = run_ensemble(dyn, e);
  unsetenv("CLOCKSYNC_THREADS");
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t j = 0; j < serial.size(); ++j) {
    CHECK(serial[j].b1 == threaded[j].b1);
    CHECK(serial[j].seed == derive_seed(1234, j));
  }
  CHECK_THROWS_AS(run_ensemble(dyn, [] { EnsembleOptions e; e.n_traj = 0; return e; }()), ConfigError);
}

TEST_CASE("derived seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 10000; ++k) seen.insert(derive_seed(42, k));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  CHECK(derive_seed(42, 7) != derive_seed(43, 7));
}

TEST_CASE("displacement reconstruction") {
  Trajectory tr;
  tr.dt = 1.0e-6;
  tr.times = Eigen::VectorXd::LinSpaced(3, 0.0, 2.0e-6);
  tr.b1 = Eigen::VectorXcd::Constant(3, cdouble(0.0, 1.0));
  tr.b2 = tr.b1;
  tr.reference_frequency = 1.0e5;
  const Eigen::VectorXd x = tr.displacement(1);
  for (Eigen::Index k = 0; k < 3; ++k)
    CHECK(x(k) == doctest::Approx(std::sqrt(2.0) * std::sin(1.0e5 * tr.times(k))));
  CHECK_THROWS_AS(tr.displacement(3), ConfigError);
}

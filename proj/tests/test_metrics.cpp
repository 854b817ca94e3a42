#include <doctest.h>

#include <cmath>
#include <random>

#include "clocksync/errors.hpp"
#include "clocksync/metrics.hpp"
#include "clocksync/steadystate.hpp"

using namespace clocksync;

namespace {

Trajectory envelope_record(double omega_ref, double dt, Eigen::Index n, auto&& envelope) {
  Trajectory tr;
  tr.dt = dt;
  tr.reference_frequency = omega_ref;
  tr.times = Eigen::VectorXd::LinSpaced(n, 0.0, dt * static_cast<double>(n - 1));
  tr.b1.resize(n);
  tr.b2.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    tr.b1(k) = envelope(tr.times(k));
    tr.b2(k) = tr.b1(k);
  }
  return tr;
}

Eigen::VectorXd white(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd x(n);
  for (Eigen::Index k = 0; k < n; ++k) x(k) = g(rng);
  return x;
}

}  // namespace

TEST_CASE("Pearson degree: identities and errors") {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd x = white(rng, 500);
  CHECK(pearson_sync_degree(x, x) == doctest::Approx(1.0));
  CHECK(pearson_sync_degree(x, -x) == doctest::Approx(-1.0));
  CHECK(pearson_sync_degree(x, 3.0 * x + Eigen::VectorXd::Constant(500, 7.0)) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(pearson_sync_degree(x, Eigen::VectorXd::Constant(500, 2.0)), NumericalError);
  CHECK_THROWS_AS(pearson_sync_degree(x, white(rng, 10)), ConfigError);
  CHECK_THROWS_AS(pearson_sync_degree(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)),
                  ConfigError);
}

TEST_CASE("Pearson degree is bounded by one on arbitrary data") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(-1e6, 1e6);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 2 + trial % 50;
    const Eigen::VectorXd a = white(rng, n) * scale(rng);
    const Eigen::VectorXd b = a * scale(rng) + white(rng, n) * 1e-9;
    const double c = pearson_sync_degree(a, b);
    CHECK(std::abs(c) <= 1.0);
  }
}

TEST_CASE("independent white noise stays inside 3/sqrt(n)") {
  std::mt19937_64 rng(3);
  const Eigen::Index n = 2000;
  int inside = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial)
    if (std::abs(pearson_sync_degree(white(rng, n), white(rng, n))) < 3.0 / std::sqrt(double(n)))
      ++inside;
  CHECK(inside >= 0.99 * trials);
}

TEST_CASE("uncoupled clocks are uncorrelated") {
  const ReducedDynamics dyn = reduced_dynamics(paper_preset());
  SimulationOptions o;
  o.dt = 1.0e-5;
  o.duration = 10.0;
  o.seed = 17;
  o.initial = InitialState::steady_state;
  const Estimate c = sync_degree_estimate(propagate_exact(dyn, o));
  CHECK(std::abs(c.value) <= 3.0 * c.error);
}

TEST_CASE("ticks of a constant envelope fall on the carrier period") {
  const double omega = kTwoPi * 400.0e3;
  const Trajectory tr = envelope_record(omega, 1.0e-6, 2001, [](double) { return cdouble(1.0); });
  const TickSeries t = extract_ticks(tr, 1);
  REQUIRE(t.tick_times.size() > 10);
  for (std::size_t k = 0; k < t.tick_times.size(); ++k)
    CHECK(t.tick_times[k] == doctest::Approx(kTwoPi * static_cast<double>(k) / omega).epsilon(1e-12));
  for (double period : t.periods) CHECK(period == doctest::Approx(kTwoPi / omega).epsilon(1e-9));
  CHECK(t.gap_count == 0);
  CHECK(t.valid_count() == t.periods.size());
}

TEST_CASE("a frequency-offset envelope shifts the tick rate") {
  const double omega = kTwoPi * 400.0e3, shift = kTwoPi * 350.0;
  const Trajectory tr = envelope_record(omega, 1.0e-5, 20001, [&](double t) {
    return std::polar(1.0, -shift * t);
  });
  const TickSeries t = extract_ticks(tr, 2, {0.001, 0.2});
  for (std::size_t k = 0; k < t.periods.size(); k += 97)
    CHECK(t.periods[k] == doctest::Approx(kTwoPi / (omega + shift)).epsilon(1e-9));
}

TEST_CASE("envelope dropouts are flagged as tick gaps") {
  const double omega = kTwoPi * 1.0e3;
  const Trajectory tr = envelope_record(omega, 1.0e-5, 100001, [](double t) {
    return cdouble(std::abs(t - 0.5) < 0.01 ? 1e-3 : 1.0);
  });
  const TickSeries t = extract_ticks(tr, 1);
  CHECK(t.gap_count == 1);
  CHECK(t.valid_count() < t.periods.size());
  CHECK(t.valid_count() > t.periods.size() / 2);
}

TEST_CASE("tick extraction needs enough record") {
  const Trajectory tr = envelope_record(kTwoPi * 10.0, 1.0e-3, 50, [](double) { return cdouble(1.0); });
  CHECK_THROWS_AS(extract_ticks(tr, 1), ConfigError);
}

TEST_CASE("clock statistics: identical trains and noiseless periods") {
  const double omega = kTwoPi * 400.0e3;
  const Trajectory tr = envelope_record(omega, 1.0e-6, 2001, [](double) { return cdouble(1.0); });
  const TickSeries t = extract_ticks(tr, 1);
  TickSeries jittered = t;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1e-9);
  for (double& p : jittered.periods) p += g(rng);
  const SyncMetrics same = clock_stats(jittered, jittered);
  CHECK(same.D == 0.0);
  CHECK(std::isfinite(same.N1));
  CHECK(same.N1 > 0.0);

  TickSeries flat = t;
  for (double& p : flat.periods) p = 2.5e-6;
  const SyncMetrics ideal = clock_stats(flat, flat);
  CHECK(std::isinf(ideal.N1));
  CHECK(ideal.N1 > 0.0);
}

TEST_CASE("stochastic NESS periods match the normal-mode frequency") {
  const PhysicalParams p = paper_preset();
  const ReducedDynamics dyn = reduced_dynamics(p);
  SimulationOptions o;
  o.dt = 1.0e-5;
  o.duration = 10.0;
  o.seed = 31;
  o.initial = InitialState::steady_state;
  const Trajectory tr = propagate_exact(dyn, o);
  const NormalModes modes = normal_modes_numeric(dyn);
  const double omega_mode[2] = {p.omega2 + modes.omega_plus(), p.omega2 + modes.omega_minus()};
  for (int clock : {1, 2}) {
    const TickSeries t = extract_ticks(tr, clock, {0.01, 0.2});
    Eigen::VectorXd periods(static_cast<Eigen::Index>(t.periods.size()));
    for (std::size_t k = 0; k < t.periods.size(); ++k) periods(k) = t.periods[k];
    const Estimate mean = batch_mean(periods, 20);
    CHECK(std::abs(mean.value - kTwoPi / omega_mode[clock - 1]) <= 3.0 * mean.error);
  }
}

TEST_CASE("Welch spectrum: sinusoid peak and Parseval") {
  const double dt = 1.0e-4, f0 = 625.0;  // bin-centred for L = 512
  const Eigen::Index n = 20000;
  Eigen::VectorXd x(n);
  for (Eigen::Index k = 0; k < n; ++k) x(k) = 2.0 * std::sin(kTwoPi * f0 * dt * k);
  const Spectrum s = power_spectrum(x, dt, 512);
  const std::vector<Peak> peaks = find_peaks(s, 0.5);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks.front().frequency == doctest::Approx(f0));
  const double var = (x.array() - x.mean()).square().mean();
  CHECK(s.psd.sum() * s.resolution == doctest::Approx(var).epsilon(0.01));

  std::mt19937_64 rng(6);
  const Eigen::VectorXd w = white(rng, 1 << 16);
  const Spectrum sw = power_spectrum(w, dt, 1024);
  CHECK(sw.psd.sum() * sw.resolution == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(power_spectrum(w.head(100), dt, 1024), ConfigError);
}

TEST_CASE("segment length spans eight beat periods") {
  const int L = spectrum_segment_length(1.0e-5, kTwoPi * 200.0);
  CHECK(L == 4096);
  CHECK(L * 1.0e-5 >= 8.0 / 200.0);
}

TEST_CASE("peak width of a sampled Lorentzian") {
  Spectrum s;
  s.frequency = Eigen::VectorXd::LinSpaced(2001, -100.0, 100.0);
  s.psd.resize(2001);
  const double hw = 5.0;
  for (Eigen::Index k = 0; k < 2001; ++k)
    s.psd(k) = 1.0 / (1.0 + std::pow(s.frequency(k) / hw, 2));
  CHECK(peak_width(s, 1000) == doctest::Approx(2.0 * hw).epsilon(1e-3));
}

TEST_CASE("transient correlation: identical, independent and degenerate ensembles") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const int n = 600;
  std::vector<Trajectory> same(n), indep(n);
  for (int j = 0; j < n; ++j) {
    for (Trajectory* tr : {&same[j], &indep[j]}) {
      tr->dt = 1.0;
      tr->times = Eigen::VectorXd::LinSpaced(3, 0.0, 2.0);
      tr->b1.resize(3);
      tr->b2.resize(3);
    }
    for (int t = 0; t < 3; ++t) {
      same[j].b1(t) = same[j].b2(t) = cdouble(g(rng), g(rng));
      indep[j].b1(t) = cdouble(g(rng), g(rng));
      indep[j].b2(t) = t == 2 ? cdouble(1.0) : cdouble(g(rng), g(rng));
    }
  }
  const CorrelationSeries rs = transient_correlation(same);
  for (int t = 0; t < 3; ++t) CHECK(rs.R(t) == doctest::Approx(1.0));
  const CorrelationSeries ri = transient_correlation(indep);
  CHECK(std::abs(ri.R(0)) < 3.0 / std::sqrt(double(n)));
  CHECK_FALSE(ri.defined[2]);
  CHECK(std::isnan(ri.R(2)));
  CHECK_THROWS_AS(transient_correlation(std::vector<Trajectory>(1, same[0])), ConfigError);
}

TEST_CASE("transient correlation is bounded on random ensembles") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<Trajectory> ens(5);
  for (Trajectory& tr : ens) {
    tr.dt = 1.0;
    tr.times = Eigen::VectorXd::LinSpaced(200, 0.0, 199.0);
    tr.b1.resize(200);
    tr.b2.resize(200);
    for (int t = 0; t < 200; ++t) {
      tr.b1(t) = cdouble(g(rng), g(rng)) * 1e8;
      tr.b2(t) = tr.b1(t) * (1.0 + 1e-12 * g(rng));
    }
  }
  const CorrelationSeries r = transient_correlation(ens);
  CHECK(r.R.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("moving median keeps monotone ramps and drops spikes") {
  Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(101, 0.0, 1.0).array().square();
  CHECK((moving_median(ramp, 11) - ramp).cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXd spiky = Eigen::VectorXd::Zero(50);
  spiky(20) = 100.0;
  CHECK(moving_median(spiky, 5).maxCoeff() == 0.0);
}

TEST_CASE("transient time rules") {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(1001, 0.0, 10.0);
  Eigen::VectorXd step(t.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) step(k) = t(k) >= 2.5 ? 1.0 : 0.0;
  CHECK(transient_time(t, step) == doctest::Approx(2.5));

  const double tau = 1.0;
  const Eigen::VectorXd rise = 1.0 - (-t.array() / tau).exp();
  CHECK(transient_time(t, rise) == doctest::Approx(3.0 * tau).epsilon(0.01));

  CHECK_THROWS_AS(transient_time(t, t / 10.0), NumericalError);
  CHECK_THROWS_AS(transient_time(t, -rise), NumericalError);
}

TEST_CASE("transient entropy flux: size guard, pre-quench state and NESS limit") {
  const PhysicalParams p = paper_preset().with_coupling(0.04);
  const ReducedDynamics dyn = reduced_dynamics(p);
  EnsembleOptions e;
  e.n_traj = 10;
  e.simulation.dt = 1.0e-4;
  e.simulation.duration = 0.1;
  CHECK_THROWS_AS(transient_entropy_flux(run_ensemble(dyn, e), dyn, p), ConfigError);

  e.n_traj = 300;
  e.master_seed = 5;
  const std::vector<Trajectory> ens = run_ensemble(dyn, e);
  const FluxSeries f = transient_entropy_flux(ens, dyn, p);
  CHECK(std::abs(f.mu_b1(0)) <= 3.0 * f.mu_b1_err(0));
  CHECK(std::abs(f.mu_b2(0)) <= 3.0 * f.mu_b2_err(0));
  CHECK(f.mu_a(0) == 0.0);
  CHECK(f.mu_a(1) > 0.0);

  const EntropyRates ness = entropy_rates(steady_state(dyn), p);
  const FluxEstimate tail = tail_entropy_flux(ens, dyn, p, 0.08);
  CHECK(std::abs(tail.mu_b1.value - ness.mu_b1) <= 3.0 * tail.mu_b1.error);
  CHECK(std::abs(tail.mu_b2.value - ness.mu_b2) <= 3.0 * tail.mu_b2.error);
  CHECK(std::abs(tail.mu_a.value - ness.mu_a) <= 3.0 * tail.mu_a.error);
}

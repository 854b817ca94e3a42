#pragma once

#include <vector>

#include <Eigen/Dense>

#include "clocksync/model.hpp"
#include "clocksync/params.hpp"
#include "clocksync/steadystate.hpp"
#include "clocksync/trajectory.hpp"

namespace clocksync {

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // one standard error
};

struct SyncMetrics {
  double C = 0.0;
  double D = 0.0;
  double N1 = 0.0;
  double N2 = 0.0;
};

// Pearson correlation of two equally long series, means removed.
// Throws NumericalError when either series is constant.
double pearson_sync_degree(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2);

// C of the displacements averaged over the carrier phase: Pearson over both
// quadratures sqrt(2) Re b and sqrt(2) Im b of each envelope. This is the
// value a lab record with many carrier cycles per window converges to, and it
// does not alias when dt is commensurate with the carrier period.
double sync_degree(const Trajectory& traj);

// Batch-means estimate of C: the record is cut into n_batches contiguous
// blocks, C is computed per block and the spread gives the standard error.
Estimate sync_degree_estimate(const Trajectory& traj, int n_batches = 20);

// Mean and batch-means standard error of a correlated series.
Estimate batch_mean(const Eigen::VectorXd& series, int n_batches = 20);

struct TickSeries {
  std::vector<double> tick_times;
  std::vector<double> periods;  // periods[k] = tick_times[k+1] - tick_times[k]
  std::vector<bool> period_valid;
  int gap_count = 0;  // contiguous stretches with the envelope below the floor

  std::size_t valid_count() const;
};

struct TickOptions {
  // Moving-average width (s) applied to the unwrapped envelope phase before
  // ticks are located. Zero keeps the phase as sampled.
  double smoothing_window = 0.0;
  // Samples with |b| below amplitude_floor * rms(|b|) have no usable phase;
  // periods touching them (widened by half the smoothing window) are invalid.
  double amplitude_floor = 0.2;
};

// Ticks where phi(t) = reference_frequency * t - arg b(t) crosses successive
// multiples of 2 pi, linearly interpolated between samples.
TickSeries extract_ticks(const Trajectory& traj, int clock, const TickOptions& options = {});

// D from index-paired periods, N_i from each clock's own valid periods.
// N_i = +infinity when the periods have zero variance. C is left at zero.
SyncMetrics clock_stats(const TickSeries& ticks1, const TickSeries& ticks2);

struct Spectrum {
  Eigen::VectorXd frequency;  // Hz
  Eigen::VectorXd psd;        // one-sided, units^2 / Hz
  double resolution = 0.0;    // Hz
  int segments = 0;
};

// Welch estimate with a Hann window and 50% overlap. Each segment has its
// mean removed.
Spectrum power_spectrum(const Eigen::VectorXd& x, double dt, int segment_length);

// Power-of-two segment length spanning at least 8 beat periods 2 pi / delta_omega.
int spectrum_segment_length(double dt, double delta_omega);

// Spectrum of clock's displacement mixed down to an intermediate frequency:
// the envelope is re-modulated on a carrier offset_hz above zero so the
// sampled record resolves both clocks, and frequencies are reported on the
// lab axis (reference frequency + offset from it).
Spectrum displacement_spectrum(const Trajectory& traj, int clock, int segment_length,
                               double offset_hz = 10.0e3);

struct Peak {
  double frequency = 0.0;
  double power = 0.0;
  Eigen::Index bin = 0;
};

// Local maxima of the PSD that reach min_relative_height of the global
// maximum, strongest first.
std::vector<Peak> find_peaks(const Spectrum& spectrum, double min_relative_height = 0.1);

// Full width at half maximum of the peak at the given bin, with linear
// interpolation between bins (Hz).
double peak_width(const Spectrum& spectrum, Eigen::Index bin);

struct CorrelationSeries {
  Eigen::VectorXd times;
  Eigen::VectorXd R;             // NaN where undefined
  std::vector<bool> defined;
};

// R(t) across the ensemble, means removed at each t, averaged over carrier
// phase like sync_degree. Requires at least 2 trajectories on one time grid.
CorrelationSeries transient_correlation(const std::vector<Trajectory>& ensemble);

// Moving median with a symmetric window of width_samples (shrinking at the
// ends). NaN samples are ignored.
Eigen::VectorXd moving_median(const Eigen::VectorXd& x, int width_samples);

// First time the moving-median R (window 5% of the record) reaches 95% of its
// maximum. The last 20% must be a plateau: the least-squares drift across it
// may not exceed 3 residual standard deviations plus 0.01 (absolute).
double transient_time(const Eigen::VectorXd& times, const Eigen::VectorXd& R);

struct FluxSeries {
  Eigen::VectorXd times;
  Eigen::VectorXd mu_b1, mu_b2, mu_a;
  Eigen::VectorXd mu_b1_err, mu_b2_err, mu_a_err;  // standard errors
};

// Entropy fluxes from instantaneous ensemble occupations, n_i(t) + 1/2 =
// mean |b_i|^2 and n_cross(t) = mean Re(b1 conj b2), taken about zero (the
// dynamics is phase-insensitive so the mean envelope vanishes). Samples at
// t <= 0 are the pre-quench state and use the cavity-off readout.
// Requires at least 50 trajectories.
FluxSeries transient_entropy_flux(const std::vector<Trajectory>& ensemble,
                                  const ReducedDynamics& dyn, const PhysicalParams& params);

struct TransientResult {
  Eigen::VectorXd times;
  Eigen::VectorXd R;
  Eigen::VectorXd mu_b1_t, mu_b2_t, mu_a_t;
  Eigen::VectorXd mu_b1_err, mu_b2_err, mu_a_err;
  double transient_time = 0.0;
  // Trapezoidal integral of |mu_a(t)| from 0 to transient_time.
  double integrated_mu_a = 0.0;
};

struct FluxEstimate {
  Estimate mu_b1, mu_b2, mu_a;
};

// Fluxes averaged over t >= t_from: each trajectory is time-averaged first, so
// the standard errors come from independent samples.
FluxEstimate tail_entropy_flux(const std::vector<Trajectory>& ensemble, const ReducedDynamics& dyn,
                               const PhysicalParams& params, double t_from);

}  // namespace clocksync

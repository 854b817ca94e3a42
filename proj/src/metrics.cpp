#include "clocksync/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "clocksync/errors.hpp"

namespace clocksync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_variance(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Estimate mean_and_error(const std::vector<double>& v) {
  Estimate e;
  e.value = mean_of(v);
  e.error = v.size() > 1 ? std::sqrt(sample_variance(v, e.value) / static_cast<double>(v.size()))
                         : kNaN;
  return e;
}

Eigen::VectorXd unwrapped_phase(const Eigen::VectorXcd& b) {
  Eigen::VectorXd ph(b.size());
  double offset = 0.0;
  double prev = 0.0;
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const double a = std::arg(b(k));
    if (k > 0) {
      const double jump = a - prev;
      if (jump > std::numbers::pi) offset -= kTwoPi;
      if (jump < -std::numbers::pi) offset += kTwoPi;
    }
    ph(k) = a + offset;
    prev = a;
  }
  return ph;
}

// Centered moving average with half-width h, shrinking symmetrically at the ends.
Eigen::VectorXd moving_average(const Eigen::VectorXd& x, Eigen::Index h) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd prefix(n + 1);
  prefix(0) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) prefix(k + 1) = prefix(k) + x(k);
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = std::min({h, k, n - 1 - k});
    out(k) = (prefix(k + r + 1) - prefix(k - r)) / static_cast<double>(2 * r + 1);
  }
  return out;
}

void check_ensemble(const std::vector<Trajectory>& ensemble, std::size_t min_size,
                    const char* what) {
  if (ensemble.size() < min_size)
    throw ConfigError(std::string(what) + ": ensemble needs at least " +
                      std::to_string(min_size) + " trajectories");
  const Eigen::Index n = ensemble.front().size();
  for (const Trajectory& tr : ensemble)
    if (tr.size() != n || tr.b1.size() != n || tr.b2.size() != n || tr.dt != ensemble.front().dt)
      throw ConfigError(std::string(what) + ": trajectories do not share a time grid");
}

struct FluxTerms {
  double mu_b1, mu_b2, mu_a;
};

FluxTerms flux_terms(cdouble b1, cdouble b2, const CavityReadout& readout,
                     const PhysicalParams& params) {
  const double q1 = std::norm(b1), q2 = std::norm(b2);
  const double qx = (b1 * std::conj(b2)).real();
  FluxTerms f;
  f.mu_b1 = params.gamma1 * (q1 / (params.nth1 + 0.5) - 1.0);
  f.mu_b2 = params.gamma2 * (q2 / (params.nth2 + 0.5) - 1.0);
  f.mu_a = 2.0 * params.kappa * reconstruct_cavity_occupation(readout, q1 - 0.5, q2 - 0.5, qx);
  return f;
}

const CavityReadout& readout_of(const ReducedDynamics& dyn) {
  if (!dyn.readout) throw ConfigError("entropy flux: dynamics lacks a cavity readout");
  return *dyn.readout;
}

}  // namespace

double pearson_sync_degree(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
  if (x1.size() != x2.size()) throw ConfigError("pearson: series lengths differ");
  if (x1.size() < 2) throw ConfigError("pearson: need at least 2 samples");
  const Eigen::ArrayXd d1 = x1.array() - x1.mean();
  const Eigen::ArrayXd d2 = x2.array() - x2.mean();
  const double s11 = d1.square().sum(), s22 = d2.square().sum();
  if (!(s11 > 0.0) || !(s22 > 0.0))
    throw NumericalError("pearson: correlation undefined for a constant series");
  return std::clamp((d1 * d2).sum() / std::sqrt(s11 * s22), -1.0, 1.0);
}

double sync_degree(const Trajectory& traj) {
  const Eigen::Index n = traj.size();
  Eigen::VectorXd x1(2 * n), x2(2 * n);
  x1 << traj.b1.real(), traj.b1.imag();
  x2 << traj.b2.real(), traj.b2.imag();
  return pearson_sync_degree(x1, x2);
}

Estimate sync_degree_estimate(const Trajectory& traj, int n_batches) {
  if (n_batches < 2) throw ConfigError("sync_degree_estimate: need at least 2 batches");
  const Eigen::Index len = traj.size() / n_batches;
  if (len < 2) throw ConfigError("sync_degree_estimate: trajectory too short for the batches");
  std::vector<double> values;
  for (int k = 0; k < n_batches; ++k) {
    Trajectory part;
    part.times = traj.times.segment(k * len, len);
    part.b1 = traj.b1.segment(k * len, len);
    part.b2 = traj.b2.segment(k * len, len);
    values.push_back(sync_degree(part));
  }
  Estimate e = mean_and_error(values);
  e.value = sync_degree(traj);
  return e;
}

Estimate batch_mean(const Eigen::VectorXd& series, int n_batches) {
  if (n_batches < 2) throw ConfigError("batch_mean: need at least 2 batches");
  const Eigen::Index len = series.size() / n_batches;
  if (len < 1) throw ConfigError("batch_mean: series shorter than the batch count");
  std::vector<double> values;
  for (int k = 0; k < n_batches; ++k) values.push_back(series.segment(k * len, len).mean());
  Estimate e = mean_and_error(values);
  e.value = series.mean();
  return e;
}

std::size_t TickSeries::valid_count() const {
  return static_cast<std::size_t>(std::count(period_valid.begin(), period_valid.end(), true));
}

TickSeries extract_ticks(const Trajectory& traj, int clock, const TickOptions& options) {
  const Eigen::VectorXcd& b = traj.envelope(clock);
  const Eigen::Index n = b.size();
  if (n < 2 || traj.times.size() != n) throw ConfigError("extract_ticks: trajectory too short");
  if (options.smoothing_window < 0.0 || options.amplitude_floor < 0.0)
    throw ConfigError("extract_ticks: smoothing window and amplitude floor must be >= 0");

  const auto half = static_cast<Eigen::Index>(std::llround(0.5 * options.smoothing_window / traj.dt));
  Eigen::VectorXd phase = unwrapped_phase(b);
  if (half > 0) phase = moving_average(phase, half);
  const Eigen::VectorXd phi = traj.reference_frequency * traj.times - phase;

  const Eigen::ArrayXd amp = b.cwiseAbs().array();
  const double floor = options.amplitude_floor * std::sqrt(amp.square().mean());
  std::vector<bool> low(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) low[k] = amp(k) < floor;

  TickSeries ticks;
  for (Eigen::Index k = 0; k < n; ++k)
    if (low[k] && (k == 0 || !low[k - 1])) ++ticks.gap_count;

  // Samples whose smoothed phase involves a low-amplitude sample.
  std::vector<Eigen::Index> low_before(static_cast<std::size_t>(n) + 1, 0);
  for (Eigen::Index k = 0; k < n; ++k) low_before[k + 1] = low_before[k] + (low[k] ? 1 : 0);
  std::vector<bool> tainted(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + half);
    tainted[k] = low_before[hi + 1] > low_before[lo];
  }

  std::vector<bool> tick_bad;
  double level = std::ceil(phi(0) / kTwoPi);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    while (phi(k + 1) >= level * kTwoPi) {
      const double target = level * kTwoPi;
      const double span = phi(k + 1) - phi(k);
      const double frac = span > 0.0 ? std::clamp((target - phi(k)) / span, 0.0, 1.0) : 1.0;
      const double t = traj.times(k) + frac * (traj.times(k + 1) - traj.times(k));
      if (ticks.tick_times.empty() || t > ticks.tick_times.back()) {
        ticks.tick_times.push_back(t);
        tick_bad.push_back(tainted[k] || tainted[k + 1]);
      }
      level += 1.0;
    }
  }
  if (ticks.tick_times.size() < 10)
    throw ConfigError("extract_ticks: fewer than 10 ticks; lengthen the trajectory");

  const std::size_t m = ticks.tick_times.size() - 1;
  ticks.periods.resize(m);
  ticks.period_valid.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    ticks.periods[k] = ticks.tick_times[k + 1] - ticks.tick_times[k];
    ticks.period_valid[k] = !tick_bad[k] && !tick_bad[k + 1];
  }
  return ticks;
}

SyncMetrics clock_stats(const TickSeries& ticks1, const TickSeries& ticks2) {
  if (ticks1.periods.size() < 10 || ticks2.periods.size() < 10)
    throw ConfigError("clock_stats: need at least 10 periods per clock");
  auto valid_periods = [](const TickSeries& t) {
    std::vector<double> out;
    for (std::size_t k = 0; k < t.periods.size(); ++k)
      if (t.period_valid[k]) out.push_back(t.periods[k]);
    return out;
  };
  auto accuracy = [](const std::vector<double>& p) {
    if (p.size() < 2) throw NumericalError("clock_stats: fewer than 2 valid periods");
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    if (*lo == *hi) return std::numeric_limits<double>::infinity();
    const double m = mean_of(p);
    return m * m / sample_variance(p, m);
  };

  std::vector<double> tau, mid;
  const std::size_t m = std::min(ticks1.periods.size(), ticks2.periods.size());
  for (std::size_t k = 0; k < m; ++k) {
    if (!ticks1.period_valid[k] || !ticks2.period_valid[k]) continue;
    tau.push_back(ticks2.periods[k] - ticks1.periods[k]);
    mid.push_back(0.5 * (ticks1.periods[k] + ticks2.periods[k]));
  }
  if (tau.size() < 2) throw NumericalError("clock_stats: fewer than 2 valid period pairs");

  SyncMetrics s;
  const double mean_mid = mean_of(mid);
  s.D = sample_variance(tau, mean_of(tau)) / (mean_mid * mean_mid);
  s.N1 = accuracy(valid_periods(ticks1));
  s.N2 = accuracy(valid_periods(ticks2));
  return s;
}

Spectrum power_spectrum(const Eigen::VectorXd& x, double dt, int segment_length) {
  if (!(dt > 0.0)) throw ConfigError("power_spectrum: dt must be > 0");
  if (segment_length < 4) throw ConfigError("power_spectrum: segment length must be >= 4");
  if (x.size() < segment_length)
    throw ConfigError("power_spectrum: series shorter than one segment (" +
                      std::to_string(x.size()) + " < " + std::to_string(segment_length) + ")");

  const int L = segment_length;
  const int hop = L / 2;
  std::vector<double> window(L);
  double U = 0.0;
  for (int k = 0; k < L; ++k) {
    window[k] = 0.5 - 0.5 * std::cos(kTwoPi * k / L);
    U += window[k] * window[k];
  }

  Eigen::FFT<double> fft;
  const int bins = L / 2 + 1;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(bins);
  std::vector<double> seg(L);
  std::vector<std::complex<double>> spec;
  int count = 0;
  for (Eigen::Index start = 0; start + L <= x.size(); start += hop, ++count) {
    const double mean = x.segment(start, L).mean();
    for (int k = 0; k < L; ++k) seg[k] = (x(start + k) - mean) * window[k];
    fft.fwd(spec, seg);
    for (int k = 0; k < bins; ++k) acc(k) += std::norm(spec[k]);
  }

  const double fs = 1.0 / dt;
  Spectrum out;
  out.segments = count;
  out.resolution = fs / L;
  out.frequency = Eigen::VectorXd::LinSpaced(bins, 0.0, out.resolution * (bins - 1));
  out.psd = acc / (count * fs * U);
  out.psd.segment(1, bins - 2) *= 2.0;  // fold negative frequencies; DC and Nyquist stay single
  return out;
}

Spectrum displacement_spectrum(const Trajectory& traj, int clock, int segment_length,
                               double offset_hz) {
  Spectrum s = power_spectrum(traj.displacement(clock, kTwoPi * offset_hz), traj.dt, segment_length);
  s.frequency.array() += traj.reference_frequency / kTwoPi - offset_hz;
  return s;
}

int spectrum_segment_length(double dt, double delta_omega) {
  if (!(dt > 0.0) || delta_omega == 0.0)
    throw ConfigError("spectrum_segment_length: need dt > 0 and a nonzero splitting");
  const double samples = 8.0 * kTwoPi / std::abs(delta_omega) / dt;
  int L = 4;
  while (L < samples) L *= 2;
  return L;
}

std::vector<Peak> find_peaks(const Spectrum& spectrum, double min_relative_height) {
  const Eigen::VectorXd& p = spectrum.psd;
  const double top = p.maxCoeff();
  std::vector<Peak> peaks;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const bool left = k == 0 || p(k) > p(k - 1);
    const bool right = k + 1 == p.size() || p(k) >= p(k + 1);
    if (left && right && p(k) >= min_relative_height * top)
      peaks.push_back({spectrum.frequency(k), p(k), k});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.power > b.power; });
  return peaks;
}

double peak_width(const Spectrum& spectrum, Eigen::Index bin) {
  const Eigen::VectorXd& p = spectrum.psd;
  const Eigen::VectorXd& f = spectrum.frequency;
  const double half = 0.5 * p(bin);
  auto crossing = [&](Eigen::Index step) {
    Eigen::Index k = bin;
    while (k + step >= 0 && k + step < p.size() && p(k + step) > half) k += step;
    if (k + step < 0 || k + step >= p.size()) return f(k);
    const Eigen::Index j = k + step;
    return f(k) + (f(j) - f(k)) * (p(k) - half) / (p(k) - p(j));
  };
  return crossing(1) - crossing(-1);
}

CorrelationSeries transient_correlation(const std::vector<Trajectory>& ensemble) {
  check_ensemble(ensemble, 2, "transient_correlation");
  const Eigen::Index n = ensemble.front().size();
  const double count = static_cast<double>(ensemble.size());
  CorrelationSeries out;
  out.times = ensemble.front().times;
  out.R.resize(n);
  out.defined.resize(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    cdouble m1 = 0.0, m2 = 0.0;
    for (const Trajectory& tr : ensemble) {
      m1 += tr.b1(t);
      m2 += tr.b2(t);
    }
    m1 /= count;
    m2 /= count;
    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    for (const Trajectory& tr : ensemble) {
      const cdouble d1 = tr.b1(t) - m1, d2 = tr.b2(t) - m2;
      s11 += std::norm(d1);
      s22 += std::norm(d2);
      s12 += (d1 * std::conj(d2)).real();
    }
    const bool ok = s11 > 0.0 && s22 > 0.0;
    out.defined[t] = ok;
    out.R(t) = ok ? std::clamp(s12 / std::sqrt(s11 * s22), -1.0, 1.0) : kNaN;
  }
  return out;
}

Eigen::VectorXd moving_median(const Eigen::VectorXd& x, int width_samples) {
  const Eigen::Index n = x.size();
  const Eigen::Index h = std::max(0, width_samples / 2);
  Eigen::VectorXd out(n);
  std::vector<double> buf;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = std::min({h, k, n - 1 - k});
    buf.clear();
    for (Eigen::Index j = k - r; j <= k + r; ++j)
      if (!std::isnan(x(j))) buf.push_back(x(j));
    if (buf.empty()) {
      out(k) = kNaN;
      continue;
    }
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double med = *mid;
    if (buf.size() % 2 == 0) med = 0.5 * (med + *std::max_element(buf.begin(), mid));
    out(k) = med;
  }
  return out;
}

double transient_time(const Eigen::VectorXd& times, const Eigen::VectorXd& R) {
  const Eigen::Index n = R.size();
  if (times.size() != n || n < 10) throw ConfigError("transient_time: need >= 10 matching samples");

  // Plateau check on the last 20% of the record.
  const Eigen::Index start = n - std::max<Eigen::Index>(5, n / 5);
  std::vector<double> tt, rr;
  for (Eigen::Index k = start; k < n; ++k)
    if (!std::isnan(R(k))) {
      tt.push_back(times(k));
      rr.push_back(R(k));
    }
  if (tt.size() < 3) throw NumericalError("transient_time: tail of R(t) is undefined");
  const double tm = mean_of(tt), rm = mean_of(rr);
  double stt = 0.0, str = 0.0;
  for (std::size_t k = 0; k < tt.size(); ++k) {
    stt += (tt[k] - tm) * (tt[k] - tm);
    str += (tt[k] - tm) * (rr[k] - rm);
  }
  const double slope = str / stt;
  double sres = 0.0;
  for (std::size_t k = 0; k < tt.size(); ++k) {
    const double e = rr[k] - rm - slope * (tt[k] - tm);
    sres += e * e;
  }
  const double resid = std::sqrt(sres / static_cast<double>(tt.size() - 2));
  const double drift = std::abs(slope) * (tt.back() - tt.front());
  if (drift > 3.0 * resid + 0.01)
    throw NumericalError("transient_time: R(t) has not reached a plateau in the last 20% of "
                         "the window; use a longer duration");

  const Eigen::VectorXd smooth = moving_median(R, std::max<int>(1, static_cast<int>(n / 20)));
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k)
    if (!std::isnan(smooth(k))) top = std::max(top, smooth(k));
  if (!(top > 0.0)) throw NumericalError("transient_time: R(t) never becomes positive");
  for (Eigen::Index k = 0; k < n; ++k)
    if (smooth(k) >= 0.95 * top) return times(k);
  return times(n - 1);
}

FluxSeries transient_entropy_flux(const std::vector<Trajectory>& ensemble,
                                  const ReducedDynamics& dyn, const PhysicalParams& params) {
  check_ensemble(ensemble, 50, "transient_entropy_flux");
  const CavityReadout& coupled = readout_of(dyn);
  CavityReadout dark = coupled;
  dark.G.setZero();

  const Eigen::Index n = ensemble.front().size();
  FluxSeries out;
  out.times = ensemble.front().times;
  for (Eigen::VectorXd* v : {&out.mu_b1, &out.mu_b2, &out.mu_a, &out.mu_b1_err, &out.mu_b2_err,
                             &out.mu_a_err})
    v->resize(n);

  std::vector<double> f1(ensemble.size()), f2(ensemble.size()), fa(ensemble.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    const CavityReadout& readout = out.times(t) <= 0.0 ? dark : coupled;
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
      const FluxTerms f = flux_terms(ensemble[j].b1(t), ensemble[j].b2(t), readout, params);
      f1[j] = f.mu_b1;
      f2[j] = f.mu_b2;
      fa[j] = f.mu_a;
    }
    const Estimate e1 = mean_and_error(f1), e2 = mean_and_error(f2), ea = mean_and_error(fa);
    out.mu_b1(t) = e1.value;
    out.mu_b2(t) = e2.value;
    out.mu_a(t) = ea.value;
    out.mu_b1_err(t) = e1.error;
    out.mu_b2_err(t) = e2.error;
    out.mu_a_err(t) = ea.error;
  }
  return out;
}

FluxEstimate tail_entropy_flux(const std::vector<Trajectory>& ensemble, const ReducedDynamics& dyn,
                               const PhysicalParams& params, double t_from) {
  check_ensemble(ensemble, 2, "tail_entropy_flux");
  const CavityReadout& readout = readout_of(dyn);
  const Eigen::VectorXd& times = ensemble.front().times;
  std::vector<double> f1, f2, fa;
  for (const Trajectory& tr : ensemble) {
    double s1 = 0.0, s2 = 0.0, sa = 0.0;
    int count = 0;
    for (Eigen::Index t = 0; t < times.size(); ++t) {
      if (times(t) < t_from || times(t) <= 0.0) continue;
      const FluxTerms f = flux_terms(tr.b1(t), tr.b2(t), readout, params);
      s1 += f.mu_b1;
      s2 += f.mu_b2;
      sa += f.mu_a;
      ++count;
    }
    if (count == 0) throw ConfigError("tail_entropy_flux: no samples after t_from");
    f1.push_back(s1 / count);
    f2.push_back(s2 / count);
    fa.push_back(sa / count);
  }
  return {mean_and_error(f1), mean_and_error(f2), mean_and_error(fa)};
}

}  // namespace clocksync

#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "clocksync/params.hpp"

namespace clocksync {

using cdouble = std::complex<double>;

// chi_a(omega) = 1 / (kappa - i (detuning + omega)).
cdouble cavity_susceptibility(double omega, const PhysicalParams& params);

// Cavity-eliminated coupling between the two mechanical envelopes.
//   chi_c  = -i [chi_a(w) - conj(chi_a(-w))]
//   Lambda = G1 G2 chi_c = delta + i Gamma
// self1/self2 are the diagonal self-energies G_i^2 chi_c (optical spring and
// optical damping of each mode on its own).
struct EffectiveCoupling {
  cdouble chi_c{0.0, 0.0};
  cdouble Lambda{0.0, 0.0};
  double delta = 0.0;
  double Gamma = 0.0;
  cdouble self1{0.0, 0.0};
  cdouble self2{0.0, 0.0};
  double evaluation_frequency = 0.0;

  // Energy damping added to the modes, averaged: -Im(self1 + self2) / 2.
  // Equals Gamma when G1 = -G2.
  double self_damping() const { return -0.5 * (self1.imag() + self2.imag()); }
};

EffectiveCoupling effective_coupling(const PhysicalParams& params, double omega_bar);
EffectiveCoupling effective_coupling(const PhysicalParams& params);

// Complex normal-mode frequencies for envelopes ~ exp(-i lambda t), expressed
// relative to the frame frequency omega2. Ordered so gamma_plus <= gamma_minus,
// ties broken by descending Re(lambda).
struct NormalModes {
  cdouble lambda_plus{0.0, 0.0};
  cdouble lambda_minus{0.0, 0.0};

  double omega_plus() const { return lambda_plus.real(); }
  double omega_minus() const { return lambda_minus.real(); }
  double gamma_plus() const { return -2.0 * lambda_plus.imag(); }
  double gamma_minus() const { return -2.0 * lambda_minus.imag(); }
  double linewidth_ratio() const { return gamma_plus() / gamma_minus(); }
};

NormalModes make_normal_modes(cdouble a, cdouble b);

// lambda_pm = (dw/2 - i(g1 + g2 + 4 Gs)/4) +- sqrt((dw + ds - i(g1 - g2)/2)^2/4 + Lambda^2)
// with Gs the mean self-damping and ds the self-energy difference. For the
// opposite-sign configuration G1 = -G2 this is exactly the two-mode formula
// with Gs = Gamma and ds = 0. The common optical-spring shift is not included.
NormalModes normal_modes_closed_form(double delta_omega, double gamma1, double gamma2,
                                     const EffectiveCoupling& coupling);

enum class Frame { full_lab, reduced_rotating };

// Reduced-model readout of the cavity occupation from mechanical moments:
// n_a = gain * sum_ij G_i G_j n_ij + na_in with gain = |chi_a(w)|^2 + |chi_a(-w)|^2.
struct CavityReadout {
  Eigen::Vector2d G = Eigen::Vector2d::Zero();
  double gain = 0.0;
  double na_in = 0.0;
};

// dz = drift z dt + noise, <dxi dxi^dagger> = diffusion dt.
// Full model: real 6x6 on (x1, p1, x2, p2, X, Y) in the lab frame.
// Reduced model: complex 2x2 on envelopes (b1, b2) rotating at omega2.
template <typename Scalar>
struct LinearDynamics {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Frame frame = Frame::reduced_rotating;
  Matrix drift;
  Matrix diffusion;
  // Stationary covariance with all couplings off; quench initial state.
  Matrix uncoupled_covariance;
  // Frame frequency (reduced) or reporting offset for eigenfrequencies (full).
  double reference_frequency = 0.0;
  std::optional<CavityReadout> readout;

  Eigen::Index dimension() const { return drift.rows(); }
};

using ReducedDynamics = LinearDynamics<cdouble>;
using FullDynamics = LinearDynamics<double>;

ReducedDynamics reduced_dynamics(const PhysicalParams& params,
                                 const EffectiveCoupling& coupling);
ReducedDynamics reduced_dynamics(const PhysicalParams& params);

FullDynamics full_dynamics(const PhysicalParams& params);

// Eigenvalues of the reduced drift, as normal modes.
NormalModes normal_modes_numeric(const ReducedDynamics& dyn);

// Mechanical branch of the full model: the positive-frequency eigenvalues
// outside the optical pair, which is identified by its weight on the cavity
// quadratures. Throws NumericalError when any mechanical decay rate comes
// within 10% of the optical one.
NormalModes normal_modes_numeric(const FullDynamics& dyn);

}  // namespace clocksync

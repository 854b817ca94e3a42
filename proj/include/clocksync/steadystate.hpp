#pragma once

#include "clocksync/lyapunov.hpp"
#include "clocksync/model.hpp"

namespace clocksync {

// Second moments plus the derived occupations. Symmetric-order convention:
// n + 1/2 = (<x^2> + <p^2>) / 2, which for envelopes is <|b|^2>.
template <typename Scalar>
struct CovarianceState {
  Frame frame = Frame::reduced_rotating;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> V;
  double n_b1_eff = 0.0;
  double n_b2_eff = 0.0;
  double n_a_eff = 0.0;
  double n_cross_eff = 0.0;
};

using ReducedCovariance = CovarianceState<cdouble>;
using FullCovariance = CovarianceState<double>;

// Entropy flux per bath (1/s). In the NESS their sum is the entropy
// production rate.
struct EntropyRates {
  double mu_b1 = 0.0;
  double mu_b2 = 0.0;
  double mu_a = 0.0;
  double Pi_s = 0.0;
};

ReducedCovariance occupations(const Eigen::MatrixXcd& V, const ReducedDynamics& dyn);
FullCovariance occupations(const Eigen::MatrixXd& V, const FullDynamics& dyn);

// n_a from mechanical occupations through the cavity readout (reduced model).
double reconstruct_cavity_occupation(const CavityReadout& readout, double n_b1, double n_b2,
                                     double n_cross);

// mu_bi = gamma_i ((n_bi + 1/2) / (nth_i + 1/2) - 1), mu_a = 2 kappa n_a.
EntropyRates entropy_rates(double n_b1, double n_b2, double n_a, const PhysicalParams& params);

template <typename Scalar>
EntropyRates entropy_rates(const CovarianceState<Scalar>& cov, const PhysicalParams& params) {
  return entropy_rates(cov.n_b1_eff, cov.n_b2_eff, cov.n_a_eff, params);
}

// Pearson C of the two displacements implied by a covariance:
// Re V12 / sqrt(V11 V22) (reduced) or V_x1x2 / sqrt(V_x1x1 V_x2x2) (full).
double analytic_sync_degree(const ReducedCovariance& cov);
double analytic_sync_degree(const FullCovariance& cov);

// Lyapunov solve plus occupation extraction.
template <typename Scalar>
CovarianceState<Scalar> steady_state(const LinearDynamics<Scalar>& dyn) {
  return occupations(solve_lyapunov(dyn.drift, dyn.diffusion), dyn);
}

}  // namespace clocksync

namespace clocksync {

// Covariance a time t after starting from V0 under fixed dynamics:
// V(t) = e^{At} (V0 - V_inf) e^{A^H t} + V_inf.
Eigen::MatrixXcd relax_covariance(const ReducedDynamics& dyn, const Eigen::MatrixXcd& V0,
                                  double t);

}  // namespace clocksync

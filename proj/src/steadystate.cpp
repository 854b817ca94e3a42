#include "clocksync/steadystate.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace clocksync {

double reconstruct_cavity_occupation(const CavityReadout& readout, double n_b1, double n_b2,
                                     double n_cross) {
  const double g1 = readout.G(0), g2 = readout.G(1);
  return readout.gain * (g1 * g1 * n_b1 + g2 * g2 * n_b2 + 2.0 * g1 * g2 * n_cross) +
         readout.na_in;
}

ReducedCovariance occupations(const Eigen::MatrixXcd& V, const ReducedDynamics& dyn) {
  if (dyn.frame != Frame::reduced_rotating)
    throw ConfigError("occupations: frame mismatch (expected reduced rotating frame)");
  if (V.rows() != 2 || V.cols() != 2 || dyn.dimension() != 2)
    throw ConfigError("occupations: reduced covariance must be 2x2");
  if (!dyn.readout) throw ConfigError("occupations: reduced dynamics lacks a cavity readout");
  ReducedCovariance cov;
  cov.frame = Frame::reduced_rotating;
  cov.V = V;
  cov.n_b1_eff = V(0, 0).real() - 0.5;
  cov.n_b2_eff = V(1, 1).real() - 0.5;
  cov.n_cross_eff = V(0, 1).real();
  cov.n_a_eff =
      reconstruct_cavity_occupation(*dyn.readout, cov.n_b1_eff, cov.n_b2_eff, cov.n_cross_eff);
  return cov;
}

FullCovariance occupations(const Eigen::MatrixXd& V, const FullDynamics& dyn) {
  if (dyn.frame != Frame::full_lab)
    throw ConfigError("occupations: frame mismatch (expected full lab frame)");
  if (V.rows() != 6 || V.cols() != 6 || dyn.dimension() != 6)
    throw ConfigError("occupations: full covariance must be 6x6");
  FullCovariance cov;
  cov.frame = Frame::full_lab;
  cov.V = V;
  cov.n_b1_eff = 0.5 * (V(0, 0) + V(1, 1)) - 0.5;
  cov.n_b2_eff = 0.5 * (V(2, 2) + V(3, 3)) - 0.5;
  cov.n_a_eff = 0.5 * (V(4, 4) + V(5, 5)) - 0.5;
  // <(b1 + b1^dag)(b2 + b2^dag)> / 2 = <x1 x2>
  cov.n_cross_eff = V(0, 2);
  return cov;
}

EntropyRates entropy_rates(double n_b1, double n_b2, double n_a, const PhysicalParams& params) {
  EntropyRates r;
  r.mu_b1 = params.gamma1 * ((n_b1 + 0.5) / (params.nth1 + 0.5) - 1.0);
  r.mu_b2 = params.gamma2 * ((n_b2 + 0.5) / (params.nth2 + 0.5) - 1.0);
  r.mu_a = 2.0 * params.kappa * n_a;
  r.Pi_s = r.mu_b1 + r.mu_b2 + r.mu_a;
  return r;
}

double analytic_sync_degree(const ReducedCovariance& cov) {
  return cov.V(0, 1).real() / std::sqrt(cov.V(0, 0).real() * cov.V(1, 1).real());
}

double analytic_sync_degree(const FullCovariance& cov) {
  return cov.V(0, 2) / std::sqrt(cov.V(0, 0) * cov.V(2, 2));
}

Eigen::MatrixXcd relax_covariance(const ReducedDynamics& dyn, const Eigen::MatrixXcd& V0,
                                  double t) {
  const Eigen::MatrixXcd Vinf = solve_lyapunov(dyn.drift, dyn.diffusion);
  const Eigen::MatrixXcd E = (dyn.drift * t).exp();
  const Eigen::MatrixXcd V = E * (V0 - Vinf) * E.adjoint() + Vinf;
  return 0.5 * (V + V.adjoint());
}

}  // namespace clocksync

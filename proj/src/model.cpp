#include "clocksync/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "clocksync/errors.hpp"

namespace clocksync {

namespace {
constexpr cdouble I{0.0, 1.0};
}

cdouble cavity_susceptibility(double omega, const PhysicalParams& params) {
  return 1.0 / (params.kappa - I * (params.detuning + omega));
}

EffectiveCoupling effective_coupling(const PhysicalParams& params, double omega_bar) {
  if (!(omega_bar > 0.0)) throw ConfigError("effective_coupling: omega_bar must be > 0");
  EffectiveCoupling c;
  c.evaluation_frequency = omega_bar;
  c.chi_c = -I * (cavity_susceptibility(omega_bar, params) -
                  std::conj(cavity_susceptibility(-omega_bar, params)));
  c.Lambda = params.G1 * params.G2 * c.chi_c;
  c.delta = c.Lambda.real();
  c.Gamma = c.Lambda.imag();
  c.self1 = params.G1 * params.G1 * c.chi_c;
  c.self2 = params.G2 * params.G2 * c.chi_c;
  return c;
}

EffectiveCoupling effective_coupling(const PhysicalParams& params) {
  return effective_coupling(params, params.mean_frequency());
}

NormalModes make_normal_modes(cdouble a, cdouble b) {
  const double ga = -2.0 * a.imag();
  const double gb = -2.0 * b.imag();
  const double tol = 1e-12 * std::max({std::abs(ga), std::abs(gb), 1e-300});
  bool a_first;
  if (std::abs(ga - gb) <= tol)
    a_first = a.real() >= b.real();
  else
    a_first = ga < gb;
  return a_first ? NormalModes{a, b} : NormalModes{b, a};
}

NormalModes normal_modes_closed_form(double delta_omega, double gamma1, double gamma2,
                                     const EffectiveCoupling& coupling) {
  const double gs = coupling.self_damping();
  const cdouble ds = coupling.self1 - coupling.self2;
  const cdouble mean = 0.5 * delta_omega - I * (gamma1 + gamma2 + 4.0 * gs) / 4.0;
  const cdouble split = delta_omega + ds - I * (gamma1 - gamma2) / 2.0;
  const cdouble root = std::sqrt(split * split / 4.0 + coupling.Lambda * coupling.Lambda);
  return make_normal_modes(mean + root, mean - root);
}

ReducedDynamics reduced_dynamics(const PhysicalParams& params,
                                 const EffectiveCoupling& coupling) {
  params.validate();
  Eigen::Matrix2cd H;
  H(0, 0) = params.delta_omega() + coupling.self1 - I * params.gamma1 / 2.0;
  H(1, 1) = coupling.self2 - I * params.gamma2 / 2.0;
  H(0, 1) = coupling.Lambda;
  H(1, 0) = coupling.Lambda;

  const double w = coupling.evaluation_frequency;
  const double gain = std::norm(cavity_susceptibility(w, params)) +
                      std::norm(cavity_susceptibility(-w, params));
  const Eigen::Vector2d G(params.G1, params.G2);

  ReducedDynamics dyn;
  dyn.frame = Frame::reduced_rotating;
  dyn.drift = -I * H;
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  D(0, 0) = params.gamma1 * (params.nth1 + 0.5);
  D(1, 1) = params.gamma2 * (params.nth2 + 0.5);
  // Cavity input noise transduced onto the mechanical envelopes.
  D += G * G.transpose() * (2.0 * params.kappa * (params.na_in + 0.5) * gain);
  dyn.diffusion = D.cast<cdouble>();
  dyn.uncoupled_covariance = Eigen::Vector2cd(params.nth1 + 0.5, params.nth2 + 0.5).asDiagonal();
  dyn.reference_frequency = params.omega2;
  dyn.readout = CavityReadout{G, gain, params.na_in};
  return dyn;
}

ReducedDynamics reduced_dynamics(const PhysicalParams& params) {
  return reduced_dynamics(params, effective_coupling(params));
}

FullDynamics full_dynamics(const PhysicalParams& params) {
  params.validate();
  enum { x1, p1, x2, p2, X, Y };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  const double omega[2] = {params.omega1, params.omega2};
  const double gamma[2] = {params.gamma1, params.gamma2};
  const double G[2] = {params.G1, params.G2};
  for (int i = 0; i < 2; ++i) {
    const int x = 2 * i, p = 2 * i + 1;
    A(x, x) = -gamma[i] / 2.0;
    A(p, p) = -gamma[i] / 2.0;
    A(x, p) = omega[i];
    A(p, x) = -omega[i];
    // H_int = sum_i 2 G_i X x_i
    A(p, X) = -2.0 * G[i];
    A(Y, x) = -2.0 * G[i];
  }
  A(X, X) = -params.kappa;
  A(Y, Y) = -params.kappa;
  A(X, Y) = -params.detuning;
  A(Y, X) = params.detuning;

  Eigen::VectorXd d(6), v(6);
  d << params.gamma1 * (params.nth1 + 0.5), params.gamma1 * (params.nth1 + 0.5),
      params.gamma2 * (params.nth2 + 0.5), params.gamma2 * (params.nth2 + 0.5),
      2.0 * params.kappa * (params.na_in + 0.5), 2.0 * params.kappa * (params.na_in + 0.5);
  v << params.nth1 + 0.5, params.nth1 + 0.5, params.nth2 + 0.5, params.nth2 + 0.5,
      params.na_in + 0.5, params.na_in + 0.5;

  FullDynamics dyn;
  dyn.frame = Frame::full_lab;
  dyn.drift = A;
  dyn.diffusion = d.asDiagonal();
  dyn.uncoupled_covariance = v.asDiagonal();
  dyn.reference_frequency = params.omega2;
  return dyn;
}

NormalModes normal_modes_numeric(const ReducedDynamics& dyn) {
  if (dyn.frame != Frame::reduced_rotating || dyn.dimension() != 2)
    throw ConfigError("normal_modes_numeric: expected reduced 2x2 dynamics");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dyn.drift, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed (reduced drift)");
  const Eigen::VectorXcd s = es.eigenvalues();
  return make_normal_modes(I * s(0), I * s(1));
}

NormalModes normal_modes_numeric(const FullDynamics& dyn) {
  if (dyn.frame != Frame::full_lab || dyn.dimension() != 6)
    throw ConfigError("normal_modes_numeric: expected full 6x6 dynamics");
  Eigen::EigenSolver<Eigen::MatrixXd> es(dyn.drift, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed (full drift)");

  // The optical pair is the one living mostly on the cavity quadratures.
  struct Branch {
    cdouble lambda;
    double cavity_weight;
  };
  std::vector<Branch> branches;
  for (Eigen::Index k = 0; k < 6; ++k) {
    const Eigen::VectorXcd v = es.eigenvectors().col(k);
    branches.push_back({I * es.eigenvalues()(k), v.tail(2).squaredNorm() / v.squaredNorm()});
  }
  std::sort(branches.begin(), branches.end(),
            [](const Branch& a, const Branch& b) { return a.cavity_weight < b.cavity_weight; });
  const double optical = -2.0 * std::min(branches[4].lambda.imag(), branches[5].lambda.imag());
  for (int k = 0; k < 4; ++k) {
    const double mech = -2.0 * branches[k].lambda.imag();
    if (std::abs(optical - mech) < 0.1 * std::max(optical, mech))
      throw NumericalError("ambiguous branch selection: optical decay rate " +
                           std::to_string(optical) + " within 10% of mechanical " +
                           std::to_string(mech));
  }
  std::vector<cdouble> positive;
  for (int k = 0; k < 4; ++k)
    if (branches[k].lambda.real() > 0.0) positive.push_back(branches[k].lambda);
  if (positive.size() != 2)
    throw NumericalError("full drift: mechanical eigenvalues are not two oscillating pairs");
  const cdouble shift(dyn.reference_frequency, 0.0);
  return make_normal_modes(positive[0] - shift, positive[1] - shift);
}

}  // namespace clocksync

#pragma once

#include <complex>
#include <sstream>
#include <type_traits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "clocksync/errors.hpp"

namespace clocksync {

namespace detail {
template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
}  // namespace detail

// Largest real part over the eigenvalues of a square matrix (real or complex).
template <typename Derived>
double spectral_abscissa(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  if constexpr (detail::is_complex<Scalar>::value) {
    Eigen::ComplexEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(A, false);
    return es.eigenvalues().real().maxCoeff();
  } else {
    Eigen::EigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(A, false);
    return es.eigenvalues().real().maxCoeff();
  }
}

// Solves A V + V A^H + D = 0 for the stationary covariance of dz = A z dt + dW,
// <dW dW^H> = D dt. Vectorized Kronecker solve (intended for n <= 8); the
// result is Hermitian-symmetrized. Throws StabilityError when A has an
// eigenvalue with non-negative real part and NumericalError when the linear
// system is singular or the residual exceeds 1e-8 ||D||.
template <typename DerivedA, typename DerivedD>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_lyapunov(
    const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedD>& D) {
  using Scalar = typename DerivedA::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  static_assert(std::is_same_v<Scalar, typename DerivedD::Scalar>,
                "drift and diffusion must share a scalar type");

  const Eigen::Index n = A.rows();
  if (A.cols() != n || D.rows() != n || D.cols() != n)
    throw ConfigError("solve_lyapunov: dimension mismatch");

  const double abscissa = spectral_abscissa(A);
  if (!(abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "unstable drift: max Re(eigenvalue) = " << abscissa;
    throw StabilityError(msg.str());
  }

  const Matrix Id = Matrix::Identity(n, n);
  const Matrix K = Eigen::kroneckerProduct(Id, A.derived()).eval() +
                   Eigen::kroneckerProduct(A.derived().conjugate(), Id).eval();
  Eigen::FullPivLU<Matrix> lu(K);
  const double rcond = lu.rcond();
  if (!lu.isInvertible() || rcond < 1e-14) {
    std::ostringstream msg;
    msg << "singular Lyapunov system: rcond = " << rcond;
    throw NumericalError(msg.str());
  }
  const Matrix Dm = D;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs =
      -Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(Dm.data(), n * n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vec = lu.solve(rhs);
  // One step of iterative refinement.
  vec += lu.solve(rhs - K * vec);

  Matrix V = Eigen::Map<Matrix>(vec.data(), n, n);
  V = (0.5 * (V + V.adjoint())).eval();

  const double dnorm = Dm.norm();
  const double residual = (A * V + V * A.adjoint() + Dm).norm();
  if (residual > 1e-8 * dnorm && residual > 0.0) {
    std::ostringstream msg;
    msg << "Lyapunov residual " << residual << " exceeds 1e-8 * ||D|| = " << 1e-8 * dnorm
        << " (rcond = " << rcond << ")";
    throw NumericalError(msg.str());
  }
  return V;
}

}  // namespace clocksync

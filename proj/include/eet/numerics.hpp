#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace eet {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace numerics {

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
/// Inside a degenerate block the basis is arbitrary.
struct SpectralDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

/// Largest |M_ij - conj(M_ji)| together with its location.
struct AsymmetryReport {
  double max_deviation = 0.0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

AsymmetryReport hermitian_deviation(const ComplexMatrix& m);

/// Diagonalizes a Hermitian matrix. Throws InvalidArgument for non-square
/// input or when ||M - M^dagger||_max >= hermitian_tol (the message names the
/// worst entry).
SpectralDecomposition eig_hermitian(const ComplexMatrix& m, double hermitian_tol = 1e-10);

/// exp(t*M) * V by scaling and squaring with a Pade approximant.
ComplexMatrix expm_action(const ComplexMatrix& m, const ComplexMatrix& v, double t);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Column-stacking vectorization: vec([[a,b],[c,d]]) = (a,c,b,d).
ComplexVector vectorize(const ComplexMatrix& rho);

/// Inverse of vectorize. Throws InvalidArgument if the length is not a
/// perfect square or does not match dim.
ComplexMatrix devectorize(const ComplexVector& v, std::size_t dim);
ComplexMatrix devectorize(const ComplexVector& v);

}  // namespace numerics
}  // namespace eet

#include "eet/numerics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "eet/errors.hpp"

namespace eet::numerics {

AsymmetryReport hermitian_deviation(const ComplexMatrix& m) {
  AsymmetryReport report;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      const double dev = std::abs(m(i, j) - std::conj(m(j, i)));
      if (dev > report.max_deviation) {
        report = {dev, i, j};
      }
    }
  }
  return report;
}

SpectralDecomposition eig_hermitian(const ComplexMatrix& m, double hermitian_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream msg;
    msg << "eig_hermitian: matrix must be square and non-empty, got " << m.rows() << "x" << m.cols();
    throw InvalidArgument(msg.str());
  }
  const AsymmetryReport asym = hermitian_deviation(m);
  if (asym.max_deviation >= hermitian_tol) {
    std::ostringstream msg;
    msg << "eig_hermitian: matrix is not Hermitian, max |M_ij - conj(M_ji)| = " << asym.max_deviation
        << " at (" << asym.row << ", " << asym.col << ")";
    throw InvalidArgument(msg.str());
  }
  // Only the lower triangle is read by the solver; symmetrize so both halves count.
  const ComplexMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_hermitian: eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_action(const ComplexMatrix& m, const ComplexMatrix& v, double t) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument("expm_action: generator must be square");
  }
  if (v.rows() != m.rows()) {
    std::ostringstream msg;
    msg << "expm_action: dimension mismatch, generator is " << m.rows() << "x" << m.cols() << " but operand has "
        << v.rows() << " rows";
    throw InvalidArgument(msg.str());
  }
  if (t == 0.0) {
    return v;
  }
  const ComplexMatrix scaled = t * m;
  const ComplexMatrix propagator = scaled.exp();
  return propagator * v;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector vectorize(const ComplexMatrix& rho) {
  // Eigen storage is column-major, which is exactly column stacking.
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

ComplexMatrix devectorize(const ComplexVector& v, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (n * n != v.size()) {
    std::ostringstream msg;
    msg << "devectorize: length " << v.size() << " does not match dimension " << dim;
    throw InvalidArgument(msg.str());
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

ComplexMatrix devectorize(const ComplexVector& v) {
  const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (root == 0 || static_cast<Eigen::Index>(root * root) != v.size()) {
    std::ostringstream msg;
    msg << "devectorize: length " << v.size() << " is not a perfect square";
    throw InvalidArgument(msg.str());
  }
  return devectorize(v, root);
}

}  // namespace eet::numerics

#include "doctest.h"

#include <random>

#include "eet/errors.hpp"
#include "eet/numerics.hpp"
#include "oracles.hpp"

using namespace eet;
using namespace eet::numerics;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ComplexMatrix complete_adjacency(Eigen::Index n) {
  return ComplexMatrix::Ones(n, n) - ComplexMatrix::Identity(n, n);
}

}  // namespace

TEST_CASE("eig_hermitian on the identity") {
  const auto s = eig_hermitian(ComplexMatrix::Identity(3, 3));
  CHECK(max_abs((s.eigenvalues.array() - 1.0).matrix().cast<Complex>()) < 1e-14);
  CHECK(max_abs(s.eigenvectors.adjoint() * s.eigenvectors - ComplexMatrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("eig_hermitian on Pauli X") {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const auto s = eig_hermitian(x);
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
  // (1, -1)/sqrt(2) up to phase
  CHECK(std::abs(s.eigenvectors(0, 0) + s.eigenvectors(1, 0)) < 1e-12);
  CHECK(std::abs(s.eigenvectors(0, 1) - s.eigenvectors(1, 1)) < 1e-12);
  CHECK(std::abs(std::abs(s.eigenvectors(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("complete-graph adjacency spectrum agrees with the characteristic polynomial") {
  for (Eigen::Index n = 3; n <= 6; ++n) {
    const auto s = eig_hermitian(complete_adjacency(n));
    const auto poly = oracle::charpoly(complete_adjacency(n).real());
    // Roots of (x + 1)^(n-1) (x - (n-1)).
    CHECK(std::abs(oracle::polyval(poly, -1.0)) < 1e-9);
    CHECK(std::abs(oracle::polyval(poly, static_cast<double>(n - 1))) < 1e-9);
    for (Eigen::Index k = 0; k < n - 1; ++k) {
      CHECK(s.eigenvalues(k) == doctest::Approx(-1.0).epsilon(1e-12));
      CHECK(std::abs(oracle::polyval(poly, s.eigenvalues(k))) < 1e-8);
    }
    CHECK(s.eigenvalues(n - 1) == doctest::Approx(static_cast<double>(n - 1)).epsilon(1e-12));
  }
}

TEST_CASE("eig_hermitian invariants on random Hermitian matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 9;
    const auto m = oracle::random_hermitian(rng, n);
    const auto s = eig_hermitian(m);
    for (Eigen::Index k = 1; k < n; ++k) CHECK(s.eigenvalues(k - 1) <= s.eigenvalues(k));
    CHECK(max_abs(s.eigenvectors.adjoint() * s.eigenvectors - ComplexMatrix::Identity(n, n)) < 1e-12);
    const ComplexMatrix rebuilt =
        s.eigenvectors * s.eigenvalues.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
    CHECK(max_abs(rebuilt - m) < 1e-10);
    CHECK(std::abs(s.eigenvalues.sum() - m.trace().real()) < 1e-10);
  }
}

TEST_CASE("eig_hermitian rejects non-square and non-Hermitian input") {
  CHECK_THROWS_AS(eig_hermitian(ComplexMatrix::Zero(2, 3)), InvalidArgument);
  ComplexMatrix m = ComplexMatrix::Identity(3, 3);
  m(0, 2) = 0.5;
  try {
    eig_hermitian(m);
    FAIL("expected a throw");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(0, 2)") != std::string::npos);
    CHECK(msg.find("0.5") != std::string::npos);
  }
}

TEST_CASE("expm_action basic cases") {
  std::mt19937_64 rng(3);
  const auto v = oracle::random_matrix(rng, 4, 2);
  CHECK(max_abs(expm_action(ComplexMatrix::Zero(4, 4), v, 3.7) - v) == 0.0);

  ComplexMatrix m(1, 1);
  m << -1.0;
  ComplexMatrix one(1, 1);
  one << 1.0;
  CHECK(std::abs(expm_action(m, one, 1.0)(0, 0) - std::exp(-1.0)) < 1e-15);

  CHECK_THROWS_AS(expm_action(ComplexMatrix::Zero(3, 3), ComplexMatrix::Zero(2, 1), 1.0), InvalidArgument);
  CHECK_THROWS_AS(expm_action(ComplexMatrix::Zero(3, 2), ComplexMatrix::Zero(3, 1), 1.0), InvalidArgument);
}

TEST_CASE("expm of anti-Hermitian generators is unitary") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix m = Complex(0.0, 1.0) * oracle::random_hermitian(rng, 4);
    const ComplexMatrix u = expm_action(m, ComplexMatrix::Identity(4, 4), 1.0);
    CHECK(max_abs(u.adjoint() * u - ComplexMatrix::Identity(4, 4)) < 1e-10);
  }
}

TEST_CASE("expm_action satisfies the doubling identity and matches a Taylor oracle") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix m = oracle::random_matrix(rng, 6, 6);
    const ComplexMatrix id = ComplexMatrix::Identity(6, 6);
    const ComplexMatrix full = expm_action(m, id, 1.0);
    const ComplexMatrix half = expm_action(m, id, 0.5);
    CHECK(max_abs(full - half * half) / max_abs(full) < 1e-10);
    CHECK(max_abs(full - oracle::expm_taylor(m)) / max_abs(full) < 1e-10);
  }
}

TEST_CASE("kron block structure and identities") {
  CHECK(max_abs(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)) - ComplexMatrix::Identity(4, 4)) ==
        0.0);
  ComplexMatrix raise = ComplexMatrix::Zero(2, 2);
  raise(0, 1) = 1.0;
  const ComplexMatrix k = kron(raise, ComplexMatrix::Identity(2, 2));
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 2) = expected(1, 3) = 1.0;
  CHECK(max_abs(k - expected) == 0.0);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = oracle::random_matrix(rng, 3, 3);
    const auto b = oracle::random_matrix(rng, 3, 3);
    const auto c = oracle::random_matrix(rng, 2, 3);
    const auto x = oracle::random_matrix(rng, 3, 3);
    CHECK(max_abs(kron(a, b) - oracle::kron_entrywise(a, b)) == 0.0);
    // vec(B X A^T) = (A (x) B) vec(X)
    CHECK(max_abs(vectorize(b * x * a.transpose()) - kron(a, b) * vectorize(x)) < 1e-12);
    // associativity
    CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-14);
  }
}

TEST_CASE("vectorize uses column stacking and round-trips") {
  ComplexMatrix m(2, 2);
  m << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0);  // [[a,b],[c,d]]
  const ComplexVector v = vectorize(m);
  CHECK(v(0) == Complex(1, 0));
  CHECK(v(1) == Complex(3, 0));
  CHECK(v(2) == Complex(2, 0));
  CHECK(v(3) == Complex(4, 0));

  std::mt19937_64 rng(2);
  const auto r = oracle::random_matrix(rng, 5, 5);
  CHECK((devectorize(vectorize(r)) - r).cwiseAbs().maxCoeff() == 0.0);
  CHECK((devectorize(vectorize(r), 5) - r).cwiseAbs().maxCoeff() == 0.0);

  const auto a = oracle::random_matrix(rng, 3, 3);
  const auto x = oracle::random_matrix(rng, 3, 3);
  const auto b = oracle::random_matrix(rng, 3, 3);
  CHECK(max_abs(vectorize(a * x * b) - kron(b.transpose(), a) * vectorize(x)) < 1e-13);

  CHECK_THROWS_AS(devectorize(ComplexVector::Zero(5)), InvalidArgument);
  CHECK_THROWS_AS(devectorize(ComplexVector::Zero(9), 2), InvalidArgument);
}

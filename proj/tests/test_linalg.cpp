#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rtlsq/linalg.hpp"

namespace q = rtlsq::quantum;
using q::Complex;
using q::ComplexMatrix;
using q::ComplexVector;

namespace {

ComplexMatrix ket0() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  return m;
}

ComplexMatrix ket1() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

std::vector<double> sorted_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

}  // namespace

TEST(TensorProduct, IdentityTimesIdentity) {
  ComplexMatrix out = q::tensor_product(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2));
  EXPECT_LT(q::max_abs(out - ComplexMatrix::Identity(4, 4)), 1e-15);
}

TEST(TensorProduct, PauliXWithProjector) {
  ComplexMatrix out = q::tensor_product(q::pauli::x(), ket0());
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 2) = 1.0;
  expected(2, 0) = 1.0;
  EXPECT_EQ(out, expected);
}

TEST(TensorProduct, TraceAndMixedProductIdentities) {
  rtlsq::Rng rng = rtlsq::substream(3, "test");
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix a = q::random_hermitian(2, rng) + Complex(0, 1) * q::random_hermitian(2, rng);
    ComplexMatrix b = q::random_hermitian(2, rng);
    ComplexMatrix c = q::random_hermitian(2, rng);
    ComplexMatrix d = q::random_hermitian(2, rng);
    EXPECT_NEAR(std::abs(q::tensor_product(a, b).trace() - a.trace() * b.trace()), 0.0, 1e-12);
    ComplexMatrix lhs = q::tensor_product(a, b) * q::tensor_product(c, d);
    ComplexMatrix rhs = q::tensor_product(a * c, b * d);
    EXPECT_LT(q::max_abs(lhs - rhs), 1e-12);
  }
}

TEST(PartialTrace, ProductStateFactorizes) {
  rtlsq::Rng rng = rtlsq::substream(5, "test");
  auto a = q::random_density(1, rng);
  auto b = q::random_density(2, rng);
  auto ab = q::validate_density(q::tensor_product(a.matrix(), b.matrix()));
  auto ra = q::partial_trace(ab, 3, {0});
  auto rb = q::partial_trace(ab, 3, {1, 2});
  EXPECT_LT(q::max_abs(ra.matrix() - a.matrix()), 1e-14);
  EXPECT_LT(q::max_abs(rb.matrix() - b.matrix()), 1e-14);
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  auto rho = q::DensityMatrix::from_pure(q::PureState::from_amplitudes(bell));
  for (int keep : {0, 1}) {
    auto r = q::partial_trace(rho, 2, {keep});
    EXPECT_LT(q::max_abs(r.matrix() - ComplexMatrix::Identity(2, 2) / 2.0), 1e-15);
  }
}

TEST(PartialTrace, KeepAllIsExactIdentity) {
  rtlsq::Rng rng = rtlsq::substream(7, "test");
  auto rho = q::random_density(3, rng);
  auto r = q::partial_trace(rho, 3, {0, 1, 2});
  EXPECT_EQ(r.matrix(), rho.matrix());
}

TEST(PartialTrace, BigEndianOrdering) {
  // |01>: qubit 0 in |0>, qubit 1 in |1>.
  auto rho = q::DensityMatrix::from_pure(q::PureState::basis(2, 1));
  EXPECT_LT(q::max_abs(q::partial_trace(rho, 2, {0}).matrix() - ket0()), 1e-15);
  EXPECT_LT(q::max_abs(q::partial_trace(rho, 2, {1}).matrix() - ket1()), 1e-15);
}

TEST(PartialTrace, TracePreservedForEveryKeepSet) {
  rtlsq::Rng rng = rtlsq::substream(9, "test");
  auto rho = q::random_density(4, rng);
  for (unsigned mask = 1; mask < 16; ++mask) {
    std::set<int> keep;
    for (int qb = 0; qb < 4; ++qb)
      if (mask & (1U << qb)) keep.insert(qb);
    auto r = q::partial_trace(rho, 4, keep);
    EXPECT_NEAR(r.matrix().trace().real(), 1.0, 1e-10);
  }
}

TEST(PartialTrace, Errors) {
  auto rho = q::DensityMatrix::maximally_mixed(2);
  EXPECT_THROW(q::partial_trace(rho, 2, {}), rtlsq::ArgumentError);
  EXPECT_THROW(q::partial_trace(rho, 2, {2}), rtlsq::ArgumentError);
}

TEST(HermitianExp, ZeroGeneratorIsIdentity) {
  EXPECT_LT(q::max_abs(q::hermitian_exp(ComplexMatrix::Zero(4, 4), 0.7) - ComplexMatrix::Identity(4, 4)),
            1e-15);
}

TEST(HermitianExp, PauliXQuarterTurn) {
  ComplexMatrix u = q::hermitian_exp(q::pauli::x(), std::numbers::pi / 2);
  EXPECT_LT(q::max_abs(u - Complex(0, 1) * q::pauli::x()), 1e-14);
}

TEST(HermitianExp, UnitaryAndInverse) {
  rtlsq::Rng rng = rtlsq::substream(11, "test");
  for (int dim : {2, 4, 8, 16}) {
    ComplexMatrix k = q::random_hermitian(static_cast<std::size_t>(dim), rng);
    ComplexMatrix u = q::hermitian_exp(k, 0.37);
    EXPECT_LT(q::unitarity_error(u), 1e-9);
    EXPECT_LT(q::max_abs(u * q::hermitian_exp(k, -0.37) - ComplexMatrix::Identity(dim, dim)), 1e-9);
  }
}

TEST(HermitianExp, RejectsNonHermitian) {
  ComplexMatrix k = ComplexMatrix::Zero(2, 2);
  k(0, 1) = 1.0;
  EXPECT_THROW(q::hermitian_exp(k, 1.0), rtlsq::NumericError);
}

TEST(Fidelity, Examples) {
  auto zero = q::PureState::basis(1, 0);
  auto one = q::PureState::basis(1, 1);
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto rho0 = q::DensityMatrix::from_pure(zero);
  EXPECT_NEAR(q::fidelity(zero, rho0), 1.0, 1e-15);
  EXPECT_NEAR(q::fidelity(zero, q::DensityMatrix::from_pure(one)), 0.0, 1e-15);
  EXPECT_NEAR(q::fidelity(q::PureState::from_amplitudes(plus), rho0), 0.5, 1e-15);
  EXPECT_THROW(q::fidelity(zero, q::DensityMatrix::maximally_mixed(2)), rtlsq::ArgumentError);
}

TEST(Fidelity, LinearInState) {
  rtlsq::Rng rng = rtlsq::substream(13, "test");
  for (int trial = 0; trial < 50; ++trial) {
    auto phi = q::haar_state(2, rng);
    auto r1 = q::random_density(2, rng);
    auto r2 = q::random_density(2, rng);
    double a = rtlsq::uniform01(rng);
    auto mix = q::validate_density(a * r1.matrix() + (1 - a) * r2.matrix());
    EXPECT_NEAR(q::fidelity(phi, mix), a * q::fidelity(phi, r1) + (1 - a) * q::fidelity(phi, r2), 1e-10);
  }
}

TEST(ConjugateByUnitary, Examples) {
  rtlsq::Rng rng = rtlsq::substream(17, "test");
  auto rho = q::random_density(2, rng);
  EXPECT_LT(q::max_abs(q::conjugate_by_unitary(rho, ComplexMatrix::Identity(4, 4)).matrix() - rho.matrix()),
            1e-15);
  auto flipped = q::conjugate_by_unitary(q::validate_density(ket0()), q::pauli::x());
  EXPECT_LT(q::max_abs(flipped.matrix() - ket1()), 1e-15);

  ComplexMatrix u = q::haar_unitary(4, rng);
  auto out = q::conjugate_by_unitary(rho, u);
  auto e1 = sorted_eigenvalues(rho.matrix());
  auto e2 = sorted_eigenvalues(out.matrix());
  for (std::size_t i = 0; i < e1.size(); ++i) EXPECT_NEAR(e1[i], e2[i], 1e-9);

  ComplexMatrix not_unitary = 2.0 * ComplexMatrix::Identity(4, 4);
  EXPECT_THROW(q::conjugate_by_unitary(rho, not_unitary), rtlsq::NumericError);
  EXPECT_THROW(q::conjugate_by_unitary(rho, q::pauli::x()), rtlsq::ArgumentError);
}

TEST(ValidateDensity, AcceptsAndRejects) {
  EXPECT_NO_THROW(q::validate_density(ComplexMatrix::Identity(2, 2) / 2.0));

  try {
    q::validate_density(q::pauli::x());
    FAIL() << "sigma_x accepted";
  } catch (const q::DensityError& e) {
    EXPECT_EQ(e.violation().kind, q::DensityViolation::Kind::trace);
    EXPECT_NEAR(e.violation().magnitude, 1.0, 1e-15);
  }

  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  try {
    q::validate_density(neg);
    FAIL() << "negative eigenvalue accepted";
  } catch (const q::DensityError& e) {
    EXPECT_EQ(e.violation().kind, q::DensityViolation::Kind::positivity);
    EXPECT_NEAR(e.violation().magnitude, -0.5, 1e-12);
  }

  ComplexMatrix skew = ComplexMatrix::Identity(2, 2) / 2.0;
  skew(0, 1) = 0.1;
  auto v = q::check_density(skew);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->kind, q::DensityViolation::Kind::hermiticity);

  EXPECT_EQ(q::check_density(ComplexMatrix::Identity(3, 3) / 3.0)->kind, q::DensityViolation::Kind::shape);
}

TEST(Sampling, HaarUnitaryAndStates) {
  rtlsq::Rng rng = rtlsq::substream(19, "test");
  for (std::size_t dim : {2U, 4U, 8U, 32U}) EXPECT_LT(q::unitarity_error(q::haar_unitary(dim, rng)), 1e-12);
  EXPECT_NEAR(q::haar_state(3, rng).amplitudes().squaredNorm(), 1.0, 1e-12);
}

TEST(Sampling, PolarProjectionRestoresUnitarity) {
  rtlsq::Rng rng = rtlsq::substream(23, "test");
  ComplexMatrix u = q::haar_unitary(8, rng);
  ComplexMatrix drifted = u + 1e-6 * q::random_hermitian(8, rng);
  ComplexMatrix fixed = q::polar_unitary(drifted);
  EXPECT_LT(q::unitarity_error(fixed), 1e-13);
  EXPECT_LT(q::max_abs(fixed - u), 1e-5);
}

TEST(Pauli, BasisIsOrthogonal) {
  for (std::size_t a = 0; a < q::pauli::count(2); ++a)
    for (std::size_t b = 0; b < q::pauli::count(2); ++b) {
      Complex t = (q::pauli::string(a, 2) * q::pauli::string(b, 2)).trace();
      EXPECT_NEAR(t.real(), a == b ? 4.0 : 0.0, 1e-15);
    }
}

TEST(EmbedOperator, MatchesKroneckerOnLeadingQubits) {
  rtlsq::Rng rng = rtlsq::substream(29, "test");
  ComplexMatrix u = q::haar_unitary(4, rng);
  ComplexMatrix e = q::embed_operator(u, {0, 1}, 3);
  EXPECT_LT(q::max_abs(e - q::tensor_product(u, ComplexMatrix::Identity(2, 2))), 1e-15);
  ComplexMatrix e2 = q::embed_operator(q::pauli::x(), {2}, 3);
  EXPECT_LT(q::max_abs(e2 - q::tensor_product(ComplexMatrix::Identity(4, 4), q::pauli::x())), 1e-15);
}

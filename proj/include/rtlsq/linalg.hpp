#ifndef RTLSQ_LINALG_HPP
#define RTLSQ_LINALG_HPP

// Dense complex linear algebra for few-qubit systems.
//
// Convention: qubit 0 is the most significant bit of a computational-basis
// index. On n qubits, qubit q lives at bit position (n - 1 - q).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rtlsq/error.hpp"
#include "rtlsq/rng.hpp"

namespace rtlsq::quantum {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;
inline constexpr double kUnitaryTolerance = 1e-9;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
  int q = 0;
  while ((std::size_t{1} << q) < n) ++q;
  return q;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const ComplexMatrix& m) { return max_abs(m - m.adjoint()); }

inline double unitarity_error(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kUnitaryTolerance) {
  return unitarity_error(u) <= tol;
}

// ---------------------------------------------------------------------------
// States

class PureState {
 public:
  static PureState from_amplitudes(ComplexVector amplitudes) {
    require(is_power_of_two(static_cast<std::size_t>(amplitudes.size())),
            "pure state length must be a power of two");
    double norm_err = std::abs(amplitudes.squaredNorm() - 1.0);
    if (norm_err > kNormTolerance) {
      std::ostringstream os;
      os << "pure state not normalized: |norm^2 - 1| = " << norm_err;
      throw NumericError(os.str());
    }
    return PureState(std::move(amplitudes));
  }

  // Normalizes a nonzero vector.
  static PureState normalized(const ComplexVector& v) {
    double n = v.norm();
    require(n > 0.0, "cannot normalize a zero vector");
    return from_amplitudes(v / n);
  }

  static PureState basis(int qubits, std::size_t index) {
    std::size_t dim = std::size_t{1} << qubits;
    require(index < dim, "basis index out of range");
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(v));
  }

  const ComplexVector& amplitudes() const { return amps_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  int qubits() const { return log2_exact(dim()); }
  ComplexMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  explicit PureState(ComplexVector v) : amps_(std::move(v)) {}
  ComplexVector amps_;
};

struct DensityViolation {
  enum class Kind { shape, trace, hermiticity, positivity };
  Kind kind;
  double magnitude;

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::shape: os << "shape: matrix is not square with power-of-two dimension"; break;
      case Kind::trace: os << "trace: |Tr - 1| = " << magnitude; break;
      case Kind::hermiticity: os << "hermiticity: max|M - M^dag| = " << magnitude; break;
      case Kind::positivity: os << "positivity: smallest eigenvalue = " << magnitude; break;
    }
    return os.str();
  }
};

class DensityError : public NumericError {
 public:
  explicit DensityError(DensityViolation v)
      : NumericError("invalid density matrix: " + v.describe()), violation_(v) {}
  const DensityViolation& violation() const { return violation_; }

 private:
  DensityViolation violation_;
};

inline std::optional<DensityViolation> check_density(const ComplexMatrix& m) {
  using K = DensityViolation::Kind;
  if (m.rows() != m.cols() || !is_power_of_two(static_cast<std::size_t>(m.rows())))
    return DensityViolation{K::shape, 0.0};
  double herm = hermiticity_error(m);
  if (herm > kHermitianTolerance) return DensityViolation{K::hermiticity, herm};
  double tr = std::abs(m.trace() - Complex(1.0, 0.0));
  if (tr > kTraceTolerance) return DensityViolation{K::trace, tr};
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < kEigenvalueFloor) return DensityViolation{K::positivity, min_eig};
  return std::nullopt;
}

class DensityMatrix;
DensityMatrix validate_density(const ComplexMatrix& m);

class DensityMatrix {
 public:
  static DensityMatrix from_pure(const PureState& s) { return DensityMatrix(s.projector()); }

  static DensityMatrix maximally_mixed(int qubits) {
    auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits);
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  }

  const ComplexMatrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  int qubits() const { return log2_exact(dim()); }

 private:
  friend DensityMatrix validate_density(const ComplexMatrix& m);
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

// Accepts m as a density matrix or throws DensityError naming the failed
// invariant and its magnitude.
inline DensityMatrix validate_density(const ComplexMatrix& m) {
  if (auto v = check_density(m)) throw DensityError(*v);
  return DensityMatrix(m);
}

// ---------------------------------------------------------------------------
// Operations

inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

inline std::size_t bit_of(int qubit, int qubit_count) {
  return std::size_t{1} << (qubit_count - 1 - qubit);
}

// For an ordered list of qubits, returns for every sub-index s (in [0, 2^k))
// the full-register mask bits it sets. sub-index bit order follows the list,
// first listed qubit most significant.
inline std::vector<std::size_t> scatter_table(const std::vector<int>& qubits, int qubit_count) {
  const std::size_t k = qubits.size();
  std::vector<std::size_t> table(std::size_t{1} << k, 0);
  for (std::size_t s = 0; s < table.size(); ++s) {
    std::size_t full = 0;
    for (std::size_t p = 0; p < k; ++p)
      if (s & (std::size_t{1} << (k - 1 - p))) full |= bit_of(qubits[p], qubit_count);
    table[s] = full;
  }
  return table;
}

inline std::vector<int> complement(const std::vector<int>& qubits, int qubit_count) {
  std::vector<int> rest;
  for (int q = 0; q < qubit_count; ++q)
    if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) rest.push_back(q);
  return rest;
}

}  // namespace detail

// Reduces any square matrix on qubit_count qubits onto the kept qubits
// (ascending order). Works for non-density operators as well.
inline ComplexMatrix partial_trace_matrix(const ComplexMatrix& m, int qubit_count,
                                          const std::set<int>& keep) {
  require(!keep.empty(), "partial trace: keep set is empty");
  require(m.rows() == m.cols() &&
              static_cast<std::size_t>(m.rows()) == (std::size_t{1} << qubit_count),
          "partial trace: matrix dimension does not match qubit count");
  for (int q : keep)
    require(q >= 0 && q < qubit_count, "partial trace: qubit index out of range");
  std::vector<int> kept(keep.begin(), keep.end());
  std::vector<int> traced = detail::complement(kept, qubit_count);
  auto keep_tab = detail::scatter_table(kept, qubit_count);
  auto trace_tab = detail::scatter_table(traced, qubit_count);
  auto d = static_cast<Eigen::Index>(keep_tab.size());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      Complex acc = 0.0;
      for (std::size_t t : trace_tab)
        acc += m(static_cast<Eigen::Index>(keep_tab[a] | t),
                 static_cast<Eigen::Index>(keep_tab[b] | t));
      out(a, b) = acc;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, int qubit_count,
                                   const std::set<int>& keep) {
  if (static_cast<int>(keep.size()) == qubit_count) {
    for (int q : keep) require(q >= 0 && q < qubit_count, "partial trace: qubit index out of range");
    return rho;
  }
  return validate_density(partial_trace_matrix(rho.matrix(), qubit_count, keep));
}

// Lifts an operator on the listed qubits (first listed = most significant)
// to the full qubit_count register.
inline ComplexMatrix embed_operator(const ComplexMatrix& op, const std::vector<int>& qubits,
                                    int qubit_count) {
  require(static_cast<std::size_t>(op.rows()) == (std::size_t{1} << qubits.size()) &&
              op.rows() == op.cols(),
          "embed: operator dimension does not match qubit list");
  for (int q : qubits) require(q >= 0 && q < qubit_count, "embed: qubit index out of range");
  auto in_tab = detail::scatter_table(qubits, qubit_count);
  auto rest_tab = detail::scatter_table(detail::complement(qubits, qubit_count), qubit_count);
  auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubit_count);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (std::size_t r : rest_tab)
    for (std::size_t a = 0; a < in_tab.size(); ++a)
      for (std::size_t b = 0; b < in_tab.size(); ++b)
        out(static_cast<Eigen::Index>(in_tab[a] | r), static_cast<Eigen::Index>(in_tab[b] | r)) =
            op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return out;
}

// e^{i eps K} for Hermitian K, via eigendecomposition.
inline ComplexMatrix hermitian_exp(const ComplexMatrix& k, double eps) {
  require(k.rows() == k.cols(), "hermitian_exp: matrix must be square");
  double herm = hermiticity_error(k);
  if (herm > kHermitianTolerance) {
    std::ostringstream os;
    os << "hermitian_exp: input is not Hermitian (max|K - K^dag| = " << herm << ")";
    throw NumericError(os.str());
  }
  ComplexMatrix h = 0.5 * (k + k.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  ComplexVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases(i) = std::polar(1.0, eps * es.eigenvalues()(i));
  const ComplexMatrix& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

inline double fidelity(const PureState& target, const DensityMatrix& rho) {
  require(target.dim() == rho.dim(), "fidelity: dimension mismatch");
  const ComplexVector& phi = target.amplitudes();
  Complex f = phi.dot(rho.matrix() * phi);  // dot() conjugates the left side
  double re = f.real();
  return std::clamp(re, 0.0, 1.0);
}

inline DensityMatrix conjugate_by_unitary(const DensityMatrix& rho, const ComplexMatrix& u) {
  require(static_cast<std::size_t>(u.rows()) == rho.dim() && u.rows() == u.cols(),
          "conjugate_by_unitary: dimension mismatch");
  double err = unitarity_error(u);
  if (err > kUnitaryTolerance) {
    std::ostringstream os;
    os << "conjugate_by_unitary: operator is not unitary (max|U^dag U - I| = " << err << ")";
    throw NumericError(os.str());
  }
  return validate_density(u * rho.matrix() * u.adjoint());
}

// Nearest unitary in Frobenius norm (polar factor).
inline ComplexMatrix polar_unitary(const ComplexMatrix& u) {
  Eigen::JacobiSVD<ComplexMatrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// ---------------------------------------------------------------------------
// Random sampling

// Haar unitary: QR of a complex Ginibre matrix with R's diagonal phases
// folded back into Q.
inline ComplexMatrix haar_unitary(std::size_t dim, Rng& rng) {
  auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix z(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      double re = gaussian(rng);
      double im = gaussian(rng);
      z(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    Complex rii = r(i, i);
    double mag = std::abs(rii);
    q.col(i) *= mag > 0.0 ? rii / mag : Complex(1.0, 0.0);
  }
  return q;
}

inline PureState haar_state(int qubits, Rng& rng) {
  auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  ComplexVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double re = gaussian(rng);
    double im = gaussian(rng);
    v(i) = Complex(re, im);
  }
  return PureState::normalized(v);
}

inline ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
  auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix a(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      double re = gaussian(rng);
      double im = gaussian(rng);
      a(i, j) = Complex(re, im);
    }
  return 0.5 * (a + a.adjoint());
}

// Random mixed state of full rank: normalized G G^dag.
inline DensityMatrix random_density(int qubits, Rng& rng) {
  auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  ComplexMatrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      double re = gaussian(rng);
      double im = gaussian(rng);
      g(i, j) = Complex(re, im);
    }
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  m = 0.5 * (m + m.adjoint());
  return validate_density(m);
}

// ---------------------------------------------------------------------------
// Pauli strings

namespace pauli {

inline ComplexMatrix single(int which) {
  ComplexMatrix p(2, 2);
  const Complex i(0.0, 1.0);
  switch (which) {
    case 0: p << 1.0, 0.0, 0.0, 1.0; break;
    case 1: p << 0.0, 1.0, 1.0, 0.0; break;
    case 2: p << 0.0, -i, i, 0.0; break;
    default: p << 1.0, 0.0, 0.0, -1.0; break;
  }
  return p;
}

inline ComplexMatrix identity() { return single(0); }
inline ComplexMatrix x() { return single(1); }
inline ComplexMatrix y() { return single(2); }
inline ComplexMatrix z() { return single(3); }

// index in [0, 4^qubits); base-4 digits select I/X/Y/Z per qubit, qubit 0
// being the most significant digit. Index 0 is the identity string.
inline ComplexMatrix string(std::size_t index, int qubits) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < qubits; ++q) {
    int digit = static_cast<int>((index >> (2 * (qubits - 1 - q))) & 3U);
    out = tensor_product(out, single(digit));
  }
  return out;
}

inline std::size_t count(int qubits) { return std::size_t{1} << (2 * qubits); }

}  // namespace pauli

}  // namespace rtlsq::quantum

#endif  // RTLSQ_LINALG_HPP

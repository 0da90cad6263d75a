#ifndef RTLSQ_VQC_HPP
#define RTLSQ_VQC_HPP

// Shallow variational circuits on an exact statevector: feature encoding,
// an Ry/Rz + CZ ansatz, per-qubit <Z> readout and parameter-shift gradients.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rtlsq/error.hpp"
#include "rtlsq/linalg.hpp"
#include "rtlsq/rng.hpp"

namespace rtlsq::vqc {

using quantum::Complex;
using quantum::ComplexVector;
using quantum::PureState;

inline constexpr int kMaxQubits = 12;
inline constexpr double kRangeSlack = 1e-9;

enum class Encoding { angle, amplitude };
enum class Entanglement { linear, ring };

inline std::string to_string(Encoding e) { return e == Encoding::angle ? "angle" : "amplitude"; }
inline std::string to_string(Entanglement e) { return e == Entanglement::ring ? "ring" : "linear"; }

inline Encoding parse_encoding(const std::string& s) {
  if (s == "angle") return Encoding::angle;
  if (s == "amplitude") return Encoding::amplitude;
  throw ArgumentError("unknown encoding: " + s);
}

inline Entanglement parse_entanglement(const std::string& s) {
  if (s == "linear") return Entanglement::linear;
  if (s == "ring") return Entanglement::ring;
  throw ArgumentError("unknown entanglement: " + s);
}

struct VqcModel {
  int n_qubits = 4;
  int depth = 3;
  // Layout: params[(layer * n_qubits + qubit) * 2 + {0: Ry, 1: Rz}].
  std::vector<double> params;
  Encoding encoding = Encoding::angle;
  Entanglement entanglement = Entanglement::ring;

  static std::size_t param_count(int n_qubits, int depth) {
    return static_cast<std::size_t>(depth) * static_cast<std::size_t>(n_qubits) * 2;
  }

  void validate() const {
    require(n_qubits >= 1 && n_qubits <= kMaxQubits, "vqc: qubit count out of range");
    require(depth >= 0, "vqc: depth must be non-negative");
    require(params.size() == param_count(n_qubits, depth), "vqc: parameter count does not match depth");
    for (double p : params) require(std::isfinite(p), "vqc: parameters must be finite");
  }
};

inline VqcModel init_vqc(int n_qubits, int depth, std::uint64_t seed,
                         Encoding enc = Encoding::angle, Entanglement ent = Entanglement::ring) {
  Rng rng = substream(seed, "init", 1);
  VqcModel m{n_qubits, depth, {}, enc, ent};
  m.params.resize(VqcModel::param_count(n_qubits, depth));
  for (double& p : m.params) p = uniform(rng, -std::numbers::pi, std::numbers::pi);
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Statevector kernels (qubit 0 = most significant bit)

namespace detail {

inline void apply_single(ComplexVector& psi, int n, int qubit, Complex m00, Complex m01, Complex m10,
                         Complex m11) {
  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - qubit);
  const Eigen::Index dim = psi.size();
  for (Eigen::Index base = 0; base < dim; base += 2 * stride)
    for (Eigen::Index off = 0; off < stride; ++off) {
      Eigen::Index i0 = base + off;
      Eigen::Index i1 = i0 + stride;
      Complex a = psi(i0), b = psi(i1);
      psi(i0) = m00 * a + m01 * b;
      psi(i1) = m10 * a + m11 * b;
    }
}

inline void apply_ry(ComplexVector& psi, int n, int qubit, double theta) {
  double c = std::cos(theta / 2), s = std::sin(theta / 2);
  apply_single(psi, n, qubit, c, -s, s, c);
}

inline void apply_rz(ComplexVector& psi, int n, int qubit, double theta) {
  apply_single(psi, n, qubit, std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2));
}

inline void apply_cz(ComplexVector& psi, int n, int a, int b) {
  const Eigen::Index ma = Eigen::Index{1} << (n - 1 - a);
  const Eigen::Index mb = Eigen::Index{1} << (n - 1 - b);
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    if ((i & ma) && (i & mb)) psi(i) = -psi(i);
}

inline std::vector<std::pair<int, int>> entangler_pairs(int n, Entanglement ent) {
  std::vector<std::pair<int, int>> pairs;
  for (int q = 0; q + 1 < n; ++q) pairs.emplace_back(q, q + 1);
  // A ring on two qubits would repeat CZ(0,1) and cancel it.
  if (ent == Entanglement::ring && n > 2) pairs.emplace_back(n - 1, 0);
  return pairs;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoding

/// Angle encoding: from |0...0>, feature i rotates qubit (i mod n) by
/// Ry(pi * x_i), in feature order. Features must lie in [0, 1].
inline PureState angle_encode(std::span<const double> features, int n_qubits) {
  require(n_qubits >= 1 && n_qubits <= kMaxQubits, "angle_encode: qubit count out of range");
  ComplexVector psi = ComplexVector::Zero(Eigen::Index{1} << n_qubits);
  psi(0) = 1.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double x = features[i];
    if (!(x >= -kRangeSlack && x <= 1.0 + kRangeSlack))
      throw DataError("angle_encode: feature " + std::to_string(i) + " outside [0, 1]: " +
                      std::to_string(x));
    detail::apply_ry(psi, n_qubits, static_cast<int>(i % static_cast<std::size_t>(n_qubits)),
                     std::numbers::pi * x);
  }
  return PureState::from_amplitudes(std::move(psi));
}

inline PureState amplitude_encode(std::span<const double> features, int n_qubits) {
  require(n_qubits >= 1 && n_qubits <= kMaxQubits, "amplitude_encode: qubit count out of range");
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (features.size() > dim)
    throw ArgumentError("amplitude_encode: " + std::to_string(features.size()) +
                        " features do not fit in " + std::to_string(n_qubits) + " qubits");
  ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < features.size(); ++i) psi(static_cast<Eigen::Index>(i)) = features[i];
  double norm = psi.norm();
  if (!(norm > 0.0)) throw DataError("amplitude_encode: all-zero feature vector");
  return PureState::from_amplitudes(psi / norm);
}

inline PureState encode(const VqcModel& model, std::span<const double> features) {
  return model.encoding == Encoding::angle ? angle_encode(features, model.n_qubits)
                                           : amplitude_encode(features, model.n_qubits);
}

// ---------------------------------------------------------------------------
// Circuit

namespace detail {

inline ComplexVector run_ansatz(ComplexVector psi, const VqcModel& model,
                                std::span<const double> params) {
  const int n = model.n_qubits;
  const auto pairs = entangler_pairs(n, model.entanglement);
  for (int layer = 0; layer < model.depth; ++layer) {
    for (int q = 0; q < n; ++q) {
      std::size_t base = (static_cast<std::size_t>(layer) * static_cast<std::size_t>(n) +
                          static_cast<std::size_t>(q)) * 2;
      apply_ry(psi, n, q, params[base]);
      apply_rz(psi, n, q, params[base + 1]);
    }
    for (auto [a, b] : pairs) apply_cz(psi, n, a, b);
  }
  return psi;
}

inline std::vector<double> z_expectations(const ComplexVector& psi, int n) {
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    double p = std::norm(psi(i));
    for (int q = 0; q < n; ++q) z[static_cast<std::size_t>(q)] += (i >> (n - 1 - q)) & 1 ? -p : p;
  }
  return z;
}

}  // namespace detail

inline PureState apply_ansatz(const PureState& state, const VqcModel& model) {
  model.validate();
  require(state.qubits() == model.n_qubits, "apply_ansatz: state width does not match model");
  ComplexVector out = detail::run_ansatz(state.amplitudes(), model, model.params);
  // Renormalize away rounding so the result satisfies the PureState check.
  return PureState::from_amplitudes(out / out.norm());
}

inline std::vector<double> expectations(const PureState& state, int n_qubits) {
  require(state.qubits() == n_qubits, "expectations: state width mismatch");
  return detail::z_expectations(state.amplitudes(), n_qubits);
}

/// Encode, run the ansatz, read per-qubit <Z>. Outputs lie in [-1, 1].
inline std::vector<double> vqc_scores(const VqcModel& model, std::span<const double> features) {
  return expectations(apply_ansatz(encode(model, features), model), model.n_qubits);
}

/// Gradient of dot(downstream_grad, vqc_scores) with respect to every
/// rotation angle, by the +-pi/2 shift rule.
inline std::vector<double> param_shift_grad(const VqcModel& model, std::span<const double> features,
                                            std::span<const double> downstream_grad) {
  model.validate();
  require(downstream_grad.size() == static_cast<std::size_t>(model.n_qubits),
          "param_shift_grad: downstream gradient width mismatch");
  std::vector<double> grad(model.params.size(), 0.0);
  bool all_zero = true;
  for (double g : downstream_grad) all_zero = all_zero && g == 0.0;
  if (all_zero) return grad;

  const ComplexVector encoded = encode(model, features).amplitudes();
  std::vector<double> shifted = model.params;
  auto projected = [&](double delta, std::size_t k) {
    shifted[k] = model.params[k] + delta;
    auto z = detail::z_expectations(detail::run_ansatz(encoded, model, shifted), model.n_qubits);
    shifted[k] = model.params[k];
    double s = 0.0;
    for (std::size_t q = 0; q < z.size(); ++q) s += downstream_grad[q] * z[q];
    return s;
  };
  const double shift = std::numbers::pi / 2;
  for (std::size_t k = 0; k < grad.size(); ++k)
    grad[k] = 0.5 * (projected(shift, k) - projected(-shift, k));
  return grad;
}

}  // namespace rtlsq::vqc

#endif  // RTLSQ_VQC_HPP

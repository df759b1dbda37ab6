#pragma once

// Small fixed-size quantum states: kets and density operators over one qubit
// (dim 2) or two qubits (dim 4).
//
// Basis orderings used everywhere in the toolkit:
//   OAM qubit        (R, L)      with R = |+l>, L = |-l>
//   polarization     (h, v)
//   two subsystems   first (x) second, row-major Kronecker,
//                    e.g. (RR, RL, LR, LL) or (hR, hL, vR, vL)

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "oamx/errors.hpp"

namespace oamx {

using complex = std::complex<double>;

template <int N>
using CMatrix = Eigen::Matrix<complex, N, N>;
template <int N>
using CVector = Eigen::Matrix<complex, N, 1>;

template <int N>
concept QuantumDim = (N == 2 || N == 4);

namespace tol {
inline constexpr double kNormalized = 1e-12;   // after a normalizing constructor
inline constexpr double kInputNorm = 1e-9;     // accepted deviation on user kets
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kMinEigenvalue = -1e-10;
}  // namespace tol

template <int N>
  requires QuantumDim<N>
class Ket {
 public:
  static constexpr int dim = N;

  explicit Ket(const CVector<N>& amplitudes) : amps_(amplitudes) {}
  explicit Ket(const std::array<complex, N>& amplitudes) {
    for (int i = 0; i < N; ++i) amps_(i) = amplitudes[static_cast<std::size_t>(i)];
  }

  // Rescales to unit norm. Throws on the zero vector.
  static Ket normalized(const CVector<N>& amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw ValidationError("cannot normalize a zero or non-finite ket");
    return Ket(CVector<N>(amplitudes / n));
  }
  static Ket normalized(const std::array<complex, N>& amplitudes) {
    return normalized(Ket(amplitudes).amps_);
  }

  static Ket basis(int index) {
    if (index < 0 || index >= N) throw ValidationError("basis index out of range");
    CVector<N> v = CVector<N>::Zero();
    v(index) = 1.0;
    return Ket(v);
  }

  const CVector<N>& amplitudes() const noexcept { return amps_; }
  complex operator[](int i) const { return amps_(i); }
  double norm() const { return amps_.norm(); }
  bool is_normalized(double tolerance = tol::kInputNorm) const {
    return std::abs(amps_.squaredNorm() - 1.0) <= tolerance;
  }

  // <this|other>
  complex inner(const Ket& other) const { return amps_.dot(other.amps_); }

 private:
  CVector<N> amps_;
};

// Plain square matrix. Producers of projectors and channel maps validate them.
template <int N>
  requires QuantumDim<N>
class Operator {
 public:
  static constexpr int dim = N;

  Operator() : m_(CMatrix<N>::Zero()) {}
  explicit Operator(const CMatrix<N>& m) : m_(m) {}

  static Operator identity() { return Operator(CMatrix<N>::Identity()); }

  const CMatrix<N>& matrix() const noexcept { return m_; }
  complex operator()(int i, int j) const { return m_(i, j); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  complex trace() const { return m_.trace(); }

  friend Operator operator+(const Operator& a, const Operator& b) { return Operator(a.m_ + b.m_); }
  friend Operator operator-(const Operator& a, const Operator& b) { return Operator(a.m_ - b.m_); }
  friend Operator operator*(const Operator& a, const Operator& b) { return Operator(a.m_ * b.m_); }
  friend Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }

 private:
  CMatrix<N> m_;
};

namespace detail {

template <int N>
double hermitian_defect(const CMatrix<N>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Eigenvalues of the Hermitian part, ascending.
template <int N>
Eigen::Matrix<double, N, 1> hermitian_eigenvalues(const CMatrix<N>& m) {
  const CMatrix<N> h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix<N>> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace detail

// Hermitian, unit-trace, positive semidefinite operator. Every instance has
// passed those three checks; the stored matrix is exactly Hermitian.
template <int N>
  requires QuantumDim<N>
class DensityMatrix {
 public:
  static constexpr int dim = N;

  explicit DensityMatrix(const CMatrix<N>& m) : m_(validated(m)) {}

  static DensityMatrix from_operator(const Operator<N>& op) { return DensityMatrix(op.matrix()); }

  static DensityMatrix maximally_mixed() {
    return DensityMatrix(CMatrix<N>(CMatrix<N>::Identity() / static_cast<double>(N)));
  }

  const CMatrix<N>& matrix() const noexcept { return m_; }
  complex operator()(int i, int j) const { return m_(i, j); }
  Operator<N> as_operator() const { return Operator<N>(m_); }

  // Ascending; values inside the PSD tolerance band below zero read as 0.
  Eigen::Matrix<double, N, 1> eigenvalues() const {
    auto ev = detail::hermitian_eigenvalues<N>(m_);
    for (int i = 0; i < N; ++i) ev(i) = std::max(ev(i), 0.0);
    return ev;
  }

  double purity() const { return (m_ * m_).trace().real(); }

 private:
  static CMatrix<N> validated(const CMatrix<N>& m) {
    if (!m.allFinite()) throw ValidationError("density matrix has non-finite entries");
    if (detail::hermitian_defect<N>(m) > tol::kHermitian)
      throw ValidationError("density matrix is not Hermitian");
    const complex tr = m.trace();
    if (std::abs(tr.real() - 1.0) > tol::kTrace || std::abs(tr.imag()) > tol::kTrace)
      throw ValidationError("density matrix trace is not 1");
    if (detail::hermitian_eigenvalues<N>(m).minCoeff() < tol::kMinEigenvalue)
      throw ValidationError("density matrix is not positive semidefinite");
    return 0.5 * (m + m.adjoint());
  }

  CMatrix<N> m_;
};

// Check the three density-matrix invariants without constructing one.
template <int N>
bool is_physical(const CMatrix<N>& m) {
  if (!m.allFinite() || detail::hermitian_defect<N>(m) > tol::kHermitian) return false;
  const complex tr = m.trace();
  if (std::abs(tr.real() - 1.0) > tol::kTrace || std::abs(tr.imag()) > tol::kTrace) return false;
  return detail::hermitian_eigenvalues<N>(m).minCoeff() >= tol::kMinEigenvalue;
}

template <int N>
DensityMatrix<N> density_from_ket(const Ket<N>& psi) {
  if (!psi.is_normalized()) throw ValidationError("ket is not normalized");
  const CVector<N> v = psi.amplitudes() / psi.norm();
  return DensityMatrix<N>(CMatrix<N>(v * v.adjoint()));
}

namespace detail {

template <int A, int B>
Eigen::Matrix<complex, A * B, A * B> kron(const CMatrix<A>& a, const CMatrix<B>& b) {
  Eigen::Matrix<complex, A * B, A * B> out;
  for (int i = 0; i < A; ++i)
    for (int j = 0; j < A; ++j) out.template block<B, B>(i * B, j * B) = a(i, j) * b;
  return out;
}

}  // namespace detail

inline Ket<4> tensor(const Ket<2>& a, const Ket<2>& b) {
  CVector<4> v;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) v(2 * i + j) = a[i] * b[j];
  return Ket<4>(v);
}

inline DensityMatrix<4> tensor(const DensityMatrix<2>& a, const DensityMatrix<2>& b) {
  return DensityMatrix<4>(detail::kron<2, 2>(a.matrix(), b.matrix()));
}

inline Operator<4> tensor(const Operator<2>& a, const Operator<2>& b) {
  return Operator<4>(detail::kron<2, 2>(a.matrix(), b.matrix()));
}

// <phi|rho|phi>
template <int N>
double fidelity(const DensityMatrix<N>& rho, const Ket<N>& phi) {
  if (!phi.is_normalized()) throw ValidationError("fidelity target ket is not normalized");
  const complex f = phi.amplitudes().dot(rho.matrix() * phi.amplitudes());
  if (std::abs(f.imag()) > 1e-10) throw std::logic_error("fidelity has an imaginary part");
  return std::clamp(f.real(), 0.0, 1.0);
}

// Real part of tr(rho * op).
template <int N>
double expectation(const DensityMatrix<N>& rho, const Operator<N>& op) {
  return (rho.matrix() * op.matrix()).trace().real();
}

enum class Subsystem { First, Second };

inline DensityMatrix<2> partial_trace(const DensityMatrix<4>& rho, Subsystem keep) {
  CMatrix<2> out = CMatrix<2>::Zero();
  const auto& m = rho.matrix();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        if (keep == Subsystem::First)
          out(i, j) += m(2 * i + k, 2 * j + k);
        else
          out(i, j) += m(2 * k + i, 2 * k + j);
      }
  return DensityMatrix<2>(out);
}

// Half the trace norm of (a - b). Works for any Hermitian pair.
template <int N>
double trace_distance(const CMatrix<N>& a, const CMatrix<N>& b) {
  return 0.5 * detail::hermitian_eigenvalues<N>(CMatrix<N>(a - b)).cwiseAbs().sum();
}

template <int N>
double trace_distance(const DensityMatrix<N>& a, const DensityMatrix<N>& b) {
  return trace_distance<N>(a.matrix(), b.matrix());
}

}  // namespace oamx

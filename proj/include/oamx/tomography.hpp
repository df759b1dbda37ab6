#pragma once

// Density-matrix reconstruction from projection counts.
//
// One qubit: four projections onto
//   chi1 = (1,0)  chi2 = (0,1)  chi3 = (1,1)/√2  chi4 = (1,-i)/√2
// with rho = a a† / tr(a a†), a = [[t1, 0], [t3 + i t4, t2]], fitted by
// minimizing L = sum_i (N p_i - n_i)^2 / (2 N p_i), N = n1 + n2.
//
// Two qubits: sixteen product projections, rho = T†T / tr(T†T) with T lower
// triangular (real diagonal), the same L and N summed over the four counts of
// the first two bases on each side.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oamx/core.hpp"
#include "oamx/measurement.hpp"
#include "oamx/nelder_mead.hpp"
#include "oamx/states.hpp"

namespace oamx {

inline constexpr double kProbabilityFloor = 1e-12;

// Hermitian and unit trace, not necessarily positive. Stokes parameters
// S0 = pR + pL, S3 = pR - pL, S1 = 2 pH - S0, S2 = 2 pD - S0 and
// rho = (I + (S1 σx + S2 σy + S3 σz) / S0) / 2 in the (R, L) basis.
inline Operator<2> stokes_reconstruct(double p_r, double p_l, double p_h, double p_d,
                                      double normalization_tolerance = 1e-6) {
  for (double p : {p_r, p_l, p_h, p_d})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("Stokes probabilities must lie in [0,1]");
  const double s0 = p_r + p_l;
  if (std::abs(s0 - 1.0) > normalization_tolerance)
    throw ValidationError("p_R + p_L must equal 1");
  const double s1 = (2.0 * p_h - s0) / s0;
  const double s2 = (2.0 * p_d - s0) / s0;
  const double s3 = (p_r - p_l) / s0;
  CMatrix<2> m;
  m << 0.5 * (1.0 + s3), 0.5 * complex(s1, -s2), 0.5 * complex(s1, s2), 0.5 * (1.0 - s3);
  return Operator<2>(m);
}

struct MleParamsQubit {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double t4 = 0.0;
};

inline const std::array<std::string, 4>& qubit_basis_labels() {
  static const std::array<std::string, 4> labels{"R", "L", "H", "A"};
  return labels;
}

inline std::array<Ket<2>, 4> qubit_tomography_bases() {
  using A = std::array<complex, 2>;
  return {Ket<2>(A{1.0, 0.0}), Ket<2>(A{0.0, 1.0}), Ket<2>(A{kInvSqrt2, kInvSqrt2}),
          Ket<2>(A{kInvSqrt2, -kInvSqrt2 * kI})};
}

namespace detail {

inline CMatrix<2> qubit_unnormalized(const MleParamsQubit& t) {
  CMatrix<2> a;
  a << t.t1, 0.0, complex(t.t3, t.t4), t.t2;
  return a * a.adjoint();
}

inline const std::array<CMatrix<2>, 4>& qubit_projectors() {
  static const std::array<CMatrix<2>, 4> projs = [] {
    std::array<CMatrix<2>, 4> out;
    const auto bases = qubit_tomography_bases();
    for (std::size_t i = 0; i < 4; ++i)
      out[i] = bases[i].amplitudes() * bases[i].amplitudes().adjoint();
    return out;
  }();
  return projs;
}

// Re tr(m p) for Hermitian m, p.
template <int N>
double trace_product(const CMatrix<N>& m, const CMatrix<N>& p) {
  return m.cwiseProduct(p.transpose()).sum().real();
}

}  // namespace detail

inline DensityMatrix<2> qubit_density(const MleParamsQubit& t) {
  const CMatrix<2> m = detail::qubit_unnormalized(t);
  const double tr = m.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw ValidationError("degenerate MLE parameters");
  return DensityMatrix<2>(CMatrix<2>(m / tr));
}

inline std::array<double, 4> qubit_probabilities(const MleParamsQubit& t) {
  const CMatrix<2> m = detail::qubit_unnormalized(t);
  const double tr = m.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw ValidationError("degenerate MLE parameters");
  std::array<double, 4> p{};
  for (std::size_t i = 0; i < 4; ++i)
    p[i] = detail::trace_product<2>(m, detail::qubit_projectors()[i]) / tr;
  return p;
}

// Probabilities of the four qubit tomography projections for a known state.
inline std::array<double, 4> qubit_tomography_probabilities(const DensityMatrix<2>& rho) {
  std::array<double, 4> p{};
  for (std::size_t i = 0; i < 4; ++i)
    p[i] = std::clamp(detail::trace_product<2>(rho.matrix(), detail::qubit_projectors()[i]), 0.0,
                      1.0);
  return p;
}

// sum_i (N p_i - n_i)^2 / (2 N p_i) with p_i floored at kProbabilityFloor.
inline double tomography_likelihood(std::span<const double> probabilities,
                                    std::span<const double> counts, double normalization) {
  if (probabilities.size() != counts.size())
    throw ValidationError("probability and count lists differ in length");
  if (!(normalization > 0.0)) throw ValidationError("normalization must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double np = normalization * std::max(probabilities[i], kProbabilityFloor);
    const double d = np - counts[i];
    sum += d * d / (2.0 * np);
  }
  return sum;
}

struct QubitTomographyCounts {
  // Counts for R, L, H, A (chi1..chi4). Real-valued so that expectation
  // values and background-subtracted counts can be reconstructed directly.
  std::array<double, 4> counts{};

  double normalization() const { return counts[0] + counts[1]; }
};

struct MleOptions {
  MultiStartOptions search{};
  // Replaces the identity start when set (multi-start perturbs around it).
  std::optional<std::vector<double>> warm_start;
};

template <int N>
struct MleResult {
  DensityMatrix<N> rho;
  std::vector<double> params;
  double likelihood;
  std::size_t evaluations;
  int best_start;
};

namespace detail {

inline void validate_counts(std::span<const double> counts) {
  for (double c : counts)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw ValidationError("tomography counts must be finite and >= 0");
}

inline MleParamsQubit canonical_qubit(const Eigen::VectorXd& x) {
  MleParamsQubit t{x(0), x(1), x(2), x(3)};
  if (t.t1 < 0.0) {
    t.t1 = -t.t1;
    t.t3 = -t.t3;
    t.t4 = -t.t4;
  }
  t.t2 = std::abs(t.t2);
  return t;
}

}  // namespace detail

inline MleResult<2> qubit_mle(const QubitTomographyCounts& data, const MleOptions& opt = {}) {
  detail::validate_counts(data.counts);
  const double n = data.normalization();
  if (!(n > 0.0)) throw ValidationError("qubit tomography needs n1 + n2 > 0");
  const auto& projs = detail::qubit_projectors();

  auto objective = [&](const Eigen::VectorXd& x) {
    const CMatrix<2> m = detail::qubit_unnormalized({x(0), x(1), x(2), x(3)});
    const double tr = m.trace().real();
    if (!(tr > 0.0)) return std::numeric_limits<double>::infinity();
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < 4; ++i) p[i] = detail::trace_product<2>(m, projs[i]) / tr;
    return tomography_likelihood(p, data.counts, n);
  };

  Eigen::VectorXd start(4);
  if (opt.warm_start) {
    if (opt.warm_start->size() != 4) throw ValidationError("qubit warm start needs 4 parameters");
    start = Eigen::Map<const Eigen::VectorXd>(opt.warm_start->data(), 4);
  } else {
    start << kInvSqrt2, kInvSqrt2, 0.0, 0.0;
  }
  const auto found = multi_start_minimize(objective, start, opt.search);
  const MleParamsQubit t = detail::canonical_qubit(found.best.x);
  return {qubit_density(t),
          {t.t1, t.t2, t.t3, t.t4},
          found.best.value,
          found.best.evaluations,
          found.best_start};
}

// Exact expected counts for the four qubit projections, scaled so n1 + n2 = total.
inline QubitTomographyCounts forward_model_qubit(const DensityMatrix<2>& rho, double total) {
  QubitTomographyCounts c;
  const auto p = qubit_tomography_probabilities(rho);
  for (std::size_t i = 0; i < 4; ++i) c.counts[i] = total * p[i];
  return c;
}

// Sixteen counts over bases_a x bases_b, row-major (a outer, b inner). The
// first two bases on each side must be orthogonal; their four products fix N.
struct TwoQubitTomographyCounts {
  std::array<ProjectorSpec, 4> bases_a;
  std::array<ProjectorSpec, 4> bases_b;
  std::array<double, 16> counts{};

  double normalization() const { return counts[0] + counts[1] + counts[4] + counts[5]; }
  MeasurementSetting setting(std::size_t index) const {
    return {bases_a[index / 4], bases_b[index % 4]};
  }
};

inline std::array<ProjectorSpec, 4> specs(const std::array<const char*, 4>& labels) {
  return {ProjectorSpec::label(labels[0]), ProjectorSpec::label(labels[1]),
          ProjectorSpec::label(labels[2]), ProjectorSpec::label(labels[3])};
}

// {h,v,d,r} on the polarization photon, {R,L,H,D} on the OAM photon.
inline std::array<ProjectorSpec, 4> polarization_tomography_bases() {
  return specs({"h", "v", "d", "r"});
}
inline std::array<ProjectorSpec, 4> oam_tomography_bases() { return specs({"R", "L", "H", "D"}); }

namespace detail {

inline std::array<CMatrix<4>, 16> product_projectors(const std::array<ProjectorSpec, 4>& a,
                                                     const std::array<ProjectorSpec, 4>& b) {
  std::array<CMatrix<4>, 16> out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      out[4 * i + j] = tensor(projector(a[i]), projector(b[j])).matrix();
  return out;
}

inline void validate_two_qubit_bases(const std::array<ProjectorSpec, 4>& a,
                                     const std::array<ProjectorSpec, 4>& b) {
  std::vector<std::string> issues;
  if (std::abs(a[0].ket().inner(a[1].ket())) > 1e-9)
    issues.emplace_back("first two side-a bases must be orthogonal");
  if (std::abs(b[0].ket().inner(b[1].ket())) > 1e-9)
    issues.emplace_back("first two side-b bases must be orthogonal");
  // Tomographic completeness: the sixteen projectors span all Hermitian 4x4.
  const auto projs = product_projectors(a, b);
  Eigen::Matrix<double, 16, 16> span;
  for (int k = 0; k < 16; ++k) {
    const auto& p = projs[static_cast<std::size_t>(k)];
    int r = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        span(r++, k) = p(i, j).real();
        if (i != j) span(r++, k) = p(i, j).imag();
      }
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(span);
  lu.setThreshold(1e-9);
  if (lu.rank() < 16) issues.emplace_back("two-qubit basis set is not tomographically complete");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

inline CMatrix<4> lower_factor(const Eigen::VectorXd& x) {
  CMatrix<4> t = CMatrix<4>::Zero();
  for (int i = 0; i < 4; ++i) t(i, i) = x(i);
  int k = 4;
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j) {
      t(i, j) = complex(x(k), x(k + 1));
      k += 2;
    }
  return t;
}

}  // namespace detail

inline DensityMatrix<4> two_qubit_density(std::span<const double> params) {
  if (params.size() != 16) throw ValidationError("two-qubit parameters need 16 reals");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(params.data(), 16);
  const CMatrix<4> t = detail::lower_factor(x);
  const CMatrix<4> m = t.adjoint() * t;
  const double tr = m.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw ValidationError("degenerate MLE parameters");
  return DensityMatrix<4>(CMatrix<4>(m / tr));
}

inline MleResult<4> two_qubit_mle(const TwoQubitTomographyCounts& data,
                                  const MleOptions& opt = {}) {
  detail::validate_counts(data.counts);
  detail::validate_two_qubit_bases(data.bases_a, data.bases_b);
  const double n = data.normalization();
  if (!(n > 0.0)) throw ValidationError("two-qubit tomography normalization counts sum to 0");
  const auto projs = detail::product_projectors(data.bases_a, data.bases_b);

  auto objective = [&](const Eigen::VectorXd& x) {
    const CMatrix<4> t = detail::lower_factor(x);
    const CMatrix<4> m = t.adjoint() * t;
    const double tr = m.trace().real();
    if (!(tr > 0.0)) return std::numeric_limits<double>::infinity();
    std::array<double, 16> p{};
    for (std::size_t i = 0; i < 16; ++i) p[i] = detail::trace_product<4>(m, projs[i]) / tr;
    return tomography_likelihood(p, data.counts, n);
  };

  Eigen::VectorXd start = Eigen::VectorXd::Zero(16);
  if (opt.warm_start) {
    if (opt.warm_start->size() != 16)
      throw ValidationError("two-qubit warm start needs 16 parameters");
    start = Eigen::Map<const Eigen::VectorXd>(opt.warm_start->data(), 16);
  } else {
    start.head(4).setConstant(0.5);
  }
  const auto found = multi_start_minimize(objective, start, opt.search);
  std::vector<double> params(found.best.x.data(), found.best.x.data() + 16);
  return {two_qubit_density(params), std::move(params), found.best.value,
          found.best.evaluations, found.best_start};
}

// Exact expected counts for a known state, scaled so the normalization
// subset sums to `total`.
inline TwoQubitTomographyCounts forward_model_two_qubit(const DensityMatrix<4>& rho,
                                                        const std::array<ProjectorSpec, 4>& bases_a,
                                                        const std::array<ProjectorSpec, 4>& bases_b,
                                                        double total) {
  TwoQubitTomographyCounts c{bases_a, bases_b, {}};
  const auto projs = detail::product_projectors(bases_a, bases_b);
  for (std::size_t i = 0; i < 16; ++i)
    c.counts[i] = std::max(0.0, total * detail::trace_product<4>(rho.matrix(), projs[i]));
  return c;
}

}  // namespace oamx

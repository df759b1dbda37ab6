#pragma once

// Projective coincidence measurements: projectors, coincidence
// probabilities, count expectations, accidental background and Poisson
// sampling of the recorded counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "oamx/core.hpp"
#include "oamx/random.hpp"
#include "oamx/states.hpp"

namespace oamx {

// A named basis state (see named_qubit) or a phase-mask angle in radians.
class ProjectorSpec {
 public:
  static ProjectorSpec label(std::string name) {
    if (!named_qubit(name)) throw ValidationError("unknown projector label '" + name + "'");
    return ProjectorSpec(std::move(name));
  }
  static ProjectorSpec theta(double radians) {
    if (!std::isfinite(radians)) throw ValidationError("projector angle must be finite");
    return ProjectorSpec(radians);
  }

  Ket<2> ket() const {
    if (const auto* name = std::get_if<std::string>(&value_)) return qubit_by_name(*name);
    return theta_state(std::get<double>(value_));
  }

  bool is_theta() const noexcept { return std::holds_alternative<double>(value_); }
  std::optional<double> theta_value() const {
    if (const auto* t = std::get_if<double>(&value_)) return *t;
    return std::nullopt;
  }
  std::optional<std::string> label_value() const {
    if (const auto* s = std::get_if<std::string>(&value_)) return *s;
    return std::nullopt;
  }

  friend bool operator==(const ProjectorSpec&, const ProjectorSpec&) = default;

 private:
  explicit ProjectorSpec(std::variant<std::string, double> v) : value_(std::move(v)) {}

  std::variant<std::string, double> value_;
};

// side_a acts on the first subsystem, side_b on the second. A setting
// without side_b is a single-photon projection heralded by its partner.
struct MeasurementSetting {
  ProjectorSpec side_a;
  std::optional<ProjectorSpec> side_b;

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;
};

struct NoiseModel {
  double singles_a = 0.0;           // counts/s
  double singles_b = 0.0;           // counts/s
  double coincidence_window = 0.0;  // s
  double werner_v = 1.0;
  double crosstalk_eps = 0.0;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

inline void validate(const NoiseModel& n) {
  std::vector<std::string> issues;
  auto nonneg = [&](double x, const char* name) {
    if (!(x >= 0.0) || !std::isfinite(x)) issues.push_back(std::string(name) + " must be >= 0");
  };
  auto unit = [&](double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) issues.push_back(std::string(name) + " must lie in [0,1]");
  };
  nonneg(n.singles_a, "singles_a");
  nonneg(n.singles_b, "singles_b");
  nonneg(n.coincidence_window, "coincidence_window");
  unit(n.werner_v, "werner_v");
  unit(n.crosstalk_eps, "crosstalk_eps");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

inline Operator<2> projector(const Ket<2>& k) {
  if (!k.is_normalized()) throw ValidationError("projector ket is not normalized");
  const CVector<2> v = k.amplitudes() / k.norm();
  return Operator<2>(CMatrix<2>(v * v.adjoint()));
}

inline Operator<2> projector(const ProjectorSpec& spec) { return projector(spec.ket()); }

// Imperfect mode filtering: P -> (1 - eps) P + eps (I - P).
inline Operator<2> leaky_projector(const ProjectorSpec& spec, double crosstalk_eps) {
  const Operator<2> p = projector(spec);
  if (crosstalk_eps == 0.0) return p;
  return (1.0 - crosstalk_eps) * p + crosstalk_eps * (Operator<2>::identity() - p);
}

// tr(rho P_a (x) P_b), clamped to [0,1] against rounding.
inline double coincidence_probability(const DensityMatrix<4>& rho, const MeasurementSetting& s,
                                      double crosstalk_eps = 0.0) {
  if (!(crosstalk_eps >= 0.0 && crosstalk_eps <= 1.0))
    throw ValidationError("crosstalk_eps must lie in [0,1]");
  if (!s.side_b) throw ValidationError("two-photon setting needs a side_b projector");
  const Operator<4> p =
      tensor(leaky_projector(s.side_a, crosstalk_eps), leaky_projector(*s.side_b, crosstalk_eps));
  return std::clamp(expectation(rho, p), 0.0, 1.0);
}

inline double single_probability(const DensityMatrix<2>& rho, const ProjectorSpec& spec,
                                 double crosstalk_eps = 0.0) {
  return std::clamp(expectation(rho, leaky_projector(spec, crosstalk_eps)), 0.0, 1.0);
}

// Werner mixing toward the maximally mixed state: V rho + (1 - V) I/N.
template <int N>
DensityMatrix<N> apply_noise_state(const DensityMatrix<N>& rho, const NoiseModel& n) {
  validate(n);
  if (n.werner_v == 1.0) return rho;
  const CMatrix<N> mixed = CMatrix<N>::Identity() / static_cast<double>(N);
  return DensityMatrix<N>(CMatrix<N>(n.werner_v * rho.matrix() + (1.0 - n.werner_v) * mixed));
}

inline double expected_counts(double prob, double pair_rate, double duration_s) {
  if (!(prob >= 0.0) || !(pair_rate >= 0.0) || !(duration_s >= 0.0))
    throw ValidationError("expected_counts arguments must be >= 0");
  return prob * pair_rate * duration_s;
}

// Uncorrelated singles landing in the same window.
inline double accidental_coincidences(const NoiseModel& n, double duration_s) {
  validate(n);
  if (!(duration_s >= 0.0)) throw ValidationError("duration must be >= 0");
  return n.singles_a * n.singles_b * n.coincidence_window * duration_s;
}

struct NetCount {
  double value;
  bool clamped;
};

inline NetCount subtract_background(double raw, double accidental) {
  if (!(raw >= 0.0) || !(accidental >= 0.0))
    throw ValidationError("counts must be >= 0 for background subtraction");
  const double d = raw - accidental;
  return d < 0.0 ? NetCount{0.0, true} : NetCount{d, false};
}

// One measured setting. `expected` is the signal expectation only; the raw
// count is `sampled` when present, otherwise expected + accidental.
struct CoincidenceRecord {
  MeasurementSetting setting;
  double duration_s = 0.0;
  double expected = 0.0;
  std::optional<std::int64_t> sampled;
  double accidental = 0.0;

  double raw() const {
    return sampled ? static_cast<double>(*sampled) : expected + accidental;
  }
  NetCount net() const { return subtract_background(raw(), accidental); }

  friend bool operator==(const CoincidenceRecord&, const CoincidenceRecord&) = default;
};

}  // namespace oamx

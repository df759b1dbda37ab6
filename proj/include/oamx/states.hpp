#pragma once

// Named states: single OAM qubits, phase-mask theta states, the three Bell
// families (polarization, OAM-polarization hybrid, OAM-OAM), and the mode
// capacity of a pumped crystal.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "oamx/core.hpp"

namespace oamx {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr complex kI{0.0, 1.0};

// alpha|+l> + beta|-l>. The charge l is carried as a label only.
struct QubitSpec {
  complex alpha{1.0, 0.0};
  complex beta{0.0, 0.0};
  int l = 1;
};

inline Ket<2> make_qubit(const QubitSpec& spec) {
  Ket<2> k(std::array<complex, 2>{spec.alpha, spec.beta});
  if (std::abs(k.amplitudes().squaredNorm() - 1.0) > tol::kNormalized)
    throw ValidationError("qubit amplitudes violate |alpha|^2 + |beta|^2 = 1");
  return k;
}

// Phase-mask rotation angle. The state has period pi up to a global phase, so
// the reduced angle drives the physics and the raw angle is kept for reports.
class ThetaSetting {
 public:
  explicit ThetaSetting(double theta) : raw_(theta) {
    if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
    reduced_ = std::fmod(theta, std::numbers::pi);
    if (reduced_ < 0.0) reduced_ += std::numbers::pi;
  }

  double raw() const noexcept { return raw_; }
  double reduced() const noexcept { return reduced_; }

 private:
  double raw_;
  double reduced_;
};

// (e^{i theta}|R> + e^{-i theta}|L>)/sqrt2
inline Ket<2> theta_state(const ThetaSetting& t) {
  const double th = t.reduced();
  return Ket<2>(std::array<complex, 2>{kInvSqrt2 * std::polar(1.0, th),
                                       kInvSqrt2 * std::polar(1.0, -th)});
}

inline Ket<2> theta_state(double theta) { return theta_state(ThetaSetting(theta)); }

// Single-qubit basis vocabulary. Upper case labels are OAM states in (R, L),
// lower case labels are polarization states in (h, v):
//   R = (1,0)       L = (0,1)        h = (1,0)       v = (0,1)
//   H = (1,1)/√2    V = (1,-1)/√2    d = (1,1)/√2    a = (1,-1)/√2
//   D = (1,i)/√2    A = (1,-i)/√2    r = (1,i)/√2    l = (1,-i)/√2
inline std::optional<Ket<2>> named_qubit(std::string_view label) {
  using A = std::array<complex, 2>;
  if (label == "R" || label == "h") return Ket<2>(A{1.0, 0.0});
  if (label == "L" || label == "v") return Ket<2>(A{0.0, 1.0});
  if (label == "H" || label == "d") return Ket<2>(A{kInvSqrt2, kInvSqrt2});
  if (label == "V" || label == "a") return Ket<2>(A{kInvSqrt2, -kInvSqrt2});
  if (label == "D" || label == "r") return Ket<2>(A{kInvSqrt2, kInvSqrt2 * kI});
  if (label == "A" || label == "l") return Ket<2>(A{kInvSqrt2, -kInvSqrt2 * kI});
  return std::nullopt;
}

inline Ket<2> qubit_by_name(std::string_view label) {
  if (auto k = named_qubit(label)) return *k;
  throw ValidationError("unknown basis label '" + std::string(label) + "'");
}

enum class BellKind { PolPlus, PolMinus, HybridPlus, HybridMinus, OamPlus, OamMinus };

inline std::optional<BellKind> parse_bell_kind(std::string_view name) {
  if (name == "pol-plus") return BellKind::PolPlus;
  if (name == "pol-minus") return BellKind::PolMinus;
  if (name == "hybrid-plus") return BellKind::HybridPlus;
  if (name == "hybrid-minus") return BellKind::HybridMinus;
  if (name == "oam-plus") return BellKind::OamPlus;
  if (name == "oam-minus") return BellKind::OamMinus;
  return std::nullopt;
}

inline std::string_view to_string(BellKind kind) {
  switch (kind) {
    case BellKind::PolPlus: return "pol-plus";
    case BellKind::PolMinus: return "pol-minus";
    case BellKind::HybridPlus: return "hybrid-plus";
    case BellKind::HybridMinus: return "hybrid-minus";
    case BellKind::OamPlus: return "oam-plus";
    case BellKind::OamMinus: return "oam-minus";
  }
  return "unknown";
}

// Amplitudes in the documented two-body ordering:
//   pol    (hh, hv, vh, vv)   (|hv> ± |vh>)/√2
//   hybrid (hR, hL, vR, vL)   (|h,R> ± |v,L>)/√2
//   oam    (RR, RL, LR, LL)   (|R,L> ± |L,R>)/√2
inline Ket<4> bell_state(BellKind kind) {
  using A = std::array<complex, 4>;
  const double s = kInvSqrt2;
  switch (kind) {
    case BellKind::PolPlus: return Ket<4>(A{0.0, s, s, 0.0});
    case BellKind::PolMinus: return Ket<4>(A{0.0, s, -s, 0.0});
    case BellKind::HybridPlus: return Ket<4>(A{s, 0.0, 0.0, s});
    case BellKind::HybridMinus: return Ket<4>(A{s, 0.0, 0.0, -s});
    case BellKind::OamPlus: return Ket<4>(A{0.0, s, s, 0.0});
    case BellKind::OamMinus: return Ket<4>(A{0.0, s, -s, 0.0});
  }
  throw ValidationError("unknown Bell state kind");
}

inline Ket<4> bell_state(std::string_view name) {
  if (auto kind = parse_bell_kind(name)) return bell_state(*kind);
  throw ValidationError("unknown Bell state '" + std::string(name) + "'");
}

// Gaussian pump waist and the largest beam radius that still overlaps it,
// both in micrometres.
struct BeamGeometry {
  double w0_um = 0.0;
  double w_max_um = 0.0;
};

// A charge-l mode has radius sqrt(l+1)*w0; it fits while that is <= w_max.
inline int max_supported_charge(const BeamGeometry& g) {
  if (!(g.w0_um > 0.0) || !std::isfinite(g.w_max_um))
    throw ValidationError("beam waist must be positive");
  if (g.w_max_um < g.w0_um) throw ValidationError("w_max must be at least w0");
  const double ratio = g.w_max_um / g.w0_um;
  // The relative guard keeps exact ratios like 100/20 from flooring to 24.999...
  return static_cast<int>(std::floor(ratio * ratio - 1.0 + 1e-9));
}

// Number of charges -l_max..l_max, including the Gaussian l = 0.
inline int mode_capacity(const BeamGeometry& g) { return 2 * max_supported_charge(g) + 1; }

inline double mode_radius(double w0_um, int l) {
  return std::sqrt(static_cast<double>(std::abs(l) + 1)) * w0_um;
}

}  // namespace oamx

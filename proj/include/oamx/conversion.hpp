#pragma once

// Sum-frequency up-conversion of a single OAM mode pair, plus the loss
// bookkeeping of the real apparatus.

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oamx/core.hpp"

namespace oamx {

// xi_t is the dimensionless interaction area xi*t; l is conserved and only
// labels the mode pair.
struct SfgParams {
  double xi_t = 0.0;
  int l = 1;
};

inline void validate(const SfgParams& p) {
  if (!(p.xi_t >= 0.0) || !std::isfinite(p.xi_t)) throw ValidationError("xi_t must be >= 0");
}

// Heisenberg evolution of (a1, a2): input mode and converted mode.
//   a1(t) = a1 cos - a2 sin
//   a2(t) = a2 cos + a1 sin
inline Operator<2> sfg_mode_rotation(const SfgParams& p) {
  validate(p);
  const double c = std::cos(p.xi_t);
  const double s = std::sin(p.xi_t);
  CMatrix<2> m;
  m << c, -s, s, c;
  return Operator<2>(m);
}

// Fraction of input photons that emerge in the converted mode.
inline double conversion_efficiency(const SfgParams& p) {
  validate(p);
  const double s = std::sin(p.xi_t);
  return s * s;
}

template <int N>
struct Converted {
  DensityMatrix<N> state;
  double success_probability;
};

// Heralded conversion of one photon of `rho`. The process is OAM preserving,
// so the post-selected state is untouched; only the success rate changes.
// `subsystem` names the converted photon and does not affect the state.
template <int N>
Converted<N> apply_conversion(const DensityMatrix<N>& rho, double eta,
                              Subsystem subsystem = Subsystem::First) {
  (void)subsystem;
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("conversion eta must lie in [0,1]");
  return {rho, eta};
}

struct EfficiencyStage {
  std::string name;
  double eta = 1.0;
};

inline double efficiency_budget(std::span<const EfficiencyStage> stages) {
  double total = 1.0;
  for (const auto& s : stages) {
    if (!(s.eta >= 0.0 && s.eta <= 1.0))
      throw ValidationError("stage '" + s.name + "' efficiency must lie in [0,1]");
    total *= s.eta;
  }
  return total;
}

// Bandwidths in nm.
struct SpectralWindows {
  double bw_source_nm = 0.0;
  double bw_sfg_nm = 0.0;
};

// Flat-top spectra: the accepted fraction is the bandwidth ratio, capped at 1.
inline double spectral_acceptance(const SpectralWindows& w) {
  if (!(w.bw_source_nm > 0.0) || !(w.bw_sfg_nm > 0.0))
    throw ValidationError("spectral bandwidths must be positive");
  return std::min(1.0, w.bw_sfg_nm / w.bw_source_nm);
}

namespace presets {

// Signal photon in the qubit up-conversion runs.
inline std::vector<EfficiencyStage> signal_chain() {
  return {{"collection", 0.26},
          {"mode_conversion_and_transmission", 0.80},
          {"quantum_conversion", 0.002},
          {"mode_detection", 0.48},
          {"detector", 0.50}};
}

// Idler photon in the OAM-entanglement runs.
inline std::vector<EfficiencyStage> idler_chain() {
  return {{"collection", 0.26},
          {"mode_converter", 0.40},
          {"mode_detection", 0.50},
          {"detector", 0.20}};
}

inline constexpr double kLaserConversionEfficiency = 0.01;
inline constexpr SpectralWindows kSpectralWindows{2.5, 0.5};

}  // namespace presets

}  // namespace oamx

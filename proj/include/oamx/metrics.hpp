#pragma once

// Quantities derived from coincidence data: fringe visibility, the
// two-basis entanglement witness, CHSH correlations, and Poisson error bars
// by parametric bootstrap.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "oamx/core.hpp"
#include "oamx/measurement.hpp"
#include "oamx/random.hpp"

namespace oamx {

struct FringeScan {
  std::vector<double> angles;  // rad
  std::vector<double> counts;
  double duration_s = 0.0;
};

struct FringeFit {
  double visibility = 0.0;
  double phase = 0.0;  // rad, in (-pi, pi]
  double baseline = 0.0;
  double amplitude = 0.0;  // baseline * visibility before clamping
  double residual_norm = 0.0;
  bool clamped = false;
  bool degenerate = false;
  int iterations = 0;
};

inline void validate(const FringeScan& scan) {
  std::vector<std::string> issues;
  if (scan.angles.size() != scan.counts.size())
    issues.emplace_back("fringe angles and counts differ in length");
  if (scan.angles.size() < 5) issues.emplace_back("fringe scan needs at least 5 points");
  for (double c : scan.counts)
    if (!(c >= 0.0) || !std::isfinite(c)) {
      issues.emplace_back("fringe counts must be finite and >= 0");
      break;
    }
  if (!scan.angles.empty()) {
    const auto [lo, hi] = std::minmax_element(scan.angles.begin(), scan.angles.end());
    if (!(*hi - *lo >= std::numbers::pi - 1e-9))
      issues.emplace_back("fringe scan must span a full period of pi");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

// Least-squares fit of C(theta) = B (1 + V cos(2 theta - phi)). The linear
// quadrature fit (B, B V cos phi, B V sin phi) seeds Gauss-Newton on (B, V, phi).
inline FringeFit fit_fringe(const FringeScan& scan) {
  validate(scan);
  const Eigen::Index n = static_cast<Eigen::Index>(scan.angles.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = 2.0 * scan.angles[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(t);
    design(i, 2) = std::sin(t);
    y(i) = scan.counts[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d lin = design.colPivHouseholderQr().solve(y);

  FringeFit fit;
  double b = lin(0);
  double amp = std::hypot(lin(1), lin(2));
  const double scale = std::max(y.cwiseAbs().maxCoeff(), 1.0);
  if (!(b > 0.0) || amp <= 1e-9 * scale) {
    fit.baseline = std::max(b, 0.0);
    fit.degenerate = true;
    fit.residual_norm = (y - design * lin).norm();
    return fit;
  }
  double v = amp / b;
  double phi = std::atan2(lin(2), lin(1));

  auto residuals = [&](double bb, double vv, double pp) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = 2.0 * scan.angles[static_cast<std::size_t>(i)] - pp;
      r(i) = y(i) - bb * (1.0 + vv * std::cos(t));
    }
    return r;
  };

  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd jac(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = 2.0 * scan.angles[static_cast<std::size_t>(i)] - phi;
      jac(i, 0) = 1.0 + v * std::cos(t);
      jac(i, 1) = b * std::cos(t);
      jac(i, 2) = b * v * std::sin(t);
    }
    const Eigen::Vector3d step = jac.colPivHouseholderQr().solve(residuals(b, v, phi));
    b += step(0);
    v += step(1);
    phi += step(2);
    fit.iterations = it + 1;
    const double size = Eigen::Vector3d(b, v, phi).norm();
    if (step.norm() <= 1e-10 * std::max(size, 1.0)) break;
  }
  if (v < 0.0) {
    v = -v;
    phi += std::numbers::pi;
  }
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
  if (phi <= -std::numbers::pi) phi += 2.0 * std::numbers::pi;

  fit.baseline = b;
  fit.amplitude = b * v;
  fit.phase = phi;
  fit.residual_norm = residuals(b, v, phi).norm();
  fit.clamped = v > 1.0;
  fit.visibility = std::min(v, 1.0);
  return fit;
}

// W = V_d/a + V_r/l; separable states satisfy W <= 1.
inline double witness(double v_da, double v_rl) {
  if (!(v_da >= 0.0 && v_da <= 1.0) || !(v_rl >= 0.0 && v_rl <= 1.0))
    throw ValidationError("witness visibilities must lie in [0,1]");
  return v_da + v_rl;
}

// Counts in the order C(a, b), C(a + pi/2, b + pi/2), C(a + pi/2, b), C(a, b + pi/2).
inline double correlation_E(double c_ab, double c_ab_perp, double c_a_perp_b, double c_a_b_perp) {
  for (double c : {c_ab, c_ab_perp, c_a_perp_b, c_a_b_perp})
    if (!(c >= 0.0) || !std::isfinite(c))
      throw ValidationError("correlation counts must be finite and >= 0");
  const double total = c_ab + c_ab_perp + c_a_perp_b + c_a_b_perp;
  if (total == 0.0) throw UndefinedCorrelation("all four correlation counts are zero");
  return (c_ab + c_ab_perp - c_a_perp_b - c_a_b_perp) / total;
}

struct ChshSettings {
  double theta_a = 0.0;
  double theta_a_prime = std::numbers::pi / 4.0;
  double theta_b = std::numbers::pi / 8.0;
  double theta_b_prime = 3.0 * std::numbers::pi / 8.0;
};

struct ChshResult {
  double s = 0.0;
  double abs_s = 0.0;
  // E(a,b), E(a,b'), E(a',b), E(a',b')
  std::array<double, 4> correlations{};
};

// Sixteen settings: four per correlation, correlations in the order of
// ChshResult::correlations, each in the correlation_E argument order.
inline std::array<MeasurementSetting, 16> chsh_measurements(const ChshSettings& s) {
  const double q = std::numbers::pi / 2.0;
  const std::array<std::pair<double, double>, 4> pairs{
      {{s.theta_a, s.theta_b},
       {s.theta_a, s.theta_b_prime},
       {s.theta_a_prime, s.theta_b},
       {s.theta_a_prime, s.theta_b_prime}}};
  std::vector<MeasurementSetting> out;
  out.reserve(16);
  for (const auto& [a, b] : pairs) {
    out.push_back({ProjectorSpec::theta(a), ProjectorSpec::theta(b)});
    out.push_back({ProjectorSpec::theta(a + q), ProjectorSpec::theta(b + q)});
    out.push_back({ProjectorSpec::theta(a + q), ProjectorSpec::theta(b)});
    out.push_back({ProjectorSpec::theta(a), ProjectorSpec::theta(b + q)});
  }
  return {out[0], out[1], out[2],  out[3],  out[4],  out[5],  out[6],  out[7],
          out[8], out[9], out[10], out[11], out[12], out[13], out[14], out[15]};
}

// S = E(a,b) - E(a,b') + E(a',b) + E(a',b') from counts ordered as chsh_measurements.
inline ChshResult chsh_S(std::span<const double> counts) {
  if (counts.size() != 16) throw ValidationError("CHSH needs counts for all 16 settings");
  ChshResult r;
  for (std::size_t k = 0; k < 4; ++k)
    r.correlations[k] = correlation_E(counts[4 * k], counts[4 * k + 1], counts[4 * k + 2],
                                      counts[4 * k + 3]);
  r.s = r.correlations[0] - r.correlations[1] + r.correlations[2] + r.correlations[3];
  r.abs_s = std::abs(r.s);
  return r;
}

// Exact-probability route.
inline ChshResult chsh_S(const ChshSettings& s, const DensityMatrix<4>& rho,
                         double crosstalk_eps = 0.0) {
  const auto settings = chsh_measurements(s);
  std::array<double, 16> p{};
  for (std::size_t i = 0; i < 16; ++i)
    p[i] = coincidence_probability(rho, settings[i], crosstalk_eps);
  return chsh_S(p);
}

struct MetricWithError {
  double value = 0.0;
  double sigma = 0.0;
  int resamples = 0;
  int dropped = 0;

  friend bool operator==(const MetricWithError&, const MetricWithError&) = default;
};

inline constexpr int kMinResamples = 100;

// value = metric(counts); sigma = sample standard deviation of the metric over
// `resamples` redraws with every count replaced by Poisson(count). Resample r
// uses sub-stream r of `seed`. Resamples on which the metric throws are
// dropped; more than 10% dropped is an error.
template <class Metric>
MetricWithError poisson_error(Metric&& metric, std::span<const double> counts, int resamples,
                              std::uint64_t seed) {
  if (resamples < kMinResamples) throw ValidationError("poisson_error needs >= 100 resamples");
  for (double c : counts)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw ValidationError("poisson_error counts must be finite and >= 0");

  MetricWithError out;
  out.value = metric(std::span<const double>(counts));
  std::vector<double> redraw(counts.size());
  double mean = 0.0;
  double m2 = 0.0;
  int used = 0;
  for (int r = 0; r < resamples; ++r) {
    RandomStream rng(seed, static_cast<std::uint64_t>(r));
    for (std::size_t i = 0; i < counts.size(); ++i)
      redraw[i] = static_cast<double>(sample_poisson(counts[i], rng));
    double v;
    try {
      v = metric(std::span<const double>(redraw));
    } catch (const Error&) {
      ++out.dropped;
      continue;
    }
    if (!std::isfinite(v)) {
      ++out.dropped;
      continue;
    }
    ++used;
    const double d = v - mean;
    mean += d / used;
    m2 += d * (v - mean);
  }
  if (out.dropped * 10 > resamples)
    throw Error("poisson_error: metric failed on more than 10% of resamples");
  out.resamples = used;
  out.sigma = used > 1 ? std::sqrt(m2 / (used - 1)) : 0.0;
  return out;
}

}  // namespace oamx

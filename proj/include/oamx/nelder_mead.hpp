#pragma once

// Derivative-free simplex minimizer (Nelder-Mead with the dimension-adaptive
// coefficients of Gao & Han, 2012) and a deterministic multi-start driver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "oamx/errors.hpp"
#include "oamx/random.hpp"

namespace oamx {

struct NelderMeadOptions {
  double initial_step = 0.25;
  // Converged once a full sweep (n + 1 steps) lowers the best value by less
  // than this and the simplex values agree to the same tolerance.
  double f_tolerance = 1e-12;
  std::size_t max_evaluations = 100000;
  // Fresh simplices built around the best point after convergence; a restart
  // that fails to improve ends the run.
  int max_restarts = 4;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

template <class F>
NelderMeadResult nelder_mead_once(F& f, const Eigen::VectorXd& start, double step,
                                  const NelderMeadOptions& opt, std::size_t budget) {
  const int n = static_cast<int>(start.size());
  const double nd = static_cast<double>(n);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / nd;
  const double contract = 0.75 - 1.0 / (2.0 * nd);
  const double shrink = 1.0 - 1.0 / nd;

  NelderMeadResult res;
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)](i) += step;
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    p2.reserve(pts.size());
    v2.reserve(pts.size());
    for (auto i : order) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  sort_simplex();
  double sweep_start_best = vals.front();
  std::size_t steps_in_sweep = 0;
  const std::size_t sweep = static_cast<std::size_t>(n + 1);
  const std::size_t last = static_cast<std::size_t>(n);

  while (res.evaluations < budget) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < last; ++i) centroid += pts[i];
    centroid /= nd;

    const Eigen::VectorXd xr = centroid + reflect * (centroid - pts[last]);
    const double fr = eval(xr);
    bool do_shrink = false;
    if (fr < vals[0]) {
      const Eigen::VectorXd xe = centroid + expand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[last] = xe;
        vals[last] = fe;
      } else {
        pts[last] = xr;
        vals[last] = fr;
      }
    } else if (fr < vals[last - 1]) {
      pts[last] = xr;
      vals[last] = fr;
    } else if (fr < vals[last]) {
      const Eigen::VectorXd xc = centroid + contract * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[last] = xc;
        vals[last] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      const Eigen::VectorXd xc = centroid - contract * (centroid - pts[last]);
      const double fc = eval(xc);
      if (fc < vals[last]) {
        pts[last] = xc;
        vals[last] = fc;
      } else {
        do_shrink = true;
      }
    }
    if (do_shrink) {
      for (std::size_t i = 1; i < pts.size(); ++i) {
        pts[i] = pts[0] + shrink * (pts[i] - pts[0]);
        vals[i] = eval(pts[i]);
      }
    }
    sort_simplex();

    if (++steps_in_sweep == sweep) {
      const double improvement = sweep_start_best - vals.front();
      const double spread = vals.back() - vals.front();
      double diameter = 0.0;
      for (std::size_t i = 1; i < pts.size(); ++i)
        diameter = std::max(diameter, (pts[i] - pts[0]).lpNorm<Eigen::Infinity>());
      if ((improvement < opt.f_tolerance && spread < opt.f_tolerance) || diameter < 1e-15) {
        res.converged = true;
        break;
      }
      sweep_start_best = vals.front();
      steps_in_sweep = 0;
    }
  }
  res.x = pts.front();
  res.value = vals.front();
  return res;
}

}  // namespace detail

// Minimize f: Eigen::VectorXd -> double from `start`.
template <class F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& start,
                             const NelderMeadOptions& opt = {}) {
  if (start.size() < 1) throw ValidationError("nelder_mead needs at least one parameter");
  NelderMeadResult best =
      detail::nelder_mead_once(f, start, opt.initial_step, opt, opt.max_evaluations);
  std::size_t used = best.evaluations;
  double step = opt.initial_step;
  for (int r = 0; r < opt.max_restarts && best.converged && used < opt.max_evaluations; ++r) {
    step *= 0.1;
    auto again = detail::nelder_mead_once(f, best.x, std::max(step, 1e-6), opt,
                                          opt.max_evaluations - used);
    used += again.evaluations;
    const bool improved = again.value < best.value - opt.f_tolerance;
    if (again.value < best.value) {
      best.x = again.x;
      best.value = again.value;
    }
    best.converged = again.converged;
    if (!improved) break;
  }
  best.evaluations = used;
  return best;
}

struct MultiStartOptions {
  int starts = 8;
  std::uint64_t seed = 0x5eed;
  double perturbation = 0.3;
  NelderMeadOptions local;
};

struct MultiStartResult {
  NelderMeadResult best;
  int best_start = -1;
  int converged_starts = 0;
};

// Start 0 is `start` itself; start k > 0 adds Gaussian noise drawn from
// sub-stream k of the seed. The lowest value wins, ties go to the lower index.
// Throws ConvergenceError (with the best iterate) if no start converged.
template <class F>
MultiStartResult multi_start_minimize(F&& f, const Eigen::VectorXd& start,
                                      const MultiStartOptions& opt = {}) {
  if (opt.starts < 1) throw ValidationError("multi-start needs at least one start");
  MultiStartResult out;
  for (int k = 0; k < opt.starts; ++k) {
    Eigen::VectorXd x0 = start;
    if (k > 0) {
      RandomStream rng(opt.seed, static_cast<std::uint64_t>(k));
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += opt.perturbation * rng.normal();
    }
    auto r = nelder_mead(f, x0, opt.local);
    if (r.converged) ++out.converged_starts;
    if (r.value < out.best.value) {
      out.best = std::move(r);
      out.best_start = k;
    }
  }
  if (out.converged_starts == 0) {
    std::vector<double> x(out.best.x.data(), out.best.x.data() + out.best.x.size());
    throw ConvergenceError("no multi-start run converged", std::move(x), out.best.value);
  }
  return out;
}

}  // namespace oamx

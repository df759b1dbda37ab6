#include <catch_amalgamated.hpp>

#include <cmath>

#include "oamx/nelder_mead.hpp"

using namespace oamx;
using Catch::Approx;

namespace {

double rosenbrock(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    s += 100.0 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(1.0 - x(i), 2);
  return s;
}

}  // namespace

TEST_CASE("nelder_mead finds a quadratic minimum", "[nelder_mead]") {
  auto f = [](const Eigen::VectorXd& x) { return (x - Eigen::Vector3d(1, -2, 3)).squaredNorm(); };
  const auto r = nelder_mead(f, Eigen::VectorXd::Zero(3));
  CHECK(r.converged);
  CHECK((r.x - Eigen::Vector3d(1, -2, 3)).norm() < 1e-5);
  CHECK(r.value < 1e-10);
}

TEST_CASE("nelder_mead solves Rosenbrock in four dimensions", "[nelder_mead]") {
  Eigen::VectorXd start(4);
  start << -1.2, 1.0, -1.2, 1.0;
  const auto r = nelder_mead(rosenbrock, start);
  CHECK(r.converged);
  CHECK(r.value < 1e-8);
  CHECK((r.x - Eigen::VectorXd::Ones(4)).norm() < 1e-3);
}

TEST_CASE("nelder_mead treats NaN as +infinity", "[nelder_mead]") {
  auto f = [](const Eigen::VectorXd& x) {
    return x(0) < 0.0 ? std::nan("") : (x(0) - 2.0) * (x(0) - 2.0);
  };
  const auto r = nelder_mead(f, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(r.x(0) == Approx(2.0).margin(1e-5));
}

TEST_CASE("evaluation budget is respected", "[nelder_mead]") {
  NelderMeadOptions opt;
  opt.max_evaluations = 50;
  Eigen::VectorXd start(4);
  start << -1.2, 1.0, -1.2, 1.0;
  const auto r = nelder_mead(rosenbrock, start, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= 50);
}

TEST_CASE("multi_start_minimize is deterministic and reports the winner", "[nelder_mead]") {
  // Two wells; the deeper one sits at x = 3.
  auto f = [](const Eigen::VectorXd& x) {
    return std::min((x(0) + 1) * (x(0) + 1), (x(0) - 3) * (x(0) - 3) - 0.5) + x(1) * x(1);
  };
  MultiStartOptions opt;
  opt.perturbation = 3.0;
  const auto a = multi_start_minimize(f, Eigen::Vector2d(-1, 0), opt);
  const auto b = multi_start_minimize(f, Eigen::Vector2d(-1, 0), opt);
  CHECK(a.best.x == b.best.x);
  CHECK(a.best_start == b.best_start);
  CHECK(a.best.x(0) == Approx(3.0).margin(1e-4));
  CHECK(a.converged_starts >= 1);
}

TEST_CASE("multi_start_minimize throws with the best iterate when nothing converges",
          "[nelder_mead]") {
  MultiStartOptions opt;
  opt.starts = 2;
  opt.local.max_evaluations = 20;
  Eigen::VectorXd start(4);
  start << -1.2, 1.0, -1.2, 1.0;
  try {
    multi_start_minimize(rosenbrock, start, opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_params().size() == 4);
    CHECK(std::isfinite(e.best_value()));
  }
}

TEST_CASE("invalid optimizer arguments", "[nelder_mead]") {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  CHECK_THROWS_AS(nelder_mead(f, Eigen::VectorXd()), ValidationError);
  MultiStartOptions opt;
  opt.starts = 0;
  CHECK_THROWS_AS(multi_start_minimize(f, Eigen::VectorXd::Zero(2), opt), ValidationError);
}

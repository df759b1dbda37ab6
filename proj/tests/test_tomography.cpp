#include <catch_amalgamated.hpp>

#include "oamx/tomography.hpp"
#include "support.hpp"

using namespace oamx;
using Catch::Approx;
using testing::max_abs_diff;

namespace {

const CMatrix<2> kRhoR{{1, 0}, {0, 0}};
const CMatrix<2> kRhoL{{0, 0}, {0, 1}};
const CMatrix<2> kRhoH{{0.5, 0.5}, {0.5, 0.5}};
const CMatrix<2> kRhoD{{0.5, -0.5 * kI}, {0.5 * kI, 0.5}};

}  // namespace

TEST_CASE("stokes_reconstruct examples", "[tomography]") {
  CHECK(max_abs_diff<2>(stokes_reconstruct(1, 0, 0.5, 0.5).matrix(), kRhoR) < 1e-15);
  CHECK(max_abs_diff<2>(stokes_reconstruct(0.5, 0.5, 1, 0.5).matrix(), kRhoH) < 1e-15);
  CHECK(max_abs_diff<2>(stokes_reconstruct(0.5, 0.5, 0.5, 0.5).matrix(),
                        CMatrix<2>::Identity() / 2.0) < 1e-15);
  CHECK(max_abs_diff<2>(stokes_reconstruct(0.5, 0.5, 0.5, 1).matrix(), kRhoD) < 1e-15);
}

TEST_CASE("stokes_reconstruct validates inputs and may leave the PSD cone", "[tomography]") {
  CHECK_THROWS_AS(stokes_reconstruct(1.2, 0, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(stokes_reconstruct(0.7, 0.7, 0.5, 0.5), ValidationError);
  const auto op = stokes_reconstruct(1, 0, 1, 0.5);
  CHECK(std::abs(op.trace() - complex(1.0)) < 1e-15);
  CHECK_FALSE(is_physical<2>(op.matrix()));
}

TEST_CASE("qubit_probabilities examples", "[tomography]") {
  const auto a = qubit_probabilities({1, 0, 0, 0});
  CHECK(a[0] == Approx(1.0));
  CHECK(a[1] == Approx(0.0).margin(1e-15));
  CHECK(a[2] == Approx(0.5));
  CHECK(a[3] == Approx(0.5));
  const auto b = qubit_probabilities({0, 1, 0, 0});
  CHECK(b[0] == Approx(0.0).margin(1e-15));
  CHECK(b[1] == Approx(1.0));
  const auto c = qubit_probabilities({1, 1, 0, 0});
  for (double p : c) CHECK(p == Approx(0.5));
  CHECK(max_abs_diff<2>(qubit_density({1, 1, 0, 0}).matrix(), CMatrix<2>::Identity() / 2.0) <
        1e-15);
  CHECK_THROWS_AS(qubit_probabilities({0, 0, 0, 0}), ValidationError);
}

TEST_CASE("tomography_likelihood is non-negative and zero on exact data", "[tomography]") {
  const std::array<double, 4> p{0.7, 0.3, 0.6, 0.4};
  const std::array<double, 4> exact{700, 300, 600, 400};
  CHECK(tomography_likelihood(p, exact, 1000) == 0.0);
  const std::array<double, 4> off{710, 290, 600, 400};
  CHECK(tomography_likelihood(p, off, 1000) > 0.0);
  const std::array<double, 4> zero_p{1.0, 0.0, 0.5, 0.5};
  CHECK(std::isfinite(tomography_likelihood(zero_p, exact, 1000)));
}

TEST_CASE("qubit_mle examples", "[tomography]") {
  const auto r = qubit_mle({{1000, 0, 500, 500}});
  CHECK(trace_distance<2>(r.rho.matrix(), kRhoR) < 1e-4);
  const auto h = qubit_mle({{500, 500, 1000, 500}});
  CHECK(trace_distance<2>(h.rho.matrix(), kRhoH) < 1e-4);
  const auto m = qubit_mle({{500, 500, 500, 500}});
  CHECK(trace_distance<2>(m.rho.matrix(), CMatrix<2>::Identity() / 2.0) < 1e-4);
  CHECK(r.params[0] >= 0.0);
  CHECK(r.params[1] >= 0.0);
}

TEST_CASE("qubit_mle rejects empty or negative counts", "[tomography]") {
  CHECK_THROWS_AS(qubit_mle({{0, 0, 0, 0}}), ValidationError);
  CHECK_THROWS_AS(qubit_mle({{0, 0, 5, 5}}), ValidationError);
  CHECK_THROWS_AS(qubit_mle({{-1, 5, 5, 5}}), ValidationError);
}

TEST_CASE("ideal qubit reconstructions match the textbook matrices", "[tomography]") {
  const std::array<std::pair<const char*, CMatrix<2>>, 4> cases{
      {{"R", kRhoR}, {"L", kRhoL}, {"H", kRhoH}, {"D", kRhoD}}};
  for (const auto& [label, expected] : cases) {
    const auto counts = forward_model_qubit(density_from_ket(qubit_by_name(label)), 1e4);
    const auto fit = qubit_mle(counts);
    CHECK(max_abs_diff<2>(fit.rho.matrix(), expected) < 1e-4);
  }
}

TEST_CASE("qubit oracle round trip on random states", "[tomography][property]") {
  RandomStream rng(37, 0);
  for (int k = 0; k < 30; ++k) {
    const auto truth = k % 2 == 0 ? density_from_ket(testing::random_ket<2>(rng))
                                  : testing::random_mixed<2>(rng);
    const auto fit = qubit_mle(forward_model_qubit(truth, 1e4));
    CHECK(trace_distance(fit.rho, truth) < 1e-3);
  }
}

TEST_CASE("Stokes inversion and MLE agree when the inversion is physical", "[tomography][property]") {
  RandomStream rng(41, 0);
  for (int k = 0; k < 20; ++k) {
    const auto truth = testing::random_mixed<2>(rng);
    const auto p = qubit_tomography_probabilities(truth);
    const double p_d = single_probability(truth, ProjectorSpec::label("D"));
    const auto linear = stokes_reconstruct(p[0], p[1], p[2], p_d);
    REQUIRE(is_physical<2>(linear.matrix()));
    const auto fit = qubit_mle(forward_model_qubit(truth, 1e4));
    CHECK(trace_distance<2>(fit.rho.matrix(), linear.matrix()) < 1e-3);
  }
}

TEST_CASE("qubit_mle is deterministic", "[tomography]") {
  const QubitTomographyCounts data{{812, 188, 634, 402}};
  const auto a = qubit_mle(data);
  const auto b = qubit_mle(data);
  CHECK(a.params == b.params);
  CHECK(a.rho.matrix() == b.rho.matrix());
}

TEST_CASE("two_qubit_mle examples", "[tomography]") {
  const auto pol = polarization_tomography_bases();
  const auto oam = oam_tomography_bases();

  const auto hybrid = bell_state(BellKind::HybridPlus);
  const auto a = two_qubit_mle(forward_model_two_qubit(density_from_ket(hybrid), pol, oam, 1e4));
  CHECK(fidelity(a.rho, hybrid) >= 0.9999);

  const auto product = tensor(qubit_by_name("h"), qubit_by_name("R"));
  const auto b = two_qubit_mle(forward_model_two_qubit(density_from_ket(product), pol, oam, 1e4));
  CHECK(fidelity(b.rho, product) >= 0.9999);

  const auto phi = bell_state(BellKind::OamMinus);
  NoiseModel n;
  n.werner_v = 0.845;
  const auto werner = apply_noise_state(density_from_ket(phi), n);
  const auto c = two_qubit_mle(forward_model_two_qubit(werner, oam, oam, 1e4));
  CHECK(fidelity(c.rho, phi) == Approx(0.884).margin(0.002));
  CHECK(is_physical<4>(c.rho.matrix()));
}

TEST_CASE("two_qubit_mle rejects incomplete bases and empty counts", "[tomography]") {
  const auto pol = polarization_tomography_bases();
  const auto incomplete = specs({"h", "v", "d", "a"});
  const auto rho = density_from_ket(bell_state(BellKind::HybridPlus));
  auto counts = forward_model_two_qubit(rho, pol, oam_tomography_bases(), 1e3);
  counts.bases_a = incomplete;
  CHECK_THROWS_AS(two_qubit_mle(counts), ValidationError);

  TwoQubitTomographyCounts empty{pol, oam_tomography_bases(), {}};
  CHECK_THROWS_AS(two_qubit_mle(empty), ValidationError);
}

TEST_CASE("two-qubit oracle round trip on random states", "[tomography][property]") {
  RandomStream rng(43, 0);
  const auto pol = polarization_tomography_bases();
  const auto oam = oam_tomography_bases();
  for (int k = 0; k < 6; ++k) {
    const auto truth = k % 2 == 0 ? density_from_ket(testing::random_ket<4>(rng))
                                  : testing::random_mixed<4>(rng);
    const auto fit = two_qubit_mle(forward_model_two_qubit(truth, pol, oam, 1e4));
    CHECK(trace_distance(fit.rho, truth) < 5e-3);
  }
}

TEST_CASE("two_qubit_density is physical for arbitrary parameters", "[tomography][property]") {
  RandomStream rng(47, 0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> t(16);
    for (auto& x : t) x = rng.normal();
    CHECK(is_physical<4>(two_qubit_density(t).matrix()));
  }
  CHECK_THROWS_AS(two_qubit_density(std::vector<double>(16, 0.0)), ValidationError);
  CHECK_THROWS_AS(two_qubit_density(std::vector<double>(3, 1.0)), ValidationError);
}

TEST_CASE("TwoQubitTomographyCounts orders settings a-major", "[tomography]") {
  const TwoQubitTomographyCounts c{polarization_tomography_bases(), oam_tomography_bases(), {}};
  const auto s = c.setting(6);
  CHECK(s.side_a == ProjectorSpec::label("v"));
  CHECK(s.side_b == ProjectorSpec::label("H"));
}

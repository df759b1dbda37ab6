#include <catch_amalgamated.hpp>

#include <numbers>

#include "oamx/measurement.hpp"
#include "oamx/states.hpp"
#include "support.hpp"

using namespace oamx;
using Catch::Approx;
using testing::max_abs_diff;

namespace {

// |<a|b>|^2, insensitive to global phase.
double overlap(const Ket<2>& a, const Ket<2>& b) { return std::norm(a.inner(b)); }

}  // namespace

TEST_CASE("make_qubit examples", "[states]") {
  CHECK(overlap(make_qubit({1.0, 0.0}), qubit_by_name("R")) == Approx(1.0));
  const auto h = make_qubit({kInvSqrt2, kInvSqrt2});
  CHECK((h.amplitudes() - qubit_by_name("H").amplitudes()).norm() < 1e-15);
  const auto d = make_qubit({kInvSqrt2, kInvSqrt2 * kI});
  CHECK((d.amplitudes() - qubit_by_name("D").amplitudes()).norm() < 1e-15);
}

TEST_CASE("make_qubit rejects unnormalized amplitudes", "[states]") {
  CHECK_THROWS_AS(make_qubit({1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(make_qubit({0.0, 0.0}), ValidationError);
}

TEST_CASE("theta_state examples", "[states]") {
  CHECK((theta_state(0.0).amplitudes() - qubit_by_name("H").amplitudes()).norm() < 1e-15);
  CHECK(overlap(theta_state(std::numbers::pi / 2), qubit_by_name("V")) == Approx(1.0).margin(1e-15));
  CHECK(overlap(theta_state(std::numbers::pi / 4), qubit_by_name("A")) == Approx(1.0).margin(1e-15));
}

TEST_CASE("ThetaSetting keeps the raw angle and reduces mod pi", "[states]") {
  const ThetaSetting t(7.0);
  CHECK(t.raw() == 7.0);
  CHECK(t.reduced() == Approx(7.0 - 2 * std::numbers::pi));
  CHECK(ThetaSetting(-0.5).reduced() == Approx(std::numbers::pi - 0.5));
  CHECK_THROWS_AS(ThetaSetting(std::numeric_limits<double>::infinity()), ValidationError);
}

TEST_CASE("theta_state is pi-periodic as a density matrix", "[states][property]") {
  RandomStream rng(9, 0);
  for (int k = 0; k < 100; ++k) {
    const double th = (rng.uniform() - 0.5) * 20.0;
    CHECK(max_abs_diff<2>(density_from_ket(theta_state(th)).matrix(),
                          density_from_ket(theta_state(th + std::numbers::pi)).matrix()) < 1e-12);
  }
}

TEST_CASE("bell_state examples", "[states]") {
  const double s = kInvSqrt2;
  const auto om = bell_state("oam-minus");
  CHECK((om.amplitudes() - CVector<4>(0.0, s, -s, 0.0)).norm() < 1e-15);
  const auto hp = bell_state("hybrid-plus");
  CHECK((hp.amplitudes() - CVector<4>(s, 0.0, 0.0, s)).norm() < 1e-15);
  CHECK(fidelity(density_from_ket(bell_state("oam-minus")), bell_state("oam-plus")) ==
        Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(bell_state("oam-zero"), ValidationError);
}

TEST_CASE("every Bell state has maximally mixed marginals", "[states][property]") {
  const auto half = DensityMatrix<2>::maximally_mixed().matrix();
  for (auto kind : {BellKind::PolPlus, BellKind::PolMinus, BellKind::HybridPlus,
                    BellKind::HybridMinus, BellKind::OamPlus, BellKind::OamMinus}) {
    const auto rho = density_from_ket(bell_state(kind));
    CHECK(max_abs_diff<2>(partial_trace(rho, Subsystem::First).matrix(), half) < 1e-12);
    CHECK(max_abs_diff<2>(partial_trace(rho, Subsystem::Second).matrix(), half) < 1e-12);
    CHECK(parse_bell_kind(to_string(kind)) == kind);
  }
}

TEST_CASE("product theta states on Phi-minus follow the sin^2 fringe law", "[states][property]") {
  const auto phi = bell_state(BellKind::OamMinus);
  RandomStream rng(13, 0);
  for (int k = 0; k < 100; ++k) {
    const double a = rng.uniform() * 2 * std::numbers::pi;
    const double b = rng.uniform() * 2 * std::numbers::pi;
    const double p = std::norm(tensor(theta_state(a), theta_state(b)).inner(phi));
    const double s = std::sin(a - b);
    CHECK(std::abs(p - s * s / 2) < 1e-10);
  }
}

TEST_CASE("mode_capacity examples", "[states]") {
  CHECK(max_supported_charge({20.0, 100.0}) == 24);
  CHECK(mode_capacity({20.0, 100.0}) == 49);
  CHECK(mode_capacity({20.0, 20.0}) == 1);
  CHECK(mode_capacity({20.0, 500.0}) == 1249);
  CHECK_THROWS_AS(mode_capacity({20.0, 10.0}), ValidationError);
  CHECK_THROWS_AS(mode_capacity({0.0, 10.0}), ValidationError);
  CHECK(mode_radius(20.0, 24) == Approx(100.0));
}

TEST_CASE("mode_capacity is monotone in both radii", "[states][property]") {
  int previous = 0;
  for (double wm = 20.0; wm <= 400.0; wm += 3.7) {
    const int c = mode_capacity({20.0, wm});
    CHECK(c >= previous);
    previous = c;
  }
  previous = mode_capacity({1.0, 100.0});
  for (double w0 = 1.0; w0 <= 100.0; w0 += 1.3) {
    const int c = mode_capacity({w0, 100.0});
    CHECK(c <= previous);
    previous = c;
  }
}

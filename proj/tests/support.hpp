#pragma once

// Seeded random states for property tests.

#include <cmath>
#include <cstdint>

#include "oamx/core.hpp"
#include "oamx/random.hpp"

namespace oamx::testing {

template <int N>
Ket<N> random_ket(RandomStream& rng) {
  CVector<N> v;
  for (int i = 0; i < N; ++i) v(i) = complex(rng.normal(), rng.normal());
  return Ket<N>::normalized(v);
}

// Mixture of three random pure states with random weights.
template <int N>
DensityMatrix<N> random_mixed(RandomStream& rng) {
  CMatrix<N> m = CMatrix<N>::Zero();
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double w = rng.uniform() + 0.05;
    const auto psi = random_ket<N>(rng);
    m += w * density_from_ket(psi).matrix();
    total += w;
  }
  return DensityMatrix<N>(CMatrix<N>(m / total));
}

template <int N>
double max_abs_diff(const CMatrix<N>& a, const CMatrix<N>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oamx::testing

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oamx/random.hpp"

using namespace oamx;

namespace {

struct Moments {
  double mean;
  double variance;
};

Moments moments(double expected, int n, std::uint64_t seed) {
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(sample_counts(expected, seed, static_cast<std::uint64_t>(i)));
    const double d = x - mean;
    mean += d / (i + 1);
    m2 += d * (x - mean);
  }
  return {mean, m2 / (n - 1)};
}

}  // namespace

TEST_CASE("zero mean always samples zero", "[random]") {
  for (std::uint64_t i = 0; i < 100; ++i) CHECK(sample_counts(0.0, 1, i) == 0);
}

TEST_CASE("Poisson mean and variance at 500", "[random]") {
  const auto m = moments(500.0, 100000, 2024);
  CHECK(std::abs(m.mean - 500.0) < 5.0);
  CHECK(std::abs(m.variance - 500.0) < 15.0);
}

TEST_CASE("Poisson moments on both sides of the algorithm switch", "[random]") {
  for (double lambda : {0.3, 4.0, 29.5, 30.0, 75.0, 1e4}) {
    const auto m = moments(lambda, 40000, 99);
    // Five standard errors on the mean; variance within 5%.
    CHECK(std::abs(m.mean - lambda) < 5.0 * std::sqrt(lambda / 40000.0));
    CHECK(std::abs(m.variance / lambda - 1.0) < 0.05);
  }
}

TEST_CASE("small-mean probabilities match the Poisson pmf", "[random]") {
  const double lambda = 2.0;
  const int n = 200000;
  std::vector<int> hist(8, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = sample_counts(lambda, 5, static_cast<std::uint64_t>(i));
    if (k < 8) ++hist[static_cast<std::size_t>(k)];
  }
  double pmf = std::exp(-lambda);
  for (int k = 0; k < 8; ++k) {
    if (k > 0) pmf *= lambda / k;
    const double sigma = std::sqrt(pmf * (1 - pmf) / n);
    CHECK(std::abs(hist[static_cast<std::size_t>(k)] / static_cast<double>(n) - pmf) < 5 * sigma);
  }
}

TEST_CASE("seeded sampling is bit reproducible", "[random]") {
  for (std::uint64_t i = 0; i < 50; ++i) {
    CHECK(sample_counts(123.4, 77, i) == sample_counts(123.4, 77, i));
    CHECK(sample_counts(3.2, 77, i) == sample_counts(3.2, 77, i));
  }
  RandomStream a(1, 2);
  RandomStream b(1, 2);
  for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("sub-streams and named seeds differ", "[random]") {
  CHECK(substream_seed(1, 0) != substream_seed(1, 1));
  CHECK(substream_seed(1, 0) != substream_seed(2, 0));
  CHECK(derive_seed(1, "records") != derive_seed(1, "bootstrap/S/raw"));
  static_assert(hash_label("") == 0xcbf29ce484222325ull);
}

TEST_CASE("sample_poisson rejects invalid means", "[random]") {
  RandomStream rng(0, 0);
  CHECK_THROWS_AS(sample_poisson(-1.0, rng), ValidationError);
  CHECK_THROWS_AS(sample_poisson(std::nan(""), rng), ValidationError);
}

TEST_CASE("uniform stays in [0,1)", "[random]") {
  RandomStream rng(8, 8);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

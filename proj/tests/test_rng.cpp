#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "spdchar/rng.hpp"

using spdchar::derive_seed;
using spdchar::Rng;

TEST_CASE("same seed, same stream; different seed, different stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("derive_seed follows the documented rule") {
  const std::uint64_t parent = 123456789;
  CHECK(derive_seed(parent, 0) == spdchar::mix64(parent + 0x9E3779B97F4A7C15ULL));
  CHECK(derive_seed(parent, 5) == spdchar::mix64(parent + 0x9E3779B97F4A7C15ULL * 6));
  CHECK(derive_seed(parent, {2, 7}) == derive_seed(derive_seed(parent, 2), 7));
  CHECK(derive_seed(parent, 0) != derive_seed(parent, 1));
}

TEST_CASE("uniform draws: range, mean and variance") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - mean * mean == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("uniform draws pass a Kolmogorov-Smirnov test") {
  Rng rng(99);
  std::vector<double> x(20000);
  for (double& v : x) v = rng.uniform();
  std::sort(x.begin(), x.end());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max({d, std::abs(x[i] - double(i) / x.size()), std::abs(x[i] - double(i + 1) / x.size())});
  }
  // 1% critical value is 1.63 / sqrt(n).
  CHECK(d < 1.63 / std::sqrt(double(x.size())));
}

TEST_CASE("normal draws have zero mean, unit variance and light tails") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0, quad = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
    quad += z * z * z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.015));
  CHECK(quad / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("poisson draws match mean and variance across both samplers") {
  for (double lambda : {0.5, 3.0, 9.5, 10.0, 25.0, 400.0, 1600.0}) {
    CAPTURE(lambda);
    Rng rng(static_cast<std::uint64_t>(lambda * 1000));
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = rng.poisson(lambda);
      REQUIRE(k >= 0);
      sum += double(k);
      sq += double(k) * double(k);
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean - lambda) < 5.0 * std::sqrt(lambda / n));
    CHECK(var == doctest::Approx(lambda).epsilon(0.03));
  }
}

TEST_CASE("poisson of zero mean is always zero") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
}

#include "liketrial/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace liketrial;

TEST_SUITE("random") {
  TEST_CASE("derive_seed is pure and spreads nearby inputs") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t master : {0ull, 1ull, 2ull, 42ull}) {
      for (std::uint64_t i = 0; i < 2000; ++i) seen.insert(derive_seed(master, i));
    }
    CHECK(seen.size() == 8000);
  }

  TEST_CASE("streams are reproducible") {
    RandomStream a = RandomStream::substream(7, 3);
    RandomStream b = RandomStream::substream(7, 3);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.standard_normal() == b.standard_normal());
    RandomStream c = RandomStream::substream(7, 4);
    RandomStream d = RandomStream::substream(7, 3);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) equal += c.standard_normal() == d.standard_normal() ? 1 : 0;
    CHECK(equal == 0);
  }

  TEST_CASE("uniforms lie strictly inside (0, 1)") {
    RandomStream s(123);
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = s.uniform_open();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    CHECK(lo < 1e-3);
    CHECK(hi > 1.0 - 1e-3);
  }

  TEST_CASE("normal variates pass a Kolmogorov-Smirnov test against the oracle cdf") {
    constexpr int kDraws = 100000;
    RandomStream s = RandomStream::substream(1, 0);
    std::vector<double> xs(kDraws);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double& x : xs) {
      x = s.standard_normal();
      sum += x;
      sum_sq += x * x;
    }
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double f = static_cast<double>(oracle::norm_cdf(xs[static_cast<std::size_t>(i)]));
      d = std::max({d, f - static_cast<double>(i) / kDraws, static_cast<double>(i + 1) / kDraws - f});
    }
    // 1% critical value of the KS statistic: 1.628 / sqrt(N).
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(kDraws)));
    const double mean = sum / kDraws;
    const double var = sum_sq / kDraws - mean * mean;
    CHECK(std::fabs(mean) <= 0.02);
    CHECK(std::fabs(var - 1.0) <= 0.02);
  }
}

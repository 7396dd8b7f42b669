#include <doctest.h>

#include <cmath>

#include "helson/parallel.hpp"

using namespace helson;

TEST_CASE("block pairwise sum is bitwise identical across execution modes") {
  const auto term = [](std::int64_t i) {
    return std::sin(0.001 * static_cast<double>(i + 1)) /
           static_cast<double>(i + 1);
  };
  for (const std::int64_t n : {1, 7, 4096, 4097, 100000}) {
    const double serial = block_pairwise_sum(n, Exec::Serial, term);
    const double parallel = block_pairwise_sum(n, Exec::Parallel, term);
    CHECK(serial == parallel);
  }
}

TEST_CASE("pairwise sum matches a compensated reference") {
  const std::int64_t n = 1 << 20;
  const double got =
      block_pairwise_sum(n, Exec::Parallel, [](std::int64_t i) {
        return 1.0 / static_cast<double>(i + 1);
      });
  // Kahan reference
  double sum = 0.0, c = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double y = 1.0 / static_cast<double>(i + 1) - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  CHECK(got == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("parallel_for covers the range exactly once") {
  std::vector<int> hits(1000, 0);
  parallel_for(0, 1000, Exec::Parallel,
               [&](std::int64_t i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (const int h : hits) CHECK(h == 1);
}

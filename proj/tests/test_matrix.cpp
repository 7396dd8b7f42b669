#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helson/matrix.hpp"
#include "helson/spectral.hpp"

using namespace helson;
using namespace helson::measure;
using namespace helson::matrix;

namespace {

MeasureSpec leb() { return MeasureSpec::single(PowerDensity{0.0}); }
MeasureSpec delta(double c, double w = 1.0) {
  return MeasureSpec::single(PointMass{c, w});
}

}  // namespace

TEST_CASE("build_truncation basics") {
  // Lebesgue, N=1: single entry mu^(ln 4)/2 = 1/(2 ln 4)
  const auto t1 = build_truncation(leb(), 1);
  CHECK(t1.at(2, 2) == doctest::Approx(0.36067376022224085).epsilon(1e-15));

  // zero measure: zero matrix
  const auto t0 = build_truncation(MeasureSpec{}, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(t0.entries.at(i, j) == 0.0);

  // point mass at 1/2: entries (mn)^{-1/2-1/2} = outer product of 1/m
  const auto tp = build_truncation(delta(0.5), 6);
  for (std::int64_t m = 2; m <= 7; ++m)
    for (std::int64_t n = 2; n <= 7; ++n)
      CHECK(tp.at(m, n) == doctest::Approx(1.0 / (double(m) * double(n)))
                               .epsilon(1e-14));

  CHECK_THROWS_AS(build_truncation(delta(0.0), 4), std::invalid_argument);
}

TEST_CASE("entry examples and bit-consistency with build") {
  CHECK(entry(delta(1.0), 2, 2) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(entry(MeasureSpec::single(ExponentialDensity{0.0}), 2, 3) ==
        doctest::Approx(0.22784770917926217).epsilon(1e-14));

  const MeasureSpec spec = MeasureSpec::single(ExponentialDensity{1.0});
  const auto t = build_truncation(spec, 24);
  for (std::int64_t m = 2; m <= 25; ++m)
    for (std::int64_t n = m; n <= 25; ++n)
      CHECK(t.at(m, n) == entry(spec, m, n));

  // diagonal entry equals mu^(2 ln m)/m
  for (std::int64_t m = 2; m <= 25; ++m)
    CHECK(t.at(m, m) ==
          laplace(spec, log_product(m, m)).value / static_cast<double>(m));
}

TEST_CASE("symmetry, finiteness, nonnegativity") {
  std::vector<MeasureSpec> specs = {leb(), delta(0.3, 2.0),
                                    MeasureSpec::single(LogDensity{}),
                                    MeasureSpec::single(PowerDensity{-0.5})};
  for (const auto& spec : specs) {
    const auto t = build_truncation(spec, 16);
    CHECK(t.entries.max_asymmetry() == 0.0);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        CHECK(std::isfinite(t.entries.at(i, j)));
        CHECK(t.entries.at(i, j) >= 0.0);
      }
  }
}

TEST_CASE("build is bitwise identical across execution modes") {
  const MeasureSpec spec = leb();
  const auto serial = build_truncation(spec, 64, 1e-10, Exec::Serial);
  const auto parallel = build_truncation(spec, 64, 1e-10, Exec::Parallel);
  CHECK(serial.entries.data() == parallel.entries.data());
}

TEST_CASE("rank_one_gram: single point mass") {
  const int n = 100;
  const auto g = rank_one_gram(delta(0.5), n);
  REQUIRE(g.gram.size() == 1);
  double direct = 0.0;
  for (int m = n + 1; m >= 2; --m) direct += std::pow(m, -2.0);
  CHECK(g.gram.at(0, 0) == doctest::Approx(direct).epsilon(1e-14));

  // N -> infinity limit is zeta(2) - 1
  const auto big = rank_one_gram(delta(0.5), 200000);
  CHECK(big.gram.at(0, 0) ==
        doctest::Approx(0.6449340668482264).epsilon(1e-5));

  // densified representation matches the truncation entrywise
  const auto dense = g.densify();
  const auto t = build_truncation(delta(0.5), n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(std::abs(dense.at(i, j) - t.entries.at(i, j)) <= 1e-14);

  CHECK_THROWS_AS(rank_one_gram(leb(), 8), std::invalid_argument);
}

TEST_CASE("rank_one_gram eigenvalues match the dense oracle") {
  std::mt19937 rng(42u);
  std::uniform_real_distribution<double> cdist(0.1, 2.0), wdist(0.2, 3.0);
  for (const int k : {2, 5, 8}) {
    MeasureSpec spec;
    for (int i = 0; i < k; ++i)
      spec.terms.push_back(Term{wdist(rng), PointMass{cdist(rng), 1.0}});
    const int n = 256;
    const auto g = rank_one_gram(spec, n);
    const auto gram_eig = spectral::eig_sym(g.gram);
    const auto dense_eig = spectral::eig_sym(build_truncation(spec, n).entries);
    for (int i = 0; i < k; ++i)
      CHECK(std::abs(gram_eig.eigenvalues[i] - dense_eig.eigenvalues[i]) <=
            1e-10);
    for (int i = k; i < n; ++i)
      CHECK(std::abs(dense_eig.eigenvalues[i]) <= 1e-10);
  }
}

TEST_CASE("two equal point masses collapse to one rank-one term") {
  MeasureSpec two;
  two.terms.push_back(Term{1.0, PointMass{0.8, 0.75}});
  two.terms.push_back(Term{1.0, PointMass{0.8, 0.5}});
  const MeasureSpec one = delta(0.8, 1.25);
  const auto ea = spectral::eig_sym(rank_one_gram(two, 64).gram);
  const auto eb = spectral::eig_sym(rank_one_gram(one, 64).gram);
  CHECK(ea.eigenvalues[0] == doctest::Approx(eb.eigenvalues[0]).epsilon(1e-14));
  CHECK(std::abs(ea.eigenvalues[1]) <= 1e-14);
}

TEST_CASE("quadratic_form examples") {
  const std::vector<std::pair<std::int64_t, double>> e2 = {{2, 1.0}};
  CHECK(quadratic_form(leb(), e2) ==
        doctest::Approx(0.36067376022224085).epsilon(1e-10));
  CHECK(quadratic_form(delta(0.7), e2) ==
        doctest::Approx(0.18946457081379976).epsilon(1e-13));
  CHECK(quadratic_form(MeasureSpec{}, e2) == 0.0);
}

TEST_CASE("quadratic form agrees with the matrix bilinear form") {
  std::mt19937 rng(99u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<MeasureSpec> specs = {leb(), delta(0.4, 1.5),
                                    MeasureSpec::single(ExponentialDensity{2.0}),
                                    MeasureSpec::single(PowerDensity{1.0})};
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::pair<std::int64_t, double>> x;
      for (std::int64_t m = 2; m <= 14; ++m)
        if (unif(rng) > 0.0) x.emplace_back(m, unif(rng));
      if (x.empty()) x.emplace_back(2, 1.0);
      const double via_integral = quadratic_form(spec, x, 1e-11);
      const double via_matrix = matrix_form(spec, x, 1e-11);
      CHECK(std::abs(via_integral - via_matrix) <=
            1e-8 * (1.0 + std::abs(via_matrix)));
    }
  }
}

TEST_CASE("quadratic form handles signed oscillatory measures") {
  const MeasureSpec osc =
      MeasureSpec::single(OscillatoryDensity{1.0, Trig::Sin});
  const std::vector<std::pair<std::int64_t, double>> e2 = {{2, 1.0}};
  // <H e_2, e_2> is the (2,2) entry mu^(ln 4)/2
  const double diag = entry(osc, 2, 2, 1e-11);
  CHECK(quadratic_form(osc, e2, 1e-11) ==
        doctest::Approx(diag).epsilon(1e-8));
  std::vector<std::pair<std::int64_t, double>> x = {{2, 0.6}, {3, -0.4},
                                                    {5, 1.0}};
  CHECK(std::abs(quadratic_form(osc, x, 1e-11) -
                 matrix_form(osc, x, 1e-11)) <= 1e-7);
}

TEST_CASE("Gram positivity and monotonicity of forms") {
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const MeasureSpec small = MeasureSpec::single(ExponentialDensity{3.0});
  MeasureSpec big = small;  // small + t dt is a positive enlargement
  big.terms.push_back(Term{1.0, PowerDensity{1.0}});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<std::int64_t, double>> x;
    for (std::int64_t m = 2; m <= 10; ++m) x.emplace_back(m, unif(rng));
    const double qs = quadratic_form(small, x, 1e-11);
    const double qb = quadratic_form(big, x, 1e-11);
    CHECK(qs >= -1e-9);
    CHECK(qb >= qs - 1e-9);
  }
}

TEST_CASE("build linearity under convex combination") {
  const MeasureSpec m1 = MeasureSpec::single(ExponentialDensity{0.5});
  const MeasureSpec m2 = delta(0.6, 2.0);
  const int n = 12;
  const auto t1 = build_truncation(m1, n);
  const auto t2 = build_truncation(m2, n);
  for (const double r : {0.0, 0.25, 1.0}) {
    const auto tc = build_truncation(combine(m1, m2, r), n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double expect =
            r * t1.entries.at(i, j) + (1.0 - r) * t2.entries.at(i, j);
        CHECK(std::abs(tc.entries.at(i, j) - expect) <=
              4e-16 * std::abs(expect));
      }
  }
}

TEST_CASE("CSV export carries logical index headers") {
  const auto t = build_truncation(MeasureSpec{}, 3);
  std::ostringstream os;
  save_csv(t, os);
  const std::string expect = "m\\n,2,3,4\n2,0,0,0\n3,0,0,0\n4,0,0,0\n";
  CHECK(os.str() == expect);
}

TEST_CASE("binary cache round trip is bit exact") {
  const auto t = build_truncation(leb(), 17);
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  save_binary(t, ss);
  const SymMatrix back = load_binary(ss);
  REQUIRE(back.size() == 17);
  CHECK(back.data() == t.entries.data());

  std::stringstream bad(std::ios::in | std::ios::out | std::ios::binary);
  bad << "NOPE!";
  CHECK_THROWS_AS(load_binary(bad), std::invalid_argument);
}

TEST_CASE("dual representation kernel") {
  // zeta(s+t+1) - 1; symmetric in its arguments
  CHECK(dual_kernel(0.5, 0.5) ==
        doctest::Approx(0.6449340668482264).epsilon(1e-9));
  CHECK(dual_kernel(0.3, 1.7) == dual_kernel(1.7, 0.3));
  CHECK_THROWS_AS(dual_kernel(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("entry error bound propagates quadrature tolerances") {
  const auto exact = build_truncation(leb(), 8);
  CHECK(exact.entry_error_bound == 0.0);
  const auto fuzzy =
      build_truncation(MeasureSpec::single(LogDensity{}), 8, 1e-9);
  CHECK(fuzzy.entry_error_bound > 0.0);
  CHECK(fuzzy.entry_error_bound < 1e-8);
}

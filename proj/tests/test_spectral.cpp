#include <doctest.h>

#include <cmath>
#include <random>

#include "helson/matrix.hpp"
#include "helson/spectral.hpp"

using namespace helson;
using namespace helson::spectral;

namespace {

SymMatrix random_symmetric(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set_sym(i, j, unif(rng));
  return m;
}

}  // namespace

TEST_CASE("eig_sym on tiny fixed matrices") {
  SymMatrix d2(2);
  d2.at(0, 0) = 2.0;
  d2.at(1, 1) = 1.0;
  const auto r1 = eig_sym(d2);
  CHECK(r1.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r1.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r1.trace == doctest::Approx(3.0));

  SymMatrix swap(2);
  swap.set_sym(0, 1, 1.0);
  const auto r2 = eig_sym(swap);
  CHECK(r2.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r2.trace_norm_lower == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("eig_sym rejects non-symmetric input") {
  SymMatrix bad(3);
  bad.at(0, 1) = 1.0;
  bad.at(1, 0) = 1.0 + 1e-6;
  CHECK_THROWS_AS(eig_sym(bad), std::invalid_argument);
}

TEST_CASE("truncated rank-one point mass has a single nonzero eigenvalue") {
  using namespace helson::measure;
  const auto t = matrix::build_truncation(
      MeasureSpec::single(PointMass{0.5, 1.0}), 100);
  const auto r = eig_sym(t.entries);
  double expect = 0.0;
  for (int m = 101; m >= 2; --m) expect += std::pow(m, -2.0);
  CHECK(r.eigenvalues[0] == doctest::Approx(expect).epsilon(1e-12));
  for (int i = 1; i < 100; ++i) CHECK(std::abs(r.eigenvalues[i]) <= 1e-10);
  CHECK(r.hs_norm == doctest::Approx(r.eigenvalues[0]).epsilon(1e-12));
}

TEST_CASE("reconstruction and residual contract with eigenvectors") {
  for (const int n : {5, 24, 60}) {
    const SymMatrix h = random_symmetric(n, 1000u + n);
    SymMatrix v;
    const auto rep = eig_sym(h, true, &v);
    // residuals small against the norm scale
    CHECK(rep.max_residual <= 1e-9 * (1.0 + rep.hs_norm));
    // ||V L V^T - H||_F <= 1e-9 ||H||_F
    double err2 = 0.0, h2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double rec = 0.0;
        for (int k = 0; k < n; ++k)
          rec += v.at(i, k) * rep.eigenvalues[k] * v.at(j, k);
        const double d = rec - h.at(i, j);
        err2 += d * d;
        h2 += h.at(i, j) * h.at(i, j);
      }
    CHECK(std::sqrt(err2) <= 1e-9 * std::sqrt(h2));
    // trace consistency: sum of eigenvalues vs diagonal sum
    double lsum = 0.0;
    for (const double l : rep.eigenvalues) lsum += l;
    CHECK(lsum == doctest::Approx(rep.trace).epsilon(1e-11));
  }
}

TEST_CASE("Jacobi and Householder+QL agree on the same matrix") {
  // drive the QL path through a matrix larger than the Jacobi cutoff is
  // impractical here; instead check the two paths agree via a padded copy:
  // eigenvalues of H embedded in a block-diagonal matrix are preserved.
  const int n = 40;
  const SymMatrix h = random_symmetric(n, 7u);
  const auto small = eig_sym(h);  // Jacobi path

  // directly exercise the tridiagonal path by reflecting through a
  // temporarily lowered cutoff is not exposed; use a 1030-dim embedding
  const int big_n = 1030;
  SymMatrix big(big_n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) big.at(i, j) = h.at(i, j);
  for (int i = n; i < big_n; ++i) big.at(i, i) = -100.0 - i;
  const auto padded = eig_sym(big);  // QL path
  for (int i = 0; i < 10; ++i)
    CHECK(padded.eigenvalues[i] ==
          doctest::Approx(small.eigenvalues[i]).epsilon(1e-10));
}

TEST_CASE("lambda_max examples") {
  // rank-one a a^T has top eigenvalue ||a||^2
  const int n = 30;
  SymMatrix r1(n);
  std::vector<double> a(n);
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    a[i] = 1.0 / (i + 2.0);
    norm2 += a[i] * a[i];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r1.at(i, j) = a[i] * a[j];
  CHECK(lambda_max(r1, 1e-12) == doctest::Approx(norm2).epsilon(1e-10));

  SymMatrix id(3);
  for (int i = 0; i < 3; ++i) id.at(i, i) = 1.0;
  CHECK(lambda_max(id, 1e-10) == doctest::Approx(1.0).epsilon(1e-9));

  SymMatrix zero(4);
  CHECK(lambda_max(zero, 1e-10) == 0.0);
}

TEST_CASE("lambda_max matches eig_sym on a Lebesgue truncation") {
  using namespace helson::measure;
  const auto t = matrix::build_truncation(
      MeasureSpec::single(PowerDensity{0.0}), 256);
  const double power = lambda_max(t.entries, 1e-9);
  const auto rep = eig_sym(t.entries);
  CHECK(std::abs(power - rep.eigenvalues[0]) <= 1e-8);
}

TEST_CASE("matrix_functionals ties trace to the stored diagonal") {
  using namespace helson::measure;
  const auto t = matrix::build_truncation(
      MeasureSpec::single(ExponentialDensity{1.0}), 64);
  const auto f = matrix_functionals(t);
  double diag = 0.0;
  std::vector<double> terms;
  for (int i = 0; i < 64; ++i) terms.push_back(t.entries.at(i, i));
  // same pairwise reduction as the library
  diag = block_pairwise_sum(64, Exec::Serial,
                            [&](std::int64_t i) { return terms[i]; });
  CHECK(f.trace == diag);
  CHECK(f.hs_norm == doctest::Approx(std::sqrt(t.entries.frobenius_norm_sq()))
                         .epsilon(1e-15));
  CHECK(f.trace_norm_lower >= f.trace - 1e-12);
}

TEST_CASE("positive spec truncations have nonnegative spectra up to budget") {
  using namespace helson::measure;
  for (const auto& spec :
       {MeasureSpec::single(PowerDensity{0.0}),
        MeasureSpec::single(ExponentialDensity{0.3}),
        MeasureSpec::single(LogDensity{})}) {
    const auto t = matrix::build_truncation(spec, 48);
    const auto rep = eig_sym(t.entries);
    CHECK(rep.eigenvalues.back() >=
          -(48.0 * t.entry_error_bound + 1e-10 * (1.0 + rep.hs_norm)));
  }
}

TEST_CASE("matvec is bitwise identical across execution modes") {
  const SymMatrix h = random_symmetric(100, 3u);
  std::vector<double> x(100), y1(100), y2(100);
  for (int i = 0; i < 100; ++i) x[i] = std::cos(i * 0.37);
  h.matvec(x, y1, Exec::Serial);
  h.matvec(x, y2, Exec::Parallel);
  CHECK(y1 == y2);
}

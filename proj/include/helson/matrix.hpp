#pragma once

// N x N truncations of H_mu = (mu^(ln(mn))/sqrt(mn)), indices m,n = 2..N+1,
// with a product-keyed entry cache, the rank-one Gram representation for
// point-mass mixtures, and the integral quadratic form.

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "helson/dense.hpp"
#include "helson/measure.hpp"
#include "helson/parallel.hpp"

namespace helson::matrix {

struct HelsonTruncation {
  int n = 0;  // logical indices run 2..n+1
  SymMatrix entries;
  double entry_error_bound = 0.0;  // max propagated Laplace error over entries
  measure::MeasureSpec spec;

  // logical accessor, m and k in [2, n+1]
  double at(std::int64_t m, std::int64_t k) const {
    return entries.at(static_cast<int>(m - 2), static_cast<int>(k - 2));
  }
};

// One Laplace evaluation per distinct product p = m*k (sorted unique stream).
struct ProductCache {
  std::vector<std::int64_t> products;  // sorted, unique
  std::vector<double> values;          // laplace(spec, ln p).value
  double max_entry_error = 0.0;        // max over p of err(p)/sqrt(p)

  double lookup(std::int64_t p) const;
};

// Sequential cache population over the distinct products of [2, N+1]^2.
ProductCache populate_cache(const measure::MeasureSpec& spec, int n,
                            double tol);

HelsonTruncation build_truncation(const measure::MeasureSpec& spec, int n,
                                  double tol = 1e-10,
                                  Exec exec = default_exec());

// Single entry mu^(ln(m k))/sqrt(m k); bit-identical to build_truncation.
double entry(const measure::MeasureSpec& spec, std::int64_t m, std::int64_t k,
             double tol = 1e-10);

// Low-rank representation sum_i w_i a_{c_i} a_{c_i}^T for a positive finite
// mixture of point masses; the k x k Gram matrix carries the nonzero
// eigenvalues of the truncation.
struct RankOneGram {
  int n = 0;
  std::vector<double> weights;
  std::vector<double> locations;
  SymMatrix gram;  // G[i][j] = sqrt(w_i w_j) sum_{m=2}^{n+1} m^{-1-c_i-c_j}

  SymMatrix densify() const;
};
RankOneGram rank_one_gram(const measure::MeasureSpec& spec, int n);

// <H_mu x, x> = int_0^inf |x~(t)|^2 mu(dt), x~(t) = sum x_m m^{-1/2-t}.
// x is finitely supported over indices >= 2.
double quadratic_form(const measure::MeasureSpec& spec,
                      const std::vector<std::pair<std::int64_t, double>>& x,
                      double tol = 1e-10);

// matrix bilinear form x^T H^{(N)} x evaluated from entries directly (no
// dense matrix stored); the truncation size is the support maximum.
double matrix_form(const measure::MeasureSpec& spec,
                   const std::vector<std::pair<std::int64_t, double>>& x,
                   double tol = 1e-10, Exec exec = default_exec());

// kernel of the dual representation N_mu N_mu^*: zeta(s + t + 1) - 1.
// Helper evaluation only; no dual-operator computation is built on it.
double dual_kernel(double s, double t, double tol = 1e-10);

// ---- persistence ----

// CSV, row-major with logical index headers
void save_csv(const HelsonTruncation& t, std::ostream& os);
// binary cache: magic "HELS1", u64 N little-endian, N*N f64 entries
void save_binary(const HelsonTruncation& t, std::ostream& os);
SymMatrix load_binary(std::istream& is);

}  // namespace helson::matrix

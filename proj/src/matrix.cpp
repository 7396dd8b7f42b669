#include "helson/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "helson/common.hpp"

namespace helson::matrix {

namespace {

void require_valid(const measure::MeasureSpec& spec) {
  const measure::ValidationReport rep = measure::validate(spec);
  if (!rep.ok) {
    std::string why = "measure spec rejected:";
    for (const auto& issue : rep.issues) why += " " + issue.reason + ";";
    throw std::invalid_argument(why);
  }
}

}  // namespace

double ProductCache::lookup(std::int64_t p) const {
  const auto it = std::lower_bound(products.begin(), products.end(), p);
  if (it == products.end() || *it != p)
    throw std::logic_error("product cache miss");
  return values[static_cast<std::size_t>(it - products.begin())];
}

ProductCache populate_cache(const measure::MeasureSpec& spec, int n,
                            double tol) {
  ProductCache cache;
  const std::int64_t top = static_cast<std::int64_t>(n) + 1;
  cache.products.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (std::int64_t m = 2; m <= top; ++m)
    for (std::int64_t k = m; k <= top; ++k) cache.products.push_back(m * k);
  std::sort(cache.products.begin(), cache.products.end());
  cache.products.erase(
      std::unique(cache.products.begin(), cache.products.end()),
      cache.products.end());
  cache.values.resize(cache.products.size());
  for (std::size_t i = 0; i < cache.products.size(); ++i) {
    const std::int64_t p = cache.products[i];
    const measure::LaplaceValue v =
        measure::laplace(spec, std::log(static_cast<double>(p)), tol);
    cache.values[i] = v.value;
    cache.max_entry_error = std::max(
        cache.max_entry_error,
        v.abs_error_bound / std::sqrt(static_cast<double>(p)));
  }
  return cache;
}

HelsonTruncation build_truncation(const measure::MeasureSpec& spec, int n,
                                  double tol, Exec exec) {
  if (n < 1) throw std::invalid_argument("build_truncation: n must be >= 1");
  require_valid(spec);
  HelsonTruncation t;
  t.n = n;
  t.spec = spec;
  t.entries = SymMatrix(n);
  const ProductCache cache = populate_cache(spec, n, tol);
  t.entry_error_bound = cache.max_entry_error;
  // entry fill over rows; pure reads of the cache after the sequential pass
  parallel_for(0, n, exec, [&](std::int64_t i) {
    const std::int64_t m = i + 2;
    for (std::int64_t j = i; j < n; ++j) {
      const std::int64_t k = j + 2;
      const double v = cache.lookup(m * k) / sqrt_product(m, k);
      t.entries.set_sym(static_cast<int>(i), static_cast<int>(j), v);
    }
  });
  return t;
}

double entry(const measure::MeasureSpec& spec, std::int64_t m, std::int64_t k,
             double tol) {
  if (m < 2 || k < 2) throw std::invalid_argument("entry: indices start at 2");
  require_valid(spec);
  return measure::laplace(spec, log_product(m, k), tol).value /
         sqrt_product(m, k);
}

RankOneGram rank_one_gram(const measure::MeasureSpec& spec, int n) {
  RankOneGram g;
  g.n = n;
  for (const auto& term : spec.terms) {
    const auto* pm = std::get_if<measure::PointMass>(&term.atom);
    if (pm == nullptr)
      throw std::invalid_argument(
          "rank_one_gram: spec must be a finite mixture of point masses");
    if (term.coef <= 0.0 || term.windowed())
      throw std::invalid_argument(
          "rank_one_gram: point-mass mixture must be positive and "
          "unrestricted");
    g.weights.push_back(term.coef * pm->w);
    g.locations.push_back(pm->c);
  }
  const int k = static_cast<int>(g.weights.size());
  g.gram = SymMatrix(k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const double e = 1.0 + g.locations[i] + g.locations[j];
      const double s = block_pairwise_sum(
          g.n, Exec::Serial, [&](std::int64_t idx) {
            return std::pow(static_cast<double>(idx + 2), -e);
          });
      g.gram.set_sym(i, j, std::sqrt(g.weights[static_cast<std::size_t>(i)] *
                                     g.weights[static_cast<std::size_t>(j)]) *
                               s);
    }
  return g;
}

SymMatrix RankOneGram::densify() const {
  SymMatrix m(n);
  const int k = static_cast<int>(weights.size());
  std::vector<std::vector<double>> vecs(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    auto& v = vecs[static_cast<std::size_t>(i)];
    v.resize(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r)
      v[static_cast<std::size_t>(r)] =
          std::pow(static_cast<double>(r + 2), -0.5 - locations[static_cast<std::size_t>(i)]);
  }
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      double s = 0.0;
      for (int i = 0; i < k; ++i)
        s += weights[static_cast<std::size_t>(i)] *
             vecs[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] *
             vecs[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      m.set_sym(r, c, s);
    }
  return m;
}

namespace {

// x~(t) = sum_m x_m m^{-1/2-t}
double xtilde(const std::vector<std::pair<std::int64_t, double>>& x, double t) {
  double s = 0.0;
  for (const auto& [m, xm] : x)
    s += xm * std::pow(static_cast<double>(m), -0.5 - t);
  return s;
}

}  // namespace

double quadratic_form(const measure::MeasureSpec& spec,
                      const std::vector<std::pair<std::int64_t, double>>& x,
                      double tol) {
  for (const auto& [m, xm] : x) {
    (void)xm;
    if (m < 2)
      throw std::invalid_argument("quadratic_form: indices start at 2");
  }
  if (x.empty() || spec.terms.empty()) return 0.0;
  double total = 0.0;
  const double term_tol =
      tol / static_cast<double>(std::max<std::size_t>(1, spec.terms.size()));
  for (const auto& term : spec.terms) {
    if (term.coef == 0.0) continue;
    if (const auto* pm = std::get_if<measure::PointMass>(&term.atom)) {
      if (pm->c >= term.lo && pm->c < term.hi) {
        const double xt = xtilde(x, pm->c);
        total += term.coef * pm->w * xt * xt;
      }
      continue;
    }
    // |x~|^2 decays like 4^{-t}, so the weighted integrand keeps an
    // exponential envelope for every admissible density atom
    measure::MeasureSpec one;
    {
      measure::Term unit = term;
      unit.coef = 1.0;
      one.terms.push_back(unit);
    }
    const auto f = [&one, &x](double t) {
      const double xt = xtilde(x, t);
      return xt * xt * measure::density_value(one, t);
    };
    quad::QuadResult r;
    if (term.hi == std::numeric_limits<double>::infinity())
      r = quad::integrate_halfline(f, term.lo, term_tol,
                                   quad::Decay::exponential(2.0 * measure::kLn2));
    else
      r = quad::integrate_finite(f, term.lo, term.hi, term_tol);
    if (!r.converged)
      throw NumericError("quadratic_form: quadrature did not converge",
                         r.value, r.error);
    total += term.coef * r.value;
  }
  return total;
}

double matrix_form(const measure::MeasureSpec& spec,
                   const std::vector<std::pair<std::int64_t, double>>& x,
                   double tol, Exec exec) {
  if (x.empty()) return 0.0;
  require_valid(spec);
  const std::int64_t count = static_cast<std::int64_t>(x.size());
  std::vector<double> row_sums(static_cast<std::size_t>(count));
  parallel_for(0, count, exec, [&](std::int64_t i) {
    const auto& [m, xm] = x[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (std::int64_t j = 0; j < count; ++j) {
      const auto& [k, xk] = x[static_cast<std::size_t>(j)];
      const double e =
          measure::laplace(spec, log_product(m, k), tol).value /
          sqrt_product(m, k);
      s += e * xk;
    }
    row_sums[static_cast<std::size_t>(i)] = xm * s;
  });
  return pairwise_reduce(row_sums);
}

double dual_kernel(double s, double t, double tol) {
  if (!(s > 0.0) || !(t > 0.0))
    throw std::invalid_argument("dual_kernel: requires s, t > 0");
  return quad::zeta_minus_one(s + t + 1.0, tol).value;
}

void save_csv(const HelsonTruncation& t, std::ostream& os) {
  os.precision(17);
  os << "m\\n";
  for (int j = 0; j < t.n; ++j) os << ',' << (j + 2);
  os << '\n';
  for (int i = 0; i < t.n; ++i) {
    os << (i + 2);
    for (int j = 0; j < t.n; ++j) os << ',' << t.entries.at(i, j);
    os << '\n';
  }
}

void save_binary(const HelsonTruncation& t, std::ostream& os) {
  os.write("HELS1", 5);
  const std::uint64_t n = static_cast<std::uint64_t>(t.n);
  unsigned char hdr[8];
  for (int i = 0; i < 8; ++i) hdr[i] = static_cast<unsigned char>((n >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(hdr), 8);
  for (const double v : t.entries.data()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i)
      buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 8);
  }
}

SymMatrix load_binary(std::istream& is) {
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "HELS1", 5) != 0)
    throw std::invalid_argument("not a HELS1 truncation file");
  unsigned char hdr[8];
  is.read(reinterpret_cast<char*>(hdr), 8);
  if (!is) throw std::invalid_argument("truncated HELS1 header");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(hdr[i]) << (8 * i);
  if (n == 0 || n > (1u << 20))
    throw std::invalid_argument("unreasonable HELS1 dimension");
  SymMatrix m(static_cast<int>(n));
  for (double& v : m.data()) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw std::invalid_argument("truncated HELS1 payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    std::memcpy(&v, &bits, 8);
  }
  return m;
}

}  // namespace helson::matrix

#include "helson/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "helson/common.hpp"

namespace helson::spectral {

namespace {

constexpr int kJacobiCutoff = 1024;

// Cyclic Jacobi with the Rutishauser update; converges quadratically once
// the off-diagonal mass is small.
void jacobi(SymMatrix& a, std::vector<double>& d, SymMatrix* v) {
  const int n = a.size();
  d.resize(static_cast<std::size_t>(n));
  if (v) {
    *v = SymMatrix(n);
    for (int i = 0; i < n; ++i) v->at(i, i) = 1.0;
  }
  std::vector<double> b(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)] = a.at(i, i);
  for (int sweep = 1; sweep <= 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += std::abs(a.at(p, q));
    if (off == 0.0) return;
    const double thresh = (sweep < 4) ? 0.2 * off / (n * n) : 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 4 &&
            std::abs(d[static_cast<std::size_t>(p)]) + g == std::abs(d[static_cast<std::size_t>(p)]) &&
            std::abs(d[static_cast<std::size_t>(q)]) + g == std::abs(d[static_cast<std::size_t>(q)])) {
          a.at(p, q) = a.at(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= thresh) continue;
        double h = d[static_cast<std::size_t>(q)] - d[static_cast<std::size_t>(p)];
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        h = t * apq;
        z[static_cast<std::size_t>(p)] -= h;
        z[static_cast<std::size_t>(q)] += h;
        d[static_cast<std::size_t>(p)] -= h;
        d[static_cast<std::size_t>(q)] += h;
        a.at(p, q) = a.at(q, p) = 0.0;
        const auto rotate = [s, tau](double& x, double& y) {
          const double gx = x, hy = y;
          x = gx - s * (hy + gx * tau);
          y = hy + s * (gx - hy * tau);
        };
        for (int j = 0; j < p; ++j) {
          rotate(a.at(j, p), a.at(j, q));
          a.at(p, j) = a.at(j, p);
          a.at(q, j) = a.at(j, q);
        }
        for (int j = p + 1; j < q; ++j) {
          rotate(a.at(p, j), a.at(j, q));
          a.at(j, p) = a.at(p, j);
          a.at(q, j) = a.at(j, q);
        }
        for (int j = q + 1; j < n; ++j) {
          rotate(a.at(p, j), a.at(q, j));
          a.at(j, p) = a.at(p, j);
          a.at(j, q) = a.at(q, j);
        }
        if (v)
          for (int j = 0; j < n; ++j) rotate(v->at(j, p), v->at(j, q));
      }
    }
    for (int i = 0; i < n; ++i) {
      b[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
      d[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(i)] = 0.0;
    }
  }
  throw NumericError("jacobi: sweep cap reached before convergence",
                     d.empty() ? 0.0 : d[0], 0.0);
}

// Householder reduction to tridiagonal form; when accumulate is set, a is
// overwritten with the orthogonal transform Q (A = Q T Q^T).
void tridiagonalize(SymMatrix& a, std::vector<double>& d,
                    std::vector<double>& e, bool accumulate) {
  const int n = a.size();
  d.assign(static_cast<std::size_t>(n), 0.0);
  e.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(a.at(i, k));
      if (scale == 0.0) {
        e[static_cast<std::size_t>(i)] = a.at(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          a.at(i, k) /= scale;
          h += a.at(i, k) * a.at(i, k);
        }
        double f = a.at(i, l);
        const double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[static_cast<std::size_t>(i)] = scale * g;
        h -= f * g;
        a.at(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          if (accumulate) a.at(j, i) = a.at(i, j) / h;
          double gg = 0.0;
          for (int k = 0; k <= j; ++k) gg += a.at(j, k) * a.at(i, k);
          for (int k = j + 1; k <= l; ++k) gg += a.at(k, j) * a.at(i, k);
          e[static_cast<std::size_t>(j)] = gg / h;
          f += e[static_cast<std::size_t>(j)] * a.at(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = a.at(i, j);
          const double gg = e[static_cast<std::size_t>(j)] - hh * f;
          e[static_cast<std::size_t>(j)] = gg;
          for (int k = 0; k <= j; ++k)
            a.at(j, k) -= f * e[static_cast<std::size_t>(k)] + gg * a.at(i, k);
        }
      }
    } else {
      e[static_cast<std::size_t>(i)] = a.at(i, l);
    }
    d[static_cast<std::size_t>(i)] = h;
  }
  if (accumulate) d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (accumulate) {
      const int l = i - 1;
      if (d[static_cast<std::size_t>(i)] != 0.0) {
        for (int j = 0; j <= l; ++j) {
          double g = 0.0;
          for (int k = 0; k <= l; ++k) g += a.at(i, k) * a.at(k, j);
          for (int k = 0; k <= l; ++k) a.at(k, j) -= g * a.at(k, i);
        }
      }
      d[static_cast<std::size_t>(i)] = a.at(i, i);
      a.at(i, i) = 1.0;
      for (int j = 0; j <= l; ++j) a.at(j, i) = a.at(i, j) = 0.0;
    } else {
      d[static_cast<std::size_t>(i)] = a.at(i, i);
    }
  }
}

// Implicit-shift QL on a symmetric tridiagonal (d, e); optionally rotates the
// column basis z along.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, SymMatrix* z) {
  const int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                          std::abs(d[static_cast<std::size_t>(m + 1)]);
        if (std::abs(e[static_cast<std::size_t>(m)]) <=
            std::numeric_limits<double>::epsilon() * dd)
          break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw NumericError("ql_implicit: too many iterations",
                             d[static_cast<std::size_t>(l)], 0.0);
        double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) /
                   (2.0 * e[static_cast<std::size_t>(l)]);
        double r = std::hypot(g, 1.0);
        g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
            e[static_cast<std::size_t>(l)] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[static_cast<std::size_t>(i)];
          const double b = c * e[static_cast<std::size_t>(i)];
          r = std::hypot(f, g);
          e[static_cast<std::size_t>(i + 1)] = r;
          if (r == 0.0) {
            d[static_cast<std::size_t>(i + 1)] -= p;
            e[static_cast<std::size_t>(m)] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[static_cast<std::size_t>(i + 1)] - p;
          r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
          p = s * r;
          d[static_cast<std::size_t>(i + 1)] = g + p;
          g = c * r - b;
          if (z) {
            const int nn = z->size();
            for (int k = 0; k < nn; ++k) {
              f = z->at(k, i + 1);
              z->at(k, i + 1) = s * z->at(k, i) + c * f;
              z->at(k, i) = c * z->at(k, i) - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[static_cast<std::size_t>(l)] -= p;
        e[static_cast<std::size_t>(l)] = g;
        e[static_cast<std::size_t>(m)] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

SpectralReport eig_sym(const SymMatrix& h, bool want_vectors,
                       SymMatrix* vectors) {
  const int n = h.size();
  if (n <= 0) throw std::invalid_argument("eig_sym: empty matrix");
  double maxabs = 0.0;
  for (const double v : h.data()) maxabs = std::max(maxabs, std::abs(v));
  if (maxabs > 0.0 && h.max_asymmetry() > 1e-12 * maxabs)
    throw std::invalid_argument("eig_sym: matrix is not symmetric");

  SpectralReport rep;
  rep.trace = block_pairwise_sum(n, Exec::Serial,
                                 [&](std::int64_t i) { return h.at(static_cast<int>(i), static_cast<int>(i)); });
  rep.hs_norm = std::sqrt(h.frobenius_norm_sq(Exec::Serial));

  SymMatrix work = h;
  std::vector<double> d;
  SymMatrix basis;
  SymMatrix* basis_ptr = want_vectors ? &basis : nullptr;
  if (n <= kJacobiCutoff) {
    jacobi(work, d, basis_ptr);
  } else {
    std::vector<double> e;
    tridiagonalize(work, d, e, want_vectors);
    ql_implicit(d, e, want_vectors ? &work : nullptr);
    if (want_vectors) basis = work;
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&d](int i, int j) {
    return d[static_cast<std::size_t>(i)] > d[static_cast<std::size_t>(j)];
  });
  rep.eigenvalues.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    rep.eigenvalues[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  rep.trace_norm_lower = block_pairwise_sum(n, Exec::Serial, [&](std::int64_t i) {
    return std::abs(rep.eigenvalues[static_cast<std::size_t>(i)]);
  });

  if (want_vectors) {
    SymMatrix sorted(n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        sorted.at(i, j) = basis.at(i, order[static_cast<std::size_t>(j)]);
    if (vectors) *vectors = sorted;
    // residual contract: max over retained pairs of ||Hv - lambda v||
    double worst = 0.0;
    std::vector<double> col(static_cast<std::size_t>(n)), hv(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = sorted.at(i, j);
      h.matvec(col, hv, Exec::Serial);
      double rsq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = hv[static_cast<std::size_t>(i)] -
                         rep.eigenvalues[static_cast<std::size_t>(j)] * col[static_cast<std::size_t>(i)];
        rsq += r * r;
      }
      worst = std::max(worst, std::sqrt(rsq));
    }
    rep.max_residual = worst;
  }
  return rep;
}

double lambda_max(const SymMatrix& h, double tol, Exec exec, int max_iters) {
  const int n = h.size();
  if (n <= 0) throw std::invalid_argument("lambda_max: empty matrix");
  std::vector<double> x(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(static_cast<std::size_t>(n));
  double rho = 0.0, resid = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    h.matvec(x, y, exec);
    rho = 0.0;
    for (int i = 0; i < n; ++i) rho += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    double rsq = 0.0, ynorm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[static_cast<std::size_t>(i)] - rho * x[static_cast<std::size_t>(i)];
      rsq += r * r;
      ynorm += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    resid = std::sqrt(rsq);
    if (resid <= tol * std::max(1.0, std::abs(rho))) return rho;
    if (ynorm == 0.0) return 0.0;  // x in the kernel: zero matrix etc.
    const double inv = 1.0 / std::sqrt(ynorm);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] * inv;
  }
  throw NumericError("lambda_max: power iteration did not converge", rho,
                     resid);
}

Functionals matrix_functionals(const matrix::HelsonTruncation& t) {
  Functionals f;
  const int n = t.entries.size();
  f.trace = block_pairwise_sum(n, Exec::Serial,
                               [&](std::int64_t i) { return t.entries.at(static_cast<int>(i), static_cast<int>(i)); });
  f.hs_norm = std::sqrt(t.entries.frobenius_norm_sq(Exec::Serial));
  const SpectralReport rep = eig_sym(t.entries, false);
  f.trace_norm_lower = rep.trace_norm_lower;
  return f;
}

nlohmann::json to_json(const SpectralReport& r) {
  return nlohmann::json{{"eigenvalues", r.eigenvalues},
                        {"trace", r.trace},
                        {"hs_norm", r.hs_norm},
                        {"trace_norm_lower", r.trace_norm_lower},
                        {"max_residual", r.max_residual}};
}

}  // namespace helson::spectral

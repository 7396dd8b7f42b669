#include "helson/schatten.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "helson/bounds.hpp"
#include "helson/common.hpp"
#include "helson/spectral.hpp"

namespace helson::schatten {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();
using measure::kLn2;

void require_valid(const measure::MeasureSpec& spec) {
  const auto rep = measure::validate(spec);
  if (!rep.ok) {
    std::string why = "measure spec rejected:";
    for (const auto& issue : rep.issues) why += " " + issue.reason + ";";
    throw std::invalid_argument(why);
  }
}

struct MajorantSum {
  std::vector<measure::TransformMajorant> parts;
  bool complete = false;
};

MajorantSum spec_majorant(const measure::MeasureSpec& spec) {
  MajorantSum out;
  out.complete = true;
  for (const auto& term : spec.terms) {
    if (term.coef == 0.0) continue;
    const auto m = measure::transform_majorant(term);
    if (!m || term.coef < 0.0) {
      out.complete = false;
      continue;
    }
    out.parts.push_back(*m);
  }
  return out;
}

// strongest single-term lower bound of the transform (positive specs only):
// smallest c first, then smallest q
std::optional<measure::TransformMajorant> spec_minorant(
    const measure::MeasureSpec& spec) {
  if (!spec.positive()) return std::nullopt;
  std::optional<measure::TransformMajorant> best;
  for (const auto& term : spec.terms) {
    const auto m = measure::transform_minorant(term);
    if (!m) continue;
    if (!best || m->c < best->c - 1e-15 ||
        (std::abs(m->c - best->c) <= 1e-15 && m->q < best->q))
      best = m;
  }
  return best;
}

// sum_{m > L} K m^{-beta} (2 ln m)^{-gamma}  (gamma >= 0), +inf if unbounded
double tail_power_log(double K, double beta, double gamma, double L) {
  if (L < 3.0) L = 3.0;
  if (beta > 1.0)
    return K * std::pow(2.0 * std::log(L), -gamma) * std::pow(L, 1.0 - beta) /
           (beta - 1.0);
  if (std::abs(beta - 1.0) <= 1e-15 && gamma > 1.0)
    return K * std::pow(2.0, -gamma) * std::pow(std::log(L), 1.0 - gamma) /
           (gamma - 1.0);
  return kInf;
}

// does sum m^{-beta} (ln m)^{-gamma} diverge?
bool series_diverges(double beta, double gamma) {
  if (beta < 1.0 - 1e-15) return true;
  if (std::abs(beta - 1.0) <= 1e-15 && gamma <= 1.0 + 1e-15) return true;
  return false;
}

// ---- closed-form pieces for the square-of-transform tails (HS / ColP) ----

// W(u) = int_{u+A}^inf (K e^{-c w} w^{-q})^2 dw, upper bound
double w_upper(const measure::TransformMajorant& m, double u, double A) {
  const double base = u + A;
  if (m.c > 0.0)
    return m.K * m.K * std::pow(base, -2.0 * m.q) *
           std::exp(-2.0 * m.c * base) / (2.0 * m.c);
  if (2.0 * m.q > 1.0)
    return m.K * m.K * std::pow(base, 1.0 - 2.0 * m.q) / (2.0 * m.q - 1.0);
  return kInf;
}

// int_{ln2}^inf W(u) du, upper bound
double w_integral_upper(const measure::TransformMajorant& m, double A) {
  const double base = kLn2 + A;
  if (m.c > 0.0)
    return m.K * m.K * std::pow(base, -2.0 * m.q) *
           std::exp(-2.0 * m.c * base) / (4.0 * m.c * m.c);
  if (2.0 * m.q > 2.0)
    return m.K * m.K * std::pow(base, 2.0 - 2.0 * m.q) /
           ((2.0 * m.q - 1.0) * (2.0 * m.q - 2.0));
  return kInf;
}

// pointwise majorant value K e^{-c w} w^{-q} summed over parts
double majorant_value(const MajorantSum& maj, double w) {
  double v = 0.0;
  for (const auto& m : maj.parts)
    v += m.K * std::exp(-m.c * w) * std::pow(w, -m.q);
  return v;
}

double diag_term(const measure::MeasureSpec& spec, std::int64_t m, double tol) {
  // shares the realization of the matrix diagonal bit for bit
  return measure::laplace(spec, log_product(m, m), tol).value /
         sqrt_product(m, m);
}

}  // namespace

double trace_cond_partial(const measure::MeasureSpec& spec,
                          std::int64_t length, Exec exec) {
  require_valid(spec);
  return block_pairwise_sum(length, exec, [&](std::int64_t i) {
    return diag_term(spec, i + 2, 1e-10);
  });
}

SeriesVerdict schatten_series(
    const measure::MeasureSpec& spec, SeriesKind kind, double p,
    std::int64_t length, Exec exec,
    std::optional<measure::TransformMajorant> majorant_override,
    bool assume_positive) {
  require_valid(spec);
  if (!assume_positive && !spec.positive())
    throw std::invalid_argument(
        "schatten_series: requires a positive spec (use hahn_decompose or the "
        "signed trace bound)");
  if ((kind == SeriesKind::ColP || kind == SeriesKind::DiagP ||
       kind == SeriesKind::EntryP) &&
      !(p > 0.0))
    throw std::invalid_argument("schatten_series: p must be positive");
  if (length < 1) throw std::invalid_argument("schatten_series: length >= 1");

  SeriesVerdict out;
  out.kind = kind;
  out.p = (kind == SeriesKind::TraceCond || kind == SeriesKind::HS) ? 0.0 : p;
  out.length = length;
  const double tol = 1e-10;
  const std::int64_t L = length;  // indices 2..L+1

  MajorantSum maj;
  if (majorant_override) {
    maj.parts = {*majorant_override};
    maj.complete = true;
  } else {
    maj = spec_majorant(spec);
  }
  std::optional<measure::TransformMajorant> minorant;
  if (!majorant_override) minorant = spec_minorant(spec);
  const std::size_t k_parts = maj.parts.size();
  const double subadd = [&](double expo) {
    return expo >= 1.0 && k_parts > 1
               ? std::pow(static_cast<double>(k_parts), expo - 1.0)
               : 1.0;
  }(kind == SeriesKind::DiagP || kind == SeriesKind::EntryP ? p : 1.0);

  const auto set_tail_bounded = [&](double upper) {
    if (std::isfinite(upper)) {
      out.tail_kind = SeriesVerdict::TailKind::Bounded;
      out.tail = {0.0, upper};
      out.verdict = SeriesVerdict::Verdict::Converges;
      return true;
    }
    return false;
  };
  const auto set_diverges_if = [&](bool cond) {
    if (cond) {
      out.tail_kind = SeriesVerdict::TailKind::Diverges;
      out.verdict = SeriesVerdict::Verdict::Diverges;
      return true;
    }
    return false;
  };

  switch (kind) {
    case SeriesKind::TraceCond: {
      out.partial_sum = block_pairwise_sum(
          L, exec, [&](std::int64_t i) { return diag_term(spec, i + 2, tol); });
      if (maj.complete) {
        double up = 0.0;
        for (const auto& m : maj.parts)
          up += tail_power_log(m.K, 1.0 + 2.0 * m.c, m.q,
                               static_cast<double>(L + 1));
        if (set_tail_bounded(up)) break;
      }
      if (minorant &&
          set_diverges_if(series_diverges(1.0 + 2.0 * minorant->c,
                                          minorant->q)))
        break;
      out.tail_kind = SeriesVerdict::TailKind::Unknown;
      out.verdict = SeriesVerdict::Verdict::Inconclusive;
      break;
    }

    case SeriesKind::DiagP: {
      out.partial_sum = block_pairwise_sum(L, exec, [&](std::int64_t i) {
        return std::pow(diag_term(spec, i + 2, tol), p);
      });
      if (maj.complete) {
        double up = 0.0;
        for (const auto& m : maj.parts)
          up += tail_power_log(std::pow(m.K, p), p * (1.0 + 2.0 * m.c),
                               p * m.q, static_cast<double>(L + 1));
        up *= subadd;
        if (set_tail_bounded(up)) break;
      }
      if (minorant &&
          set_diverges_if(series_diverges(p * (1.0 + 2.0 * minorant->c),
                                          p * minorant->q)))
        break;
      out.tail_kind = SeriesVerdict::TailKind::Unknown;
      out.verdict = SeriesVerdict::Verdict::Inconclusive;
      break;
    }

    case SeriesKind::HS:
    case SeriesKind::EntryP: {
      const double pw = (kind == SeriesKind::HS) ? 2.0 : p;
      const matrix::ProductCache cache = matrix::populate_cache(
          spec, static_cast<int>(L), tol);
      std::vector<double> rows(static_cast<std::size_t>(L));
      parallel_for(0, L, exec, [&](std::int64_t i) {
        const std::int64_t m = i + 2;
        double s = 0.0;
        for (std::int64_t k = 2; k <= L + 1; ++k) {
          const double e = cache.lookup(m * k) / sqrt_product(m, k);
          s += std::pow(std::abs(e), pw);
        }
        rows[static_cast<std::size_t>(i)] = s;
      });
      out.partial_sum = pairwise_reduce(rows);

      if (kind == SeriesKind::HS) {
        if (maj.complete) {
          double up = 0.0;
          for (const auto& m : maj.parts) {
            const double a = std::log(static_cast<double>(L));
            const double wl2 = w_upper(m, kLn2, a);
            const double wi = w_integral_upper(m, a);
            up += 0.5 * wl2 + wi;
          }
          up *= 2.0 * static_cast<double>(std::max<std::size_t>(1, k_parts));
          if (set_tail_bounded(up)) break;
        }
        if (minorant &&
            set_diverges_if(minorant->c == 0.0 && minorant->q <= 1.0 + 1e-15))
          break;
      } else {
        // entry-p: per part requires delta = p c - (1 - p/2) > 0
        if (maj.complete) {
          double up = 0.0;
          const double B = std::log(static_cast<double>(L));
          for (const auto& m : maj.parts) {
            const double delta = p * m.c - (1.0 - 0.5 * p);
            if (delta <= 0.0) {
              up = kInf;
              break;
            }
            const double kp = std::pow(m.K, p);
            const double row2 = std::pow(2.0, -0.5 * p) * kp *
                                std::exp(-p * m.c * kLn2) *
                                std::pow(kLn2 + B, -p * m.q) *
                                std::exp(-delta * B) / delta;
            const double integ = kp * std::exp(-delta * B) / delta *
                                 std::pow(kLn2 + B, -p * m.q) *
                                 std::exp(-delta * kLn2) / delta;
            up += row2 + integ;
          }
          up *= 2.0 * subadd;
          if (set_tail_bounded(up)) break;
        }
        if (minorant) {
          const double delta = p * minorant->c - (1.0 - 0.5 * p);
          if (set_diverges_if(delta < -1e-15 ||
                              (std::abs(delta) <= 1e-15 &&
                               p * minorant->q <= 1.0 + 1e-15)))
            break;
        }
      }
      // heuristic power-law extrapolation of the row sums
      if (spec.positive() && L >= 32) {
        const std::int64_t half = L / 2;
        const double r_half = rows[static_cast<std::size_t>(half - 1)];
        const double r_last = rows[static_cast<std::size_t>(L - 1)];
        if (r_half > 0.0 && r_last > 0.0 && r_last < r_half) {
          const double b = std::log(r_half / r_last) /
                           std::log(static_cast<double>(L) / half);
          if (b > 1.05) {
            const double est =
                2.0 * r_last * static_cast<double>(L) / (b - 1.0);
            out.tail_kind = SeriesVerdict::TailKind::Heuristic;
            out.tail = {0.0, est};
            out.verdict = SeriesVerdict::Verdict::Inconclusive;
            break;
          }
        }
      }
      out.tail_kind = SeriesVerdict::TailKind::Unknown;
      out.verdict = SeriesVerdict::Verdict::Inconclusive;
      break;
    }

    case SeriesKind::ColP: {
      const matrix::ProductCache cache = matrix::populate_cache(
          spec, static_cast<int>(L), tol);
      const double a_log = std::log(static_cast<double>(L));
      std::vector<double> cols(static_cast<std::size_t>(L));
      std::vector<double> col_up_delta(static_cast<std::size_t>(L));
      parallel_for(0, L, exec, [&](std::int64_t j) {
        const std::int64_t n = j + 2;
        double s = 0.0;
        for (std::int64_t m = 2; m <= L + 1; ++m) {
          const double e = cache.lookup(m * n) / sqrt_product(m, n);
          s += e * e;
        }
        cols[static_cast<std::size_t>(j)] = std::pow(s, 0.5 * p);
        if (maj.complete) {
          double mt = 0.0;
          for (const auto& mm : maj.parts)
            mt += w_upper(mm, std::log(static_cast<double>(n)), a_log);
          mt *= static_cast<double>(std::max<std::size_t>(1, k_parts)) /
                static_cast<double>(n);
          col_up_delta[static_cast<std::size_t>(j)] =
              std::pow(s + mt, 0.5 * p) - std::pow(s, 0.5 * p);
        }
      });
      out.partial_sum = pairwise_reduce(cols);
      if (maj.complete) {
        // n-tail: int_L^inf x^{-p/2} Q_up(ln x)^{p/2} dx with
        // Q_up(v) = k [ maj(ln2+v)^2/2 + int W ]
        const auto q_up = [&](double v) {
          const double mv = majorant_value(maj, kLn2 + v);
          double wint = 0.0;
          for (const auto& m : maj.parts) wint += w_upper(m, v, kLn2);
          return static_cast<double>(std::max<std::size_t>(1, k_parts)) *
                 (0.5 * mv * mv + wint);
        };
        const auto f = [&](double x) {
          return std::pow(x, -0.5 * p) * std::pow(q_up(std::log(x)), 0.5 * p);
        };
        bool finite = true;
        for (const auto& m : maj.parts)
          if (m.c == 0.0 && 2.0 * m.q <= 1.0) finite = false;
        quad::QuadResult ntail;
        if (finite && p > 2.0)
          ntail = quad::integrate_halfline(f, static_cast<double>(L), 1e-9,
                                           quad::Decay::power(0.5 * p));
        if (finite && p > 2.0 && ntail.converged) {
          double delta_sum = pairwise_reduce(col_up_delta);
          if (set_tail_bounded(delta_sum + ntail.value + ntail.error)) break;
        }
      }
      if (minorant &&
          set_diverges_if(series_diverges(
              0.5 * p + p * minorant->c, p * minorant->q)))
        break;
      out.tail_kind = SeriesVerdict::TailKind::Unknown;
      out.verdict = SeriesVerdict::Verdict::Inconclusive;
      break;
    }
  }
  return out;
}

SignedTraceBound signed_trace_bound(const measure::MeasureSpec& spec,
                                    std::int64_t length, int check_n,
                                    int n_vectors, double budget, Exec exec) {
  require_valid(spec);
  const auto parts = measure::hahn_decompose(spec);
  const auto cls = bounds::classify(parts.total_variation, 512, exec);
  if (cls.verdict == bounds::Verdict::Unbounded)
    throw std::invalid_argument(
        "signed_trace_bound: H_|mu| is unbounded; the bound does not apply");

  SignedTraceBound out;
  out.series = schatten_series(parts.total_variation, SeriesKind::TraceCond,
                               0.0, length, exec);
  out.verdict = out.series.verdict;
  out.infinite = out.series.verdict == SeriesVerdict::Verdict::Diverges;
  if (out.series.tail_kind == SeriesVerdict::TailKind::Bounded)
    out.bound = out.series.partial_sum + out.series.tail.upper;
  else
    out.bound = out.series.partial_sum;

  // form inequality x^T H_mu x <= x^T H_|mu| x on random unit vectors
  const auto h_mu = matrix::build_truncation(spec, check_n, 1e-10, exec);
  const auto h_tv =
      matrix::build_truncation(parts.total_variation, check_n, 1e-10, exec);
  std::mt19937 rng(20250810u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  std::vector<double> x(static_cast<std::size_t>(check_n)),
      y(static_cast<std::size_t>(check_n));
  for (int v = 0; v < n_vectors; ++v) {
    double nrm = 0.0;
    for (auto& xi : x) {
      xi = gauss(rng);
      nrm += xi * xi;
    }
    nrm = std::sqrt(nrm);
    for (auto& xi : x) xi /= nrm;
    h_mu.entries.matvec(x, y, exec);
    double q_mu = 0.0;
    for (int i = 0; i < check_n; ++i)
      q_mu += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    h_tv.entries.matvec(x, y, exec);
    double q_tv = 0.0;
    for (int i = 0; i < check_n; ++i)
      q_tv += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    worst = std::max(worst, q_mu - q_tv);
  }
  out.form_worst_violation = worst;
  out.form_inequality_ok = worst <= budget;
  return out;
}

DominatingG default_g_for(const measure::MeasureSpec& spec) {
  if (!measure::is_density_only(spec))
    throw std::invalid_argument("default_g_for: spec carries point masses");
  struct Piece {
    double D;
    double p;
    std::function<double(double)> g;
  };
  std::vector<Piece> pieces;
  for (const auto& term : spec.terms) {
    if (term.coef == 0.0) continue;
    const double cf = std::abs(term.coef);
    const bool ok = std::visit(
        [&](const auto& a) -> bool {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, measure::PowerDensity>) {
            if (a.p > 0.0)
              pieces.push_back({cf, a.p, [](double) { return 1.0; }});
            // p == 0 (Lebesgue): eta - eta0 vanishes, nothing to dominate
            return a.p >= 0.0;
          } else if constexpr (std::is_same_v<T, measure::LogDensity>) {
            pieces.push_back({cf, 1.0, [](double) { return 1.0; }});
            return true;
          } else if constexpr (std::is_same_v<T, measure::ExponentialDensity>) {
            if (a.a > 0.0)
              pieces.push_back({cf * a.a, 1.0, [](double) { return 1.0; }});
            return true;
          } else if constexpr (std::is_same_v<T, measure::ShiftedPowerDensity>) {
            if (a.alpha == 0.0) return true;
            const double al = a.alpha;
            if (a.sign < 0) {
              pieces.push_back({cf * al, 1.0, [](double) { return 1.0; }});
            } else {
              pieces.push_back({cf * al, 1.0, [al](double y) {
                                  return std::pow(1.0 + y / kLn2,
                                                  std::max(0.0, al - 1.0));
                                }});
            }
            return true;
          } else if constexpr (std::is_same_v<T, measure::CoshExpDensity>) {
            pieces.push_back(
                {cf * (a.a + std::abs(a.omega)), 1.0, [](double) { return 1.0; }});
            return true;
          } else if constexpr (std::is_same_v<T, measure::ExpPowerDensity>) {
            const double aa = a.a, pp = a.p;
            pieces.push_back({cf * aa, pp, [aa, pp](double y) {
                                return std::exp(aa * std::pow(y / kLn2, pp));
                              }});
            return true;
          } else {
            return false;
          }
        },
        term.atom);
    if (!ok)
      throw std::invalid_argument(
          "default_g_for: no dominating-function preset for this atom");
  }
  DominatingG out;
  if (pieces.empty()) {
    out.D = 0.0;
    out.p = 1.0;
    out.g = [](double) { return 1.0; };
    out.name = "zero (density equals its limit)";
    return out;
  }
  double pmin = pieces.front().p;
  for (const auto& pc : pieces) pmin = std::min(pmin, pc.p);
  out.p = pmin;
  out.D = 1.0;
  out.g = [pieces, pmin](double y) {
    double s = 0.0;
    for (const auto& pc : pieces)
      s += pc.D * pc.g(y) * std::pow(y / kLn2, pc.p - pmin);
    return s;
  };
  out.name = "family preset";
  return out;
}

WeightDiffReport weight_diff_check(const measure::MeasureSpec& spec,
                                   const DominatingG& g, double y_max) {
  require_valid(spec);
  if (!measure::is_density_only(spec))
    throw std::invalid_argument("weight_diff_check: spec carries point masses");
  const auto eta0_opt = measure::density_limit_at_zero(spec);
  if (!eta0_opt)
    throw std::invalid_argument(
        "weight_diff_check: density has no finite limit at 0+");
  const auto mono = measure::density_monotonicity(spec);
  if (mono == measure::Monotonicity::None)
    throw std::invalid_argument(
        "weight_diff_check: density is not monotone toward eta(0+)");
  if (mono == measure::Monotonicity::Unknown) {
    // assert monotonicity on a grid
    double prev = measure::density_value(spec, 1e-6);
    int dir = 0;
    for (int i = 1; i <= 200; ++i) {
      const double t = 1e-6 * std::pow(2.0e8, i / 200.0);
      const double v = measure::density_value(spec, t);
      const int d = (v > prev + 1e-14) ? 1 : (v < prev - 1e-14 ? -1 : 0);
      if (d != 0 && dir != 0 && d != dir)
        throw std::invalid_argument(
            "weight_diff_check: density fails the monotonicity grid check");
      if (d != 0) dir = d;
      prev = v;
    }
  }

  WeightDiffReport rep;
  rep.eta0 = *eta0_opt;
  rep.p = g.p;
  rep.eta_ineq_1_pass = true;
  rep.eta_ineq_2_pass = true;

  // grids
  std::vector<double> xs, ys;
  for (int i = 0; i <= 47; ++i)
    xs.push_back(kLn2 * std::pow(60.0 / kLn2, i / 47.0));
  for (int i = 0; i <= 63; ++i)
    ys.push_back(1e-4 * std::pow(y_max / 1e-4, i / 63.0));

  // eta-ineq-2 and the implied ineq-1 dominating function
  // g1(y) = max(g(y), D (y/ln2)^p g(y))
  for (const double x : xs) {
    for (const double y : ys) {
      const double dev = std::abs(measure::density_value(spec, y / x) - rep.eta0);
      const double gy = g.g(y);
      const double rhs2 = g.D * std::pow(y / x, g.p) * gy;
      const double g1 = std::max(gy, g.D * std::pow(y / kLn2, g.p) * gy);
      const double slack = 1e-9 * (1.0 + dev) + 1e-300;
      if (dev > rhs2 + slack) {
        rep.eta_ineq_2_pass = false;
        if (!rep.violation) rep.violation = {x, y};
      }
      if (dev > g1 + slack) {
        rep.eta_ineq_1_pass = false;
        if (!rep.violation) rep.violation = {x, y};
      }
    }
  }

  // D~ = D int y^p g(y) e^{-y} dy
  const auto integrand = [&g](double y) {
    return std::pow(y, g.p) * g.g(y) * std::exp(-y);
  };
  const quad::QuadResult dt =
      quad::integrate_halfline(integrand, 0.0, 1e-10,
                               quad::Decay::exponential(0.2));
  if (!dt.converged)
    throw NumericError("weight_diff_check: D~ quadrature failed", dt.value,
                       dt.error);
  rep.d_tilde = g.D * (dt.value + dt.error);

  // transform-side checks on the x grid
  bool nonneg = true, nonpos = true;
  for (const double x : xs) {
    const double dev = x * measure::laplace(spec, x, 1e-10).value - rep.eta0;
    rep.sup_deviation = std::max(rep.sup_deviation, std::abs(dev));
    if (dev < -1e-10) nonneg = false;
    if (dev > 1e-10) nonpos = false;
    if (std::abs(dev) > rep.d_tilde * std::pow(x, -g.p) * (1.0 + 1e-6) + 1e-12)
      rep.eta_ineq_2_pass = false;
  }
  rep.sign_pattern = nonneg ? ">=0" : (nonpos ? "<=0" : "mixed");
  return rep;
}

namespace {

// grid certificate gamma1 eta1 >= gamma2 eta2 for density-only specs
bool dominates_on_grid(const measure::MeasureSpec& s1,
                       const measure::MeasureSpec& s2, double g1, double g2) {
  if (!measure::is_density_only(s1) || !measure::is_density_only(s2))
    return false;
  for (int i = 0; i <= 600; ++i) {
    const double t = 1e-8 * std::pow(2.0e10, i / 600.0);  // up to 200
    const double a = g1 * measure::density_value(s1, t);
    const double b = g2 * measure::density_value(s2, t);
    if (a - b < -1e-12 * (std::abs(a) + std::abs(b) + 1.0)) return false;
  }
  return true;
}

// head-equality window: densities agree on [0, eps)
double equal_head_eps(const measure::MeasureSpec& s1,
                      const measure::MeasureSpec& s2, double g1, double g2) {
  if (!measure::is_density_only(s1) || !measure::is_density_only(s2))
    return 0.0;
  for (const double eps : {2.0, 1.0, 0.5, 0.25}) {
    bool equal = true;
    for (int i = 1; i <= 64; ++i) {
      const double t = eps * i / 65.0;
      const double a = g1 * measure::density_value(s1, t);
      const double b = g2 * measure::density_value(s2, t);
      if (std::abs(a - b) > 1e-13 * (std::abs(a) + std::abs(b) + 1.0)) {
        equal = false;
        break;
      }
    }
    if (equal) return eps;
  }
  return 0.0;
}

std::optional<measure::TransformMajorant> difference_majorant(
    const measure::MeasureSpec& diff, const measure::MeasureSpec& s1,
    const measure::MeasureSpec& s2, double g1, double g2,
    bool positive_measure) {
  if (!positive_measure) return std::nullopt;
  // equal heads: mu^(s) <= 2^eps mu^(ln 2) e^{-eps s}
  const double eps = equal_head_eps(s1, s2, g1, g2);
  if (eps > 0.0) {
    const double k = std::pow(2.0, eps) *
                     measure::laplace(diff, kLn2, 1e-10).value;
    if (k > 0.0 && std::isfinite(k))
      return measure::TransformMajorant{k * 1.0000001, 0.0, eps};
  }
  // matched eta(0+): |x mu^_d(x)| <= sum gamma_i D~_i x^{-p_i}
  const auto e1 = measure::density_limit_at_zero(s1);
  const auto e2 = measure::density_limit_at_zero(s2);
  if (!e1 || !e2) return std::nullopt;
  if (std::abs(g1 * *e1 - g2 * *e2) > 1e-13 * (g1 * *e1 + g2 * *e2 + 1.0))
    return std::nullopt;
  try {
    const DominatingG gg1 = default_g_for(s1);
    const DominatingG gg2 = default_g_for(s2);
    const WeightDiffReport r1 = weight_diff_check(s1, gg1);
    const WeightDiffReport r2 = weight_diff_check(s2, gg2);
    if (!r1.eta_ineq_2_pass || !r2.eta_ineq_2_pass) return std::nullopt;
    const double p = std::min(gg1.p, gg2.p);
    const double k = g1 * r1.d_tilde * std::pow(kLn2, -(gg1.p - p)) +
                     g2 * r2.d_tilde * std::pow(kLn2, -(gg2.p - p));
    return measure::TransformMajorant{k, p + 1.0, 0.0};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

DifferenceDiagnostics difference_operator(const measure::MeasureSpec& spec1,
                                          const measure::MeasureSpec& spec2,
                                          double gamma1, double gamma2, int n,
                                          Exec exec) {
  require_valid(spec1);
  require_valid(spec2);
  measure::MeasureSpec diff;
  for (measure::Term t : spec1.terms) {
    t.coef *= gamma1;
    if (t.coef != 0.0) diff.terms.push_back(std::move(t));
  }
  for (measure::Term t : spec2.terms) {
    t.coef *= -gamma2;
    if (t.coef != 0.0) diff.terms.push_back(std::move(t));
  }

  DifferenceDiagnostics out;
  out.difference = matrix::build_truncation(diff, n, 1e-10, exec);
  const spectral::SpectralReport rep = spectral::eig_sym(out.difference.entries);
  out.min_eigenvalue = rep.eigenvalues.back();
  out.trace = rep.trace;
  out.trace_norm_lower = rep.trace_norm_lower;
  const double budget =
      n * out.difference.entry_error_bound + 1e-10 * (1.0 + rep.hs_norm);
  out.psd = out.min_eigenvalue >= -budget;
  out.positive_measure = dominates_on_grid(spec1, spec2, gamma1, gamma2);

  // the partial sum is meaningful for any signed difference; rigorous tails
  // only attach when the difference is a certified positive measure
  const auto maj =
      difference_majorant(diff, spec1, spec2, gamma1, gamma2,
                          out.positive_measure);
  out.trace_series = schatten_series(diff, SeriesKind::TraceCond, 0.0, n, exec,
                                     maj, /*assume_positive=*/true);

  if (out.positive_measure) {
    out.termwise_trace_ok = true;
    for (const std::int64_t m : {std::int64_t{2}, std::int64_t{3},
                                 std::int64_t{17}, std::int64_t{101},
                                 static_cast<std::int64_t>(n) + 1}) {
      if (m > n + 1) continue;
      const double lhs = out.difference.at(m, m);
      const double rhs = diag_term(diff, m, 1e-10);
      if (lhs != rhs) out.termwise_trace_ok = false;
    }
  }
  return out;
}

SpectrumPrediction spectrum_predict(const measure::MeasureSpec& spec,
                                    int evidence_n, Exec exec) {
  const DominatingG g = default_g_for(spec);
  SpectrumPrediction out;
  out.hypothesis_report = weight_diff_check(spec, g);
  out.eta_zero_plus = out.hypothesis_report.eta0;
  out.ess_predicted = out.hypothesis_report.eta_ineq_1_pass;
  if (out.ess_predicted)
    out.sigma_ess = {0.0, out.eta_zero_plus * kPi};
  if (out.hypothesis_report.eta_ineq_2_pass && out.eta_zero_plus > 0.0)
    out.sigma_ac = std::make_pair(0.0, out.eta_zero_plus * kPi);

  // finite-truncation evidence (non-probative)
  out.evidence_n = evidence_n;
  const auto trunc = matrix::build_truncation(spec, evidence_n, 1e-10, exec);
  out.evidence_lambda_max = spectral::lambda_max(trunc.entries, 1e-8, exec);
  if (out.eta_zero_plus > 0.0)
    out.lambda_max_within_bound =
        out.evidence_lambda_max <= out.eta_zero_plus * kPi * (1.0 + 1e-3);
  else
    out.lambda_max_within_bound = true;
  const auto rep = spectral::eig_sym(trunc.entries);
  const double hi = out.eta_zero_plus * kPi;
  const double budget = 1e-6 * (1.0 + std::abs(out.evidence_lambda_max));
  for (const double lam : rep.eigenvalues) {
    if (lam >= -budget && lam <= hi + budget)
      ++out.eigenvalues_inside;
    else
      ++out.eigenvalues_outside;
  }
  return out;
}

// ---- JSON ----

namespace {

const char* series_kind_name(SeriesKind k) {
  switch (k) {
    case SeriesKind::TraceCond: return "trace-cond";
    case SeriesKind::HS: return "hs";
    case SeriesKind::ColP: return "col-p";
    case SeriesKind::DiagP: return "diag-p";
    default: return "entry-p";
  }
}

const char* verdict_name(SeriesVerdict::Verdict v) {
  switch (v) {
    case SeriesVerdict::Verdict::Converges: return "converges";
    case SeriesVerdict::Verdict::Diverges: return "diverges";
    default: return "inconclusive";
  }
}

}  // namespace

nlohmann::json to_json(const SeriesVerdict& v) {
  nlohmann::json tail;
  switch (v.tail_kind) {
    case SeriesVerdict::TailKind::Bounded:
      tail = {{"lower", v.tail.lower}, {"upper", v.tail.upper}};
      break;
    case SeriesVerdict::TailKind::Heuristic:
      tail = {{"lower", v.tail.lower},
              {"upper", v.tail.upper},
              {"heuristic", true}};
      break;
    case SeriesVerdict::TailKind::Diverges:
      tail = "diverges";
      break;
    default:
      tail = "unknown";
      break;
  }
  return nlohmann::json{{"kind", series_kind_name(v.kind)},
                        {"p", v.p},
                        {"length", v.length},
                        {"partial_sum", v.partial_sum},
                        {"tail", tail},
                        {"verdict", verdict_name(v.verdict)}};
}

nlohmann::json to_json(const WeightDiffReport& r) {
  nlohmann::json j{{"eta_ineq_1_pass", r.eta_ineq_1_pass},
                   {"eta_ineq_2_pass", r.eta_ineq_2_pass},
                   {"eta0", r.eta0},
                   {"sup_deviation", r.sup_deviation},
                   {"sign_pattern", r.sign_pattern},
                   {"d_tilde", r.d_tilde},
                   {"p", r.p}};
  if (r.violation)
    j["violation"] = {r.violation->first, r.violation->second};
  else
    j["violation"] = nullptr;
  return j;
}

nlohmann::json to_json(const SpectrumPrediction& p) {
  nlohmann::json j{{"eta_zero_plus", p.eta_zero_plus},
                   {"hypothesis_report", to_json(p.hypothesis_report)},
                   {"evidence_n", p.evidence_n},
                   {"evidence_lambda_max", p.evidence_lambda_max},
                   {"lambda_max_within_bound", p.lambda_max_within_bound},
                   {"eigenvalues_inside", p.eigenvalues_inside},
                   {"eigenvalues_outside", p.eigenvalues_outside}};
  if (p.ess_predicted)
    j["sigma_ess"] = {p.sigma_ess.first, p.sigma_ess.second};
  else
    j["sigma_ess"] = "not predicted";
  if (p.sigma_ac)
    j["sigma_ac"] = {p.sigma_ac->first, p.sigma_ac->second};
  else
    j["sigma_ac"] = "not predicted";
  return j;
}

nlohmann::json to_json(const DifferenceDiagnostics& d) {
  return nlohmann::json{
      {"n", d.difference.n},
      {"min_eigenvalue", d.min_eigenvalue},
      {"trace", d.trace},
      {"trace_norm_lower", d.trace_norm_lower},
      {"trace_norm_caveat",
       "sum |lambda_i| of the truncation; not a bound for the infinite "
       "operator when the difference is signed"},
      {"psd", d.psd},
      {"positive_measure", d.positive_measure},
      {"termwise_trace_ok", d.termwise_trace_ok},
      {"series", to_json(d.trace_series)}};
}

}  // namespace helson::schatten

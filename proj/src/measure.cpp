#include "helson/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace helson::measure {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- Gauss-Legendre nodes for the half-period oscillatory pieces ----

struct GLRule {
  std::vector<double> x;  // nodes on (-1, 1)
  std::vector<double> w;
};

GLRule make_gl(int n) {
  GLRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    r.w[n - 1 - i] = r.w[i];
  }
  return r;
}

const GLRule& gl16() {
  static const GLRule r = make_gl(16);
  return r;
}
const GLRule& gl32() {
  static const GLRule r = make_gl(32);
  return r;
}

double gl_apply(const GLRule& r, const std::function<double(double)>& f,
                double a, double b) {
  const double c = 0.5 * (a + b), d = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + d * r.x[i]);
  return d * s;
}

// Integrates a smooth piece with an embedded error estimate; falls back to
// tanh-sinh if the estimate misses tol.
double integrate_piece(const std::function<double(double)>& f, double a,
                       double b, double tol, double* err) {
  const double coarse = gl_apply(gl16(), f, a, b);
  const double fine = gl_apply(gl32(), f, a, b);
  const double diff = std::abs(fine - coarse);
  if (diff <= tol) {
    *err = diff + std::abs(fine) * 1e-15;
    return fine;
  }
  const quad::QuadResult r = quad::integrate_finite(f, a, b, tol);
  if (!r.converged)
    throw NumericError("oscillatory piece quadrature did not converge", r.value,
                       r.error);
  *err = r.error;
  return r.value;
}

// ---- oscillatory half-period machinery ----

struct Piece {
  double lo, hi;
  bool flip;  // integrate -trig instead of trig (negative part)
};

// k-th half-period piece of trig on (0, inf)
Piece osc_piece(Trig trig, int k) {
  if (trig == Trig::Sin) return {k * kPi, (k + 1) * kPi, (k % 2) != 0};
  if (k == 0) return {0.0, 0.5 * kPi, false};
  return {(k - 0.5) * kPi, (k + 0.5) * kPi, (k % 2) != 0};
}

// Laplace transform of t^p trig(t) (signed, part = nullopt) or of
// t^p max(+-trig(t), 0) (one Hahn part), over the window [wlo, whi).
// Summed per half-period; remainder controlled by the exponential tail
// bound int_T^inf t^p e^{-st} dt <= (2/s) T^p e^{-sT} for T >= 2p/s.
double osc_laplace(double p, Trig trig, std::optional<Part> part, double s,
                   double wlo, double whi, double tol, double* err_out) {
  // t^p e^{-st} peaks at t = p/s with log-value p ln(p/s) - p
  if (p * std::log(std::max(p / s, 1.0)) - p > 700.0)
    throw NumericError("oscillatory transform overflows the double range", 0.0,
                       std::numeric_limits<double>::infinity());
  double total = 0.0;
  double err = 0.0;
  const double piece_tol = tol / 64.0;
  bool tail_cut = false;
  double tail_bound = 0.0;
  for (int k = 0; k < 100000; ++k) {
    Piece pc = osc_piece(trig, k);
    if (pc.lo >= whi) break;
    if (part.has_value()) {
      const bool want_flip = (*part == Part::Neg);
      if (pc.flip != want_flip) {
        // piece belongs to the other Hahn part
      } else {
        const double lo = std::max(pc.lo, wlo);
        const double hi = std::min(pc.hi, whi);
        if (hi > lo) {
          const double sgn = want_flip ? -1.0 : 1.0;
          const auto f = [p, trig, s, sgn](double t) {
            const double tr = (trig == Trig::Sin) ? std::sin(t) : std::cos(t);
            return std::pow(t, p) * (sgn * tr) * std::exp(-s * t);
          };
          double perr = 0.0;
          total += integrate_piece(f, lo, hi, piece_tol, &perr);
          err += perr;
        }
      }
    } else {
      const double lo = std::max(pc.lo, wlo);
      const double hi = std::min(pc.hi, whi);
      if (hi > lo) {
        const auto f = [p, trig, s](double t) {
          const double tr = (trig == Trig::Sin) ? std::sin(t) : std::cos(t);
          return std::pow(t, p) * tr * std::exp(-s * t);
        };
        double perr = 0.0;
        total += integrate_piece(f, lo, hi, piece_tol, &perr);
        err += perr;
      }
    }
    const double T = pc.hi;
    if (T >= whi) break;
    if (T >= 2.0 * p / s && T >= 1.0) {
      tail_bound = (2.0 / s) * std::pow(T, p) * std::exp(-s * T);
      if (tail_bound < 0.25 * tol) {
        tail_cut = true;
        break;
      }
    }
  }
  *err_out = err + (tail_cut ? tail_bound : 0.0);
  return total;
}

// ---- plain density evaluation per atom ----

double atom_density(const MeasureAtom& atom, double t) {
  return std::visit(
      [t](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          throw std::invalid_argument("point mass has no density");
        } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
          return std::exp(-a.a * t);
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          return std::pow(t, a.p);
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          return std::pow(1.0 + t, a.sign * a.alpha);
        } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
          return std::exp(-a.a * t) * std::cosh(a.omega * t);
        } else if constexpr (std::is_same_v<T, LogDensity>) {
          return std::log1p(t);
        } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
          return std::exp(a.a * std::pow(t, a.p));
        } else if constexpr (std::is_same_v<T, OscillatoryDensity>) {
          const double tr = (a.trig == Trig::Sin) ? std::sin(t) : std::cos(t);
          return std::pow(t, a.p) * tr;
        } else if constexpr (std::is_same_v<T, OscillatoryPartDensity>) {
          double tr = (a.trig == Trig::Sin) ? std::sin(t) : std::cos(t);
          if (a.part == Part::Neg) tr = -tr;
          return std::pow(t, a.p) * std::max(tr, 0.0);
        } else {  // TabulatedDensity
          const auto& smp = a.samples;
          if (smp.empty()) return 0.0;
          if (t <= smp.front().first) return smp.front().second;
          if (t >= smp.back().first) {
            if (a.tail)
              return a.tail->A * std::exp(-a.tail->lambda * t);
            return 0.0;
          }
          auto it = std::upper_bound(
              smp.begin(), smp.end(), t,
              [](double v, const auto& s) { return v < s.first; });
          const auto& hi = *it;
          const auto& lo = *(it - 1);
          const double u = (t - lo.first) / (hi.first - lo.first);
          return lo.second + u * (hi.second - lo.second);
        }
      },
      atom);
}

// closed form for int_lo^hi e^{-r t} dt (hi may be +inf)
double windowed_exp_integral(double r, double lo, double hi) {
  const double head = std::exp(-r * lo);
  if (hi == kInf) return head / r;
  return (head - std::exp(-r * hi)) / r;
}

// exact transform of the piecewise-linear tabulated density
double tabulated_laplace(const TabulatedDensity& tab, double s, double lo,
                         double hi) {
  const auto& smp = tab.samples;
  if (smp.empty()) return 0.0;
  double total = 0.0;
  // segment (alpha + beta t) over [t1, t2):
  // int = ((alpha+beta t1)e^{-s t1} - (alpha+beta t2)e^{-s t2})/s
  //       + beta (e^{-s t1} - e^{-s t2})/s^2
  const auto seg = [s](double t1, double t2, double v1, double v2) {
    const double beta = (v2 - v1) / (t2 - t1);
    const double alpha = v1 - beta * t1;
    const double e1 = std::exp(-s * t1), e2 = std::exp(-s * t2);
    return ((alpha + beta * t1) * e1 - (alpha + beta * t2) * e2) / s +
           beta * (e1 - e2) / (s * s);
  };
  // constant extension on (0, first sample)
  {
    const double ext_hi = std::min(smp.front().first, hi);
    if (lo < ext_hi)
      total += smp.front().second * windowed_exp_integral(s, lo, ext_hi);
  }
  for (std::size_t i = 0; i + 1 < smp.size(); ++i) {
    double t1 = smp[i].first, t2 = smp[i + 1].first;
    double v1 = smp[i].second, v2 = smp[i + 1].second;
    const double cl = std::max(t1, lo), ch = std::min(t2, hi);
    if (ch <= cl) continue;
    // clip linearly
    const double beta = (v2 - v1) / (t2 - t1);
    const double w1 = v1 + beta * (cl - t1);
    const double w2 = v1 + beta * (ch - t1);
    total += seg(cl, ch, w1, w2);
  }
  if (tab.tail) {
    const double tstart = std::max(smp.back().first, lo);
    if (hi > tstart)
      total += tab.tail->A *
               windowed_exp_integral(s + tab.tail->lambda, tstart, hi);
  }
  return total;
}

LaplaceValue quadrature_transform(const std::function<double(double)>& density,
                                  double s, double lo, double hi, double tol) {
  const auto f = [&density, s](double t) {
    return density(t) * std::exp(-s * t);
  };
  quad::QuadResult r;
  if (hi == kInf) {
    r = quad::integrate_halfline(f, lo, tol, quad::Decay::exponential(s * 0.5));
  } else {
    r = quad::integrate_finite(f, lo, hi, tol);
  }
  if (!r.converged)
    throw NumericError("laplace quadrature did not converge", r.value, r.error);
  if (r.error > tol)
    throw NumericError("laplace quadrature missed the requested tolerance",
                       r.value, r.error);
  return {r.value, r.error, LaplaceMethod::Quadrature};
}

int atom_sign(const MeasureAtom& atom) {
  // +1: positive measure atom; 0: signed (mixed-sign density)
  return std::visit(
      [](const auto& a) -> int {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, OscillatoryDensity>) {
          return 0;
        } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
          bool nonneg = true, nonpos = true;
          for (const auto& [t, v] : a.samples) {
            (void)t;
            if (v < 0.0) nonneg = false;
            if (v > 0.0) nonpos = false;
          }
          if (a.tail && a.tail->A < 0.0) nonneg = false;
          if (a.tail && a.tail->A > 0.0) nonpos = false;
          if (nonneg) return 1;
          if (nonpos) return -1;
          return 0;
        } else {
          return 1;
        }
      },
      atom);
}

}  // namespace

bool MeasureSpec::positive() const {
  for (const auto& t : terms) {
    const int sg = atom_sign(t.atom);
    if (sg == 0 && t.coef != 0.0) return false;
    if (t.coef * sg < 0.0) return false;
  }
  return true;
}

ValidationReport validate(const MeasureSpec& spec) {
  ValidationReport rep;
  const auto reject = [&rep](std::size_t i, std::string why) {
    rep.ok = false;
    rep.issues.push_back({i, std::move(why)});
  };
  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    const Term& term = spec.terms[i];
    if (!std::isfinite(term.coef)) reject(i, "non-finite coefficient");
    if (term.lo < 0.0 || !(term.hi > term.lo))
      reject(i, "invalid support window");
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, PointMass>) {
            if (a.c == 0.0)
              reject(i, "c=0 point mass");  // H_{delta_0} is not an operator
            else if (a.c < 0.0)
              reject(i, "point mass location must be > 0");
            if (!(a.w > 0.0)) reject(i, "point mass needs positive mass");
          } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
            if (a.a < 0.0) reject(i, "exponential rate must be >= 0");
          } else if constexpr (std::is_same_v<T, PowerDensity>) {
            if (a.p <= -1.0)
              reject(i, "divergent at ln 2 (power density needs p > -1)");
            else if (a.p < 0.0) {
              std::ostringstream os;
              os << "term " << i << ": unbounded-family";
              rep.flags.push_back(os.str());
            }
          } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
            if (a.alpha < 0.0) reject(i, "shifted power needs alpha >= 0");
            if (a.sign != 1 && a.sign != -1)
              reject(i, "shifted power sign must be +1 or -1");
          } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
            if (!(a.a >= std::abs(a.omega)))
              reject(i, "cosh-exp needs a >= |omega|");
          } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
            if (!(a.a > 0.0)) reject(i, "exp-power needs a > 0");
            if (!(a.p > 0.0 && a.p < 1.0))
              reject(i, "exp-power needs p in (0,1)");
          } else if constexpr (std::is_same_v<T, OscillatoryDensity>) {
            if (!(a.p > 0.0)) reject(i, "oscillatory density needs p > 0");
          } else if constexpr (std::is_same_v<T, OscillatoryPartDensity>) {
            if (!(a.p > 0.0)) reject(i, "oscillatory part needs p > 0");
          } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
            if (a.samples.empty())
              reject(i, "tabulated density needs samples");
            for (std::size_t k = 0; k + 1 < a.samples.size(); ++k)
              if (!(a.samples[k].first < a.samples[k + 1].first)) {
                reject(i, "tabulated samples must be strictly increasing in t");
                break;
              }
            for (const auto& [t, v] : a.samples)
              if (!std::isfinite(t) || !std::isfinite(v) || t < 0.0) {
                reject(i, "tabulated samples must be finite, t >= 0");
                break;
              }
            if (!a.tail)
              reject(i,
                     "tabulated density without exponential-decay tail "
                     "descriptor");
            else if (a.tail->lambda < 0.0)
              reject(i, "tabulated tail decay rate must be >= 0");
          }
        },
        term.atom);
  }
  // admissibility: mu^ must be finite at s = ln 2; for the built-in families
  // the structural checks above are equivalent, but evaluate once to be sure.
  if (rep.ok && !spec.terms.empty()) {
    try {
      const LaplaceValue v = laplace(spec, kLn2, 1e-6);
      if (!std::isfinite(v.value)) reject(0, "divergent at ln 2");
    } catch (const NumericError&) {
      reject(0, "laplace transform not evaluable at ln 2");
    }
  }
  return rep;
}

LaplaceValue laplace_term(const Term& term, double s, double tol) {
  const double lo = term.lo;
  const double hi = term.hi;
  LaplaceValue out = std::visit(
      [&](const auto& a) -> LaplaceValue {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          const double v =
              (a.c >= lo && a.c < hi) ? a.w * std::exp(-a.c * s) : 0.0;
          return {v, 0.0, LaplaceMethod::ClosedForm};
        } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
          return {windowed_exp_integral(a.a + s, lo, hi), 0.0,
                  LaplaceMethod::ClosedForm};
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          if (a.p == 0.0)
            return {windowed_exp_integral(s, lo, hi), 0.0,
                    LaplaceMethod::ClosedForm};
          if (lo == 0.0 && hi == kInf)
            return {quad::gamma_fn(a.p + 1.0) * std::pow(s, -(a.p + 1.0)), 0.0,
                    LaplaceMethod::ClosedForm};
          const double p = a.p;
          return quadrature_transform(
              [p](double t) { return std::pow(t, p); }, s, lo, hi, tol);
        } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
          const double v = 0.5 * (windowed_exp_integral(a.a - a.omega + s, lo, hi) +
                                  windowed_exp_integral(a.a + a.omega + s, lo, hi));
          return {v, 0.0, LaplaceMethod::ClosedForm};
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          const double e = a.sign * a.alpha;
          if (e > 0.0) {
            // peak of alpha ln(1+t) - s t; past ~700 the integrand overflows
            const double tstar = std::max(0.0, e / s - 1.0);
            if (e * std::log1p(tstar) - s * tstar > 700.0)
              throw NumericError(
                  "shifted-power transform overflows the double range", 0.0,
                  std::numeric_limits<double>::infinity());
          }
          return quadrature_transform(
              [e](double t) { return std::pow(1.0 + t, e); }, s, lo, hi, tol);
        } else if constexpr (std::is_same_v<T, LogDensity>) {
          return quadrature_transform([](double t) { return std::log1p(t); },
                                      s, lo, hi, tol);
        } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
          const double aa = a.a, pp = a.p;
          // peak of a t^p - s t sits at t* = (a p / s)^{1/(1-p)}
          const double tstar = std::pow(aa * pp / s, 1.0 / (1.0 - pp));
          if (aa * std::pow(tstar, pp) - s * tstar > 700.0)
            throw NumericError(
                "exp-power transform overflows the double range", 0.0,
                std::numeric_limits<double>::infinity());
          const auto f = [aa, pp, s](double t) {
            return std::exp(aa * std::pow(t, pp) - s * t);
          };
          quad::QuadResult r;
          if (hi == kInf)
            r = quad::integrate_halfline(f, lo, tol,
                                         quad::Decay::exponential(s * 0.5));
          else
            r = quad::integrate_finite(f, lo, hi, tol);
          if (!r.converged)
            throw NumericError("laplace quadrature did not converge", r.value,
                               r.error);
          return {r.value, r.error, LaplaceMethod::Quadrature};
        } else if constexpr (std::is_same_v<T, OscillatoryDensity>) {
          double err = 0.0;
          const double v =
              osc_laplace(a.p, a.trig, std::nullopt, s, lo, hi, tol, &err);
          return {v, err, LaplaceMethod::Quadrature};
        } else if constexpr (std::is_same_v<T, OscillatoryPartDensity>) {
          double err = 0.0;
          const double v =
              osc_laplace(a.p, a.trig, a.part, s, lo, hi, tol, &err);
          return {v, err, LaplaceMethod::Quadrature};
        } else {  // TabulatedDensity
          return {tabulated_laplace(a, s, lo, hi), 0.0,
                  LaplaceMethod::ClosedForm};
        }
      },
      term.atom);
  out.value *= term.coef;
  out.abs_error_bound *= std::abs(term.coef);
  return out;
}

LaplaceValue laplace(const MeasureSpec& spec, double s, double tol) {
  if (!(s >= kLn2 - 1e-12))
    throw std::invalid_argument(
        "laplace: domain restricted to s >= ln 2 (admissibility)");
  LaplaceValue total{0.0, 0.0, LaplaceMethod::ClosedForm};
  const double term_tol =
      tol / static_cast<double>(std::max<std::size_t>(1, spec.terms.size()));
  for (const Term& term : spec.terms) {
    const LaplaceValue v = laplace_term(term, s, term_tol);
    total.value += v.value;
    total.abs_error_bound += v.abs_error_bound;
    if (v.method == LaplaceMethod::Quadrature)
      total.method = LaplaceMethod::Quadrature;
  }
  return total;
}

HahnParts hahn_decompose(const MeasureSpec& spec) {
  HahnParts out;
  for (const Term& term : spec.terms) {
    if (term.coef == 0.0) continue;
    if (const auto* osc = std::get_if<OscillatoryDensity>(&term.atom)) {
      // eta = t^p trig(t): split analytically on half-periods
      Term pos{std::abs(term.coef),
               OscillatoryPartDensity{osc->p, osc->trig, Part::Pos}, term.lo,
               term.hi};
      Term neg{std::abs(term.coef),
               OscillatoryPartDensity{osc->p, osc->trig, Part::Neg}, term.lo,
               term.hi};
      if (term.coef > 0.0) {
        out.plus.terms.push_back(pos);
        out.minus.terms.push_back(neg);
      } else {
        out.plus.terms.push_back(neg);
        out.minus.terms.push_back(pos);
      }
      out.total_variation.terms.push_back(pos);
      out.total_variation.terms.push_back(neg);
      continue;
    }
    const int sg = atom_sign(term.atom);
    if (sg == 0)
      throw std::invalid_argument(
          "hahn_decompose: mixed-sign tabulated atom not supported");
    const double signed_coef = term.coef * sg;
    Term t = term;
    t.coef = std::abs(term.coef);
    if (signed_coef > 0.0)
      out.plus.terms.push_back(t);
    else
      out.minus.terms.push_back(t);
    out.total_variation.terms.push_back(t);
  }
  return out;
}

MeasureSpec combine(const MeasureSpec& mu1, const MeasureSpec& mu2, double r) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("combine: r must lie in [0,1]");
  if (r == 1.0) return mu1;
  if (r == 0.0) return mu2;
  MeasureSpec out;
  for (Term t : mu1.terms) {
    t.coef *= r;
    out.terms.push_back(std::move(t));
  }
  for (Term t : mu2.terms) {
    t.coef *= (1.0 - r);
    out.terms.push_back(std::move(t));
  }
  return out;
}

namespace {

AsymptoticClass atom_asymptotic(const MeasureAtom& atom) {
  AsymptoticClass out;
  std::visit(
      [&out](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PowerDensity>) {
          if (a.p > 0.0) {
            out.kind = AsymptoticClass::Kind::TendsTo;
            out.limit = 0.0;
          } else if (a.p == 0.0) {
            out.kind = AsymptoticClass::Kind::TendsTo;
            out.limit = 1.0;
          } else {
            // s mu^(s) = Gamma(p+1) s^{-p} -> inf
            out.kind = AsymptoticClass::Kind::Diverges;
            out.rate_exponent = -a.p;
            out.rate_coef = quad::gamma_fn(a.p + 1.0);
          }
        } else if constexpr (std::is_same_v<T, PointMass> ||
                             std::is_same_v<T, LogDensity> ||
                             std::is_same_v<T, OscillatoryDensity> ||
                             std::is_same_v<T, OscillatoryPartDensity>) {
          out.kind = AsymptoticClass::Kind::TendsTo;
          out.limit = 0.0;
        } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
          out.kind = AsymptoticClass::Kind::Unknown;
        } else {
          // exponential-type densities: eta(0+) = 1
          out.kind = AsymptoticClass::Kind::TendsTo;
          out.limit = 1.0;
        }
      },
      atom);
  return out;
}

}  // namespace

AsymptoticClass asymptotic_class(const MeasureSpec& spec) {
  AsymptoticClass out;
  out.kind = AsymptoticClass::Kind::TendsTo;
  out.limit = 0.0;
  double top_exponent = 0.0;
  double top_coef = 0.0;
  bool has_divergent = false;
  bool has_unknown = false;
  for (const Term& term : spec.terms) {
    if (term.coef == 0.0) continue;
    AsymptoticClass ac = atom_asymptotic(term.atom);
    if (term.windowed() && term.lo > 0.0) {
      // transform restricted away from 0 is exponentially small in s
      ac.kind = AsymptoticClass::Kind::TendsTo;
      ac.limit = 0.0;
    }
    switch (ac.kind) {
      case AsymptoticClass::Kind::TendsTo:
        out.limit += term.coef * ac.limit;
        break;
      case AsymptoticClass::Kind::Diverges:
        // strictly lower-order divergent terms are dominated
        if (!has_divergent || ac.rate_exponent > top_exponent + 1e-12) {
          top_exponent = ac.rate_exponent;
          top_coef = term.coef * ac.rate_coef;
        } else if (std::abs(ac.rate_exponent - top_exponent) <= 1e-12) {
          top_coef += term.coef * ac.rate_coef;
        }
        has_divergent = true;
        break;
      default:
        has_unknown = true;
        break;
    }
  }
  if (has_unknown) {
    out.kind = AsymptoticClass::Kind::Unknown;
    // numeric trend from a sampled grid, labeled as such
    std::ostringstream os;
    os << "s*mu^(s) trend:";
    for (double s : {kLn2, 2.0, 5.0, 10.0, 20.0, 40.0}) {
      try {
        os << " " << s * laplace(spec, s, 1e-8).value;
      } catch (...) {
        os << " ?";
      }
    }
    out.note = os.str();
    return out;
  }
  if (has_divergent) {
    if (top_coef > 0.0) {
      out.kind = AsymptoticClass::Kind::Diverges;
      out.rate_exponent = top_exponent;
      out.rate_coef = top_coef;
    } else {
      out.kind = AsymptoticClass::Kind::Unknown;
      out.note = "divergent parts cancel or carry negative weight";
    }
    return out;
  }
  return out;
}

bool is_density_only(const MeasureSpec& spec) {
  for (const Term& t : spec.terms)
    if (std::holds_alternative<PointMass>(t.atom)) return false;
  return true;
}

double density_value(const MeasureSpec& spec, double t) {
  double v = 0.0;
  for (const Term& term : spec.terms) {
    if (t < term.lo || t >= term.hi) continue;
    v += term.coef * atom_density(term.atom, t);
  }
  return v;
}

std::optional<double> density_limit_at_zero(const MeasureSpec& spec) {
  double limit = 0.0;
  for (const Term& term : spec.terms) {
    if (term.coef == 0.0) continue;
    if (term.lo > 0.0) continue;  // no contribution near 0
    double l = 0.0;
    const bool known = std::visit(
        [&l](const auto& a) -> bool {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, PointMass>) {
            return false;
          } else if constexpr (std::is_same_v<T, PowerDensity>) {
            if (a.p > 0.0) {
              l = 0.0;
            } else if (a.p == 0.0) {
              l = 1.0;
            } else {
              return false;  // eta(0+) = +inf
            }
            return true;
          } else if constexpr (std::is_same_v<T, LogDensity> ||
                               std::is_same_v<T, OscillatoryDensity> ||
                               std::is_same_v<T, OscillatoryPartDensity>) {
            l = 0.0;
            return true;
          } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
            l = a.samples.empty() ? 0.0 : a.samples.front().second;
            return true;
          } else {
            l = 1.0;  // exponential-type families
            return true;
          }
        },
        term.atom);
    if (!known) return std::nullopt;
    limit += term.coef * l;
  }
  return limit;
}

Monotonicity density_monotonicity(const MeasureSpec& spec) {
  bool any_inc = false, any_dec = false;
  for (const Term& term : spec.terms) {
    if (term.coef == 0.0) continue;
    if (term.windowed()) return Monotonicity::Unknown;
    Monotonicity m = std::visit(
        [](const auto& a) -> Monotonicity {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, PointMass>) {
            return Monotonicity::Unknown;
          } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
            return a.a > 0.0 ? Monotonicity::Decreasing
                             : Monotonicity::Constant;
          } else if constexpr (std::is_same_v<T, PowerDensity>) {
            if (a.p > 0.0) return Monotonicity::Increasing;
            if (a.p == 0.0) return Monotonicity::Constant;
            return Monotonicity::Decreasing;
          } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
            if (a.alpha == 0.0) return Monotonicity::Constant;
            return a.sign > 0 ? Monotonicity::Increasing
                              : Monotonicity::Decreasing;
          } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
            // a >= |omega| makes e^{-at} cosh(omega t) nonincreasing
            return (a.a == 0.0 && a.omega == 0.0) ? Monotonicity::Constant
                                                  : Monotonicity::Decreasing;
          } else if constexpr (std::is_same_v<T, LogDensity>) {
            return Monotonicity::Increasing;
          } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
            return Monotonicity::Increasing;
          } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
            bool inc = true, dec = true;
            for (std::size_t k = 0; k + 1 < a.samples.size(); ++k) {
              if (a.samples[k].second > a.samples[k + 1].second) inc = false;
              if (a.samples[k].second < a.samples[k + 1].second) dec = false;
            }
            if (inc && dec) return Monotonicity::Constant;
            if (inc) return Monotonicity::Increasing;
            if (dec) return Monotonicity::Decreasing;
            return Monotonicity::None;
          } else {
            return Monotonicity::None;  // oscillatory
          }
        },
        term.atom);
    if (m == Monotonicity::Unknown || m == Monotonicity::None)
      return Monotonicity::Unknown;
    if (term.coef < 0.0) {
      if (m == Monotonicity::Increasing)
        m = Monotonicity::Decreasing;
      else if (m == Monotonicity::Decreasing)
        m = Monotonicity::Increasing;
    }
    if (m == Monotonicity::Increasing) any_inc = true;
    if (m == Monotonicity::Decreasing) any_dec = true;
  }
  if (any_inc && any_dec) return Monotonicity::Unknown;
  if (any_inc) return Monotonicity::Increasing;
  if (any_dec) return Monotonicity::Decreasing;
  return Monotonicity::Constant;
}

std::optional<TransformMajorant> transform_majorant(const Term& term) {
  // bound on |coef| * atom transform; restricting the support of a positive
  // atom only shrinks the transform, so the full-support bound stays valid
  const double k0 = std::abs(term.coef);
  std::optional<TransformMajorant> m = std::visit(
      [&](const auto& a) -> std::optional<TransformMajorant> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return TransformMajorant{a.w, 0.0, a.c};
        } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
          return TransformMajorant{1.0, 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          if (a.p <= -1.0) return std::nullopt;
          return TransformMajorant{quad::gamma_fn(a.p + 1.0), a.p + 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          if (a.sign < 0) return TransformMajorant{1.0, 1.0, 0.0};
          // (1+t)^alpha <= 2^alpha (1 + t^alpha):
          // mu^ <= 2^alpha (1 + Gamma(alpha+1)/(ln 2)^alpha) / s on s >= ln 2
          const double K = std::pow(2.0, a.alpha) *
                           (1.0 + quad::gamma_fn(a.alpha + 1.0) *
                                      std::pow(kLn2, -a.alpha));
          return TransformMajorant{K, 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
          return TransformMajorant{1.0, 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, LogDensity>) {
          return TransformMajorant{1.0, 2.0, 0.0};  // ln(1+t) <= t
        } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
          // increasing density: s mu^(s) is nonincreasing, so
          // mu^(s) <= (ln2 mu^(ln2)) / s
          Term full{1.0, ExpPowerDensity{a.a, a.p}};
          const double K = kLn2 * laplace_term(full, kLn2, 1e-10).value * 1.0000001;
          return TransformMajorant{K, 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, OscillatoryDensity> ||
                             std::is_same_v<T, OscillatoryPartDensity>) {
          // |t^p trig(t)| <= t^p
          return TransformMajorant{quad::gamma_fn(a.p + 1.0), a.p + 1.0, 0.0};
        } else {  // TabulatedDensity
          double M = 0.0;
          for (const auto& [t, v] : a.samples) {
            (void)t;
            M = std::max(M, std::abs(v));
          }
          if (a.tail) M = std::max(M, std::abs(a.tail->A));
          return TransformMajorant{M, 1.0, 0.0};
        }
      },
      term.atom);
  if (!m) return std::nullopt;
  m->K *= k0;
  return m;
}

std::optional<TransformMajorant> transform_minorant(const Term& term) {
  if (term.coef <= 0.0 || term.windowed()) return std::nullopt;
  std::optional<TransformMajorant> m = std::visit(
      [](const auto& a) -> std::optional<TransformMajorant> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return TransformMajorant{a.w, 0.0, a.c};
        } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
          return TransformMajorant{kLn2 / (a.a + kLn2), 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          if (a.p <= -1.0) return std::nullopt;
          return TransformMajorant{quad::gamma_fn(a.p + 1.0), a.p + 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          if (a.sign > 0) return TransformMajorant{1.0, 1.0, 0.0};
          return TransformMajorant{kLn2 / (a.alpha + kLn2), 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
          return TransformMajorant{kLn2 / (a.a + kLn2), 1.0, 0.0};
        } else if constexpr (std::is_same_v<T, LogDensity>) {
          // eta >= ln(2) on [1, inf)
          return TransformMajorant{kLn2, 1.0, 1.0};
        } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
          return TransformMajorant{1.0, 1.0, 0.0};  // eta >= 1
        } else {
          return std::nullopt;
        }
      },
      term.atom);
  if (!m) return std::nullopt;
  m->K *= term.coef;
  return m;
}

std::optional<ExpLowerWitness> exp_lower_witness(const MeasureAtom& atom) {
  return std::visit(
      [](const auto& a) -> std::optional<ExpLowerWitness> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ExponentialDensity>) {
          return ExpLowerWitness{1.0, a.a};
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          if (a.p == 0.0) return ExpLowerWitness{1.0, 0.0};
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          if (a.sign > 0) return ExpLowerWitness{1.0, 0.0};  // (1+t)^a >= 1
          return ExpLowerWitness{1.0, a.alpha};  // (1+t)^{-a} >= e^{-a t}
        } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
          return ExpLowerWitness{1.0, a.a};  // cosh >= 1
        } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
          return ExpLowerWitness{1.0, 0.0};  // e^{a t^p} >= 1
        } else {
          return std::nullopt;
        }
      },
      atom);
}

// ---- JSON ----

namespace {

using nlohmann::json;

void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(std::string("unknown key \"") + it.key() +
                                  "\" in " + where);
  }
}

json atom_to_json(const MeasureAtom& atom) {
  json j;
  std::visit(
      [&j](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          j = {{"kind", "pointmass"}, {"c", a.c}, {"w", a.w}};
        } else if constexpr (std::is_same_v<T, ExponentialDensity>) {
          j = {{"kind", "exp"}, {"a", a.a}};
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          j = {{"kind", "power"}, {"p", a.p}};
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          j = {{"kind", "shiftedpower"}, {"alpha", a.alpha}, {"sign", a.sign}};
        } else if constexpr (std::is_same_v<T, CoshExpDensity>) {
          j = {{"kind", "coshexp"}, {"a", a.a}, {"omega", a.omega}};
        } else if constexpr (std::is_same_v<T, LogDensity>) {
          j = {{"kind", "log"}};
        } else if constexpr (std::is_same_v<T, ExpPowerDensity>) {
          j = {{"kind", "exppower"}, {"a", a.a}, {"p", a.p}};
        } else if constexpr (std::is_same_v<T, OscillatoryDensity>) {
          j = {{"kind", "oscillatory"},
               {"p", a.p},
               {"trig", a.trig == Trig::Sin ? "sin" : "cos"}};
        } else if constexpr (std::is_same_v<T, OscillatoryPartDensity>) {
          j = {{"kind", "oscpart"},
               {"p", a.p},
               {"trig", a.trig == Trig::Sin ? "sin" : "cos"},
               {"part", a.part == Part::Pos ? "pos" : "neg"}};
        } else {  // TabulatedDensity
          json samples = json::array();
          for (const auto& [t, v] : a.samples) samples.push_back({t, v});
          json tail;
          if (a.tail)
            tail = {{"A", a.tail->A}, {"lambda", a.tail->lambda}};
          else
            tail = nullptr;
          j = {{"kind", "tabulated"}, {"samples", samples}, {"tail", tail}};
        }
      },
      atom);
  return j;
}

MeasureAtom atom_from_json(const json& j, bool strict) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("atom must be an object with a \"kind\" key");
  const std::string kind = j.at("kind").get<std::string>();
  const auto trig_of = [](const json& v) {
    const std::string s = v.get<std::string>();
    if (s == "sin") return Trig::Sin;
    if (s == "cos") return Trig::Cos;
    throw std::invalid_argument("trig must be \"sin\" or \"cos\"");
  };
  if (kind == "pointmass") {
    if (strict) expect_keys(j, {"kind", "c", "w"}, "pointmass atom");
    return PointMass{j.at("c").get<double>(), j.at("w").get<double>()};
  }
  if (kind == "exp") {
    if (strict) expect_keys(j, {"kind", "a"}, "exp atom");
    return ExponentialDensity{j.at("a").get<double>()};
  }
  if (kind == "power") {
    if (strict) expect_keys(j, {"kind", "p"}, "power atom");
    return PowerDensity{j.at("p").get<double>()};
  }
  if (kind == "shiftedpower") {
    if (strict) expect_keys(j, {"kind", "alpha", "sign"}, "shiftedpower atom");
    return ShiftedPowerDensity{j.at("alpha").get<double>(),
                               j.at("sign").get<int>()};
  }
  if (kind == "coshexp") {
    if (strict) expect_keys(j, {"kind", "a", "omega"}, "coshexp atom");
    return CoshExpDensity{j.at("a").get<double>(), j.at("omega").get<double>()};
  }
  if (kind == "log") {
    if (strict) expect_keys(j, {"kind"}, "log atom");
    return LogDensity{};
  }
  if (kind == "exppower") {
    if (strict) expect_keys(j, {"kind", "a", "p"}, "exppower atom");
    return ExpPowerDensity{j.at("a").get<double>(), j.at("p").get<double>()};
  }
  if (kind == "oscillatory") {
    if (strict) expect_keys(j, {"kind", "p", "trig"}, "oscillatory atom");
    return OscillatoryDensity{j.at("p").get<double>(), trig_of(j.at("trig"))};
  }
  if (kind == "oscpart") {
    if (strict) expect_keys(j, {"kind", "p", "trig", "part"}, "oscpart atom");
    const std::string part = j.at("part").get<std::string>();
    if (part != "pos" && part != "neg")
      throw std::invalid_argument("part must be \"pos\" or \"neg\"");
    return OscillatoryPartDensity{j.at("p").get<double>(),
                                  trig_of(j.at("trig")),
                                  part == "pos" ? Part::Pos : Part::Neg};
  }
  if (kind == "tabulated") {
    if (strict) expect_keys(j, {"kind", "samples", "tail"}, "tabulated atom");
    TabulatedDensity t;
    for (const auto& pair : j.at("samples")) {
      if (!pair.is_array() || pair.size() != 2)
        throw std::invalid_argument("tabulated samples must be [t, value]");
      t.samples.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    if (j.contains("tail") && !j.at("tail").is_null()) {
      const json& tl = j.at("tail");
      if (strict) expect_keys(tl, {"A", "lambda"}, "tabulated tail");
      t.tail = ExpTail{tl.at("A").get<double>(), tl.at("lambda").get<double>()};
    }
    return t;
  }
  throw std::invalid_argument("unknown atom kind \"" + kind + "\"");
}

}  // namespace

nlohmann::json to_json(const MeasureSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const Term& t : spec.terms) {
    nlohmann::json jt = {{"coef", t.coef}, {"atom", atom_to_json(t.atom)}};
    if (t.windowed()) {
      nlohmann::json hi;
      if (t.hi == kInf)
        hi = nullptr;
      else
        hi = t.hi;
      jt["window"] = nlohmann::json::array({t.lo, hi});
    }
    terms.push_back(std::move(jt));
  }
  return nlohmann::json{{"terms", terms}};
}

MeasureSpec spec_from_json(const nlohmann::json& j, bool strict) {
  if (!j.is_object() || !j.contains("terms"))
    throw std::invalid_argument("measure spec must have a \"terms\" array");
  if (strict) expect_keys(j, {"terms"}, "measure spec");
  MeasureSpec spec;
  for (const auto& jt : j.at("terms")) {
    if (strict) expect_keys(jt, {"coef", "atom", "window"}, "measure term");
    Term term;
    term.coef = jt.at("coef").get<double>();
    term.atom = atom_from_json(jt.at("atom"), strict);
    if (jt.contains("window")) {
      const auto& w = jt.at("window");
      if (!w.is_array() || w.size() != 2)
        throw std::invalid_argument("window must be [lo, hi]");
      term.lo = w[0].get<double>();
      term.hi = w[1].is_null() ? kInf : w[1].get<double>();
    }
    spec.terms.push_back(std::move(term));
  }
  return spec;
}

}  // namespace helson::measure

#include "helson/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helson/common.hpp"
#include "helson/matrix.hpp"

namespace helson::bounds {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
using measure::kLn2;

void require_valid(const measure::MeasureSpec& spec) {
  const auto rep = measure::validate(spec);
  if (!rep.ok) {
    std::string why = "measure spec rejected:";
    for (const auto& issue : rep.issues) why += " " + issue.reason + ";";
    throw std::invalid_argument(why);
  }
}

// exact sup of s * atom-transform(s) over s >= ln 2, where the family
// provides one
std::optional<double> atom_exact_sup(const measure::Term& term, double tol) {
  if (term.windowed()) return std::nullopt;
  using namespace measure;
  return std::visit(
      [&](const auto& a) -> std::optional<double> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ExponentialDensity> ||
                      std::is_same_v<T, CoshExpDensity>) {
          return 1.0;  // decreasing density, eta(0+) = 1
        } else if constexpr (std::is_same_v<T, ShiftedPowerDensity>) {
          if (a.sign < 0) return 1.0;  // decreasing toward eta(0+) = 1
          // increasing density: s mu^(s) attains its sup at s = ln 2
          Term full{1.0, a};
          return kLn2 * laplace_term(full, kLn2, tol).value;
        } else if constexpr (std::is_same_v<T, PowerDensity>) {
          if (a.p < 0.0) return std::nullopt;  // divergent family
          if (a.p == 0.0) return 1.0;
          return quad::gamma_fn(a.p + 1.0) * std::pow(kLn2, -a.p);
        } else if constexpr (std::is_same_v<T, LogDensity> ||
                             std::is_same_v<T, ExpPowerDensity>) {
          Term full{1.0, a};
          return kLn2 * laplace_term(full, kLn2, tol).value;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          // s w e^{-cs}: interior max at s = 1/c when 1/c >= ln 2
          if (1.0 / a.c >= kLn2) return a.w / (a.c * 2.718281828459045235360287);
          return a.w * kLn2 * std::exp(-a.c * kLn2);
        } else {
          return std::nullopt;  // oscillatory, tabulated: grid evidence only
        }
      },
      term.atom);
}

}  // namespace

EnvelopeConstants envelope_constants(const measure::MeasureSpec& spec,
                                     std::optional<double> b_override,
                                     int kmax) {
  require_valid(spec);
  EnvelopeConstants env;

  // default shift: largest witness shift over the atoms
  double b_default = 0.0;
  bool all_witnessed = !spec.terms.empty();
  bool any_witness = false;
  double c_sum = 0.0;
  for (const auto& term : spec.terms) {
    const auto w = measure::exp_lower_witness(term.atom);
    if (!w || term.coef <= 0.0 || term.windowed()) {
      all_witnessed = false;
      continue;
    }
    any_witness = true;
    b_default = std::max(b_default, w->b);
    c_sum += term.coef * w->L;
  }
  env.b = b_override.value_or(b_default);

  // grid extrema, n = 2^k
  double grid_d = 0.0;
  double grid_c = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kmax; ++k) {
    const double n = std::ldexp(1.0, k);
    const double s = std::log(n);
    const double mu = measure::laplace(spec, s, 1e-10).value;
    grid_d = std::max(grid_d, s * mu);
    grid_c = std::min(grid_c, (env.b + s) * mu);
    env.grid.push_back(n);
  }
  env.D = grid_d;
  env.C = std::isfinite(grid_c) ? std::max(grid_c, 0.0) : 0.0;

  // family-exact overrides
  const auto ac = measure::asymptotic_class(spec);
  if (ac.kind == measure::AsymptoticClass::Kind::Diverges) {
    env.D = grid_d;
    env.d_exact = false;
    env.flags.push_back("no upper envelope: (ln n) mu^(ln n) diverges");
  } else {
    bool all_exact = !spec.terms.empty();
    double d_sum = 0.0;
    for (const auto& term : spec.terms) {
      if (term.coef <= 0.0) {
        all_exact = false;
        break;
      }
      const auto sup = atom_exact_sup(term, 1e-12);
      if (!sup) {
        all_exact = false;
        break;
      }
      d_sum += term.coef * *sup;
    }
    if (all_exact) {
      env.D = d_sum;
      env.d_exact = true;
      if (spec.terms.size() > 1)
        env.flags.push_back("D is a sum-rule bound over atoms");
    } else if (ac.kind == measure::AsymptoticClass::Kind::Unknown) {
      env.flags.push_back("grid extremum only: asymptotics unknown");
    }
  }
  if (any_witness && (!b_override || *b_override >= b_default)) {
    // eta >= sum coef_i L_i e^{-b_i t} over the witnessed terms makes
    // C = sum coef_i L_i rigorous for every n at b = max b_i
    env.C = c_sum;
    env.c_exact = all_witnessed;
    if (!all_witnessed)
      env.flags.push_back("C from exponential witnesses on a term subset");
  } else if (ac.kind == measure::AsymptoticClass::Kind::TendsTo) {
    // the infimum can sit at the s -> inf boundary where (b+s) mu^ -> limit
    env.C = std::max(0.0, std::min(grid_c, ac.limit));
    env.flags.push_back("C is grid/limit evidence (no exponential witness)");
  } else if (!spec.terms.empty()) {
    env.flags.push_back("C is a grid extremum (no exponential witness)");
  }
  if (spec.terms.empty()) {
    env.D = 0.0;
    env.C = 0.0;
    env.d_exact = env.c_exact = true;
  }
  return env;
}

SchurBound schur_bound(const measure::MeasureSpec& spec, std::int64_t col_cap,
                       int grid_kmax, double tol, Exec exec) {
  require_valid(spec);
  if (!spec.positive())
    throw std::invalid_argument("schur_bound: requires a positive spec");
  SchurBound out;
  out.col_cap = col_cap;
  out.grid_size = grid_kmax;

  const auto ac = measure::asymptotic_class(spec);
  if (ac.kind == measure::AsymptoticClass::Kind::Diverges) {
    out.inconclusive = true;  // no finite Schur constant exists
  }

  // decay exponent of the tail integrand mu^(u + ln n) u^{-1/2} from the
  // family majorant
  double q_eff = 1.2;
  bool have_majorant = !spec.terms.empty();
  double q_min = std::numeric_limits<double>::infinity();
  for (const auto& term : spec.terms) {
    const auto m = measure::transform_majorant(term);
    if (!m) {
      have_majorant = false;
      break;
    }
    q_min = std::min(q_min, m->q + (m->c > 0.0 ? 10.0 : 0.0));
  }
  if (have_majorant && std::isfinite(q_min)) q_eff = 0.5 + q_min;

  double best = 0.0;
  for (int k = 1; k <= grid_kmax; ++k) {
    const double ln_n = std::log(std::ldexp(1.0, k));
    const double partial = block_pairwise_sum(
        col_cap - 1, exec, [&](std::int64_t i) {
          const double m = static_cast<double>(i + 2);
          const double lm = std::log(m);
          return measure::laplace(spec, lm + ln_n, tol).value /
                 (m * std::sqrt(lm));
        });
    // tail \int_{cap-1}^inf mu^(ln x + ln n)/(x sqrt(ln x)) dx in u = ln x
    const double ucut = std::log(static_cast<double>(col_cap));
    const auto tail_f = [&](double u) {
      return measure::laplace(spec, u + ln_n, tol).value / std::sqrt(u);
    };
    const quad::QuadResult tail =
        quad::integrate_halfline(tail_f, ucut, tol, quad::Decay::power(q_eff));
    if (tail.diverged || !tail.converged) {
      out.inconclusive = true;
      continue;
    }
    const double col = std::sqrt(ln_n) * (partial + tail.value + tail.error);
    best = std::max(best, col);
  }
  out.value = best;
  return out;
}

ProbeResult a_eps_probe(const measure::MeasureSpec& spec, double eps,
                        std::int64_t n, double tol, Exec exec) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("a_eps_probe: eps must lie in (0,1)");
  ProbeResult out;
  out.eps = eps;
  out.n = n;
  std::vector<std::pair<std::int64_t, double>> x;
  x.reserve(static_cast<std::size_t>(n));
  const double ex = -0.5 * (1.0 + eps);
  for (std::int64_t m = 2; m <= n + 1; ++m)
    x.emplace_back(m, std::pow(static_cast<double>(m), -0.5) *
                          std::pow(std::log(static_cast<double>(m)), ex));
  out.norm_sq = block_pairwise_sum(
      static_cast<std::int64_t>(x.size()), exec, [&](std::int64_t i) {
        const double v = x[static_cast<std::size_t>(i)].second;
        return v * v;
      });
  const double form = matrix::matrix_form(spec, x, tol, exec);
  out.quotient = form / out.norm_sq;
  return out;
}

std::int64_t choose_witness_n(const measure::MeasureSpec& spec,
                              double c_target) {
  const auto ac = measure::asymptotic_class(spec);
  if (ac.kind != measure::AsymptoticClass::Kind::Diverges)
    throw std::invalid_argument(
        "choose_witness_n: spec has no divergent (ln n) mu^(ln n) growth");
  // rate_coef * (ln N)^{rate_exponent} = 1.05 * c_target
  const double ln_n =
      std::pow(1.05 * c_target / ac.rate_coef, 1.0 / ac.rate_exponent);
  const double n = std::exp(std::max(ln_n, kLn2 + 0.05));
  if (n > 4.0e18)
    throw std::invalid_argument(
        "choose_witness_n: required support exceeds the integer range; use a "
        "smaller c_target");
  return static_cast<std::int64_t>(std::ceil(n)) + 1;
}

WitnessResult unboundedness_witness(const measure::MeasureSpec& spec,
                                    double c_target, std::int64_t n,
                                    Exec exec, bool force_bracket) {
  require_valid(spec);
  const auto ac = measure::asymptotic_class(spec);
  if (ac.kind != measure::AsymptoticClass::Kind::Diverges)
    throw std::invalid_argument(
        "unboundedness_witness: asymptotic class is not divergent");
  if (n < 2) throw std::invalid_argument("unboundedness_witness: n >= 2");

  WitnessResult out;
  out.n = n;
  out.threshold = 2.0 * c_target * std::atan(1.0 / 6.0);

  // precondition: mu^(ln m) ln m > c_target on [N, N^4] (log-spaced samples;
  // the divergent families grow monotonically)
  const double ln_lo = std::log(static_cast<double>(n));
  for (int k = 0; k <= 8; ++k) {
    const double lm = ln_lo * (1.0 + 3.0 * k / 8.0);
    const double h = lm * measure::laplace(spec, lm, 1e-10).value;
    if (!(h > c_target)) {
      std::ostringstream os;
      os << "unboundedness_witness: mu^(ln m) ln m = " << h
         << " <= C at m = e^" << lm << " (choose a larger N)";
      throw std::invalid_argument(os.str());
    }
  }

  const double n4_approx = std::pow(static_cast<double>(n), 4.0);
  if (n4_approx <= 8000.0 && !force_bracket) {
    out.mode = WitnessResult::Mode::DirectSum;
    const std::int64_t hi = n * n * n * n;
    std::vector<std::pair<std::int64_t, double>> x;
    for (std::int64_t m = n; m <= hi; ++m) {
      const double md = static_cast<double>(m);
      x.emplace_back(m, 1.0 / std::sqrt(md * std::log(md)));
    }
    const double num = matrix::matrix_form(spec, x, 1e-10, exec);
    const double den = block_pairwise_sum(
        static_cast<std::int64_t>(x.size()), exec, [&](std::int64_t i) {
          const double v = x[static_cast<std::size_t>(i)].second;
          return v * v;
        });
    out.quotient = num / den;
    std::ostringstream os;
    os << "direct sum over support [" << n << ", " << hi << "]";
    out.detail = os.str();
  } else {
    out.mode = WitnessResult::Mode::IntegralBracket;
    // 2D integral-test lower bound in log coordinates:
    // num >= II_{[A,4A]^2} mu^(u+v) (uv)^{-1/2} du dv,  A = ln N
    const double A = ln_lo, B = 4.0 * ln_lo;
    const auto inner = [&](double u) {
      const auto f = [&](double v) {
        return measure::laplace(spec, u + v, 1e-10).value / std::sqrt(u * v);
      };
      const quad::QuadResult r = quad::integrate_finite(f, A, B, 1e-9);
      if (!r.converged)
        throw NumericError("witness inner quadrature failed", r.value, r.error);
      return r.value;
    };
    const quad::QuadResult num = quad::integrate_finite(inner, A, B, 1e-7);
    if (!num.converged)
      throw NumericError("witness outer quadrature failed", num.value,
                         num.error);
    // ||x||^2 <= f(N) + int_N^{N^4} dx/(x ln x) = 1/(N ln N) + ln 4
    const double den_upper = std::exp(-A) / A + std::log(4.0);
    out.quotient = (num.value - num.error) / den_upper;
    std::ostringstream os;
    os << "integral bracket on [e^" << A << ", e^" << B
       << "]: num >= " << num.value - num.error << ", den <= " << den_upper;
    out.detail = os.str();
  }
  out.pass = out.quotient >= out.threshold;
  return out;
}

ClassificationVerdict classify(const measure::MeasureSpec& spec,
                               std::int64_t series_length, Exec exec) {
  require_valid(spec);
  ClassificationVerdict out;
  const bool positive = spec.positive();

  if (!positive) {
    // signed measure: conclusions route through |mu| (H_mu <= H_|mu|)
    const auto parts = measure::hahn_decompose(spec);
    ClassificationVerdict tv = classify(parts.total_variation,
                                        std::min<std::int64_t>(series_length, 1024),
                                        exec);
    out.asymptotic = tv.asymptotic;
    out.envelope = tv.envelope;
    out.trace_series = tv.trace_series;
    switch (tv.verdict) {
      case Verdict::TraceClass:
        out.verdict = Verdict::TraceClass;
        break;
      case Verdict::Compact:
        out.verdict = Verdict::Compact;
        break;
      default:
        // boundedness transfers from |mu| but non-compactness does not
        out.verdict = Verdict::Inconclusive;
        break;
    }
    return out;
  }

  out.asymptotic = measure::asymptotic_class(spec);
  out.envelope = envelope_constants(spec);
  out.trace_series = schatten::schatten_series(spec, schatten::SeriesKind::TraceCond,
                                               0.0, series_length, exec);
  using Kind = measure::AsymptoticClass::Kind;
  switch (out.asymptotic.kind) {
    case Kind::Diverges:
      out.verdict = Verdict::Unbounded;
      break;
    case Kind::TendsTo:
      if (out.asymptotic.limit > 1e-12) {
        out.verdict = Verdict::BoundedNonCompact;
      } else {
        out.verdict =
            (out.trace_series.verdict == schatten::SeriesVerdict::Verdict::Converges)
                ? Verdict::TraceClass
                : Verdict::Compact;
      }
      break;
    default:
      out.verdict = Verdict::Inconclusive;
      break;
  }

  // cheap Schur evidence for bounded closed-form families
  if (out.verdict == Verdict::BoundedNonCompact ||
      out.verdict == Verdict::Compact || out.verdict == Verdict::TraceClass) {
    bool closed = true;
    for (const auto& term : spec.terms) {
      const bool cheap =
          std::holds_alternative<measure::PointMass>(term.atom) ||
          std::holds_alternative<measure::ExponentialDensity>(term.atom) ||
          std::holds_alternative<measure::CoshExpDensity>(term.atom) ||
          (std::holds_alternative<measure::PowerDensity>(term.atom) &&
           !term.windowed());
      if (!cheap) {
        closed = false;
        break;
      }
    }
    if (closed && !spec.terms.empty()) {
      try {
        out.schur = schur_bound(spec, 20000, 30, 1e-9, exec).value;
      } catch (const std::exception&) {
        // evidence only
      }
    }
  }
  return out;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Unbounded: return "Unbounded";
    case Verdict::BoundedNonCompact: return "BoundedNonCompact";
    case Verdict::Compact: return "Compact";
    case Verdict::TraceClass: return "TraceClass";
    default: return "Inconclusive";
  }
}

nlohmann::json to_json(const EnvelopeConstants& e) {
  return nlohmann::json{{"C", e.C},       {"D", e.D},
                        {"b", e.b},       {"grid_size", e.grid.size()},
                        {"d_exact", e.d_exact}, {"c_exact", e.c_exact},
                        {"flags", e.flags}};
}

nlohmann::json to_json(const ClassificationVerdict& v) {
  nlohmann::json asym;
  using Kind = measure::AsymptoticClass::Kind;
  switch (v.asymptotic.kind) {
    case Kind::Diverges:
      asym = {{"kind", "diverges"},
              {"rate_exponent", v.asymptotic.rate_exponent},
              {"rate_coef", v.asymptotic.rate_coef}};
      break;
    case Kind::TendsTo:
      asym = {{"kind", "tends_to"}, {"limit", v.asymptotic.limit}};
      break;
    case Kind::BoundedOscillating:
      asym = {{"kind", "bounded_oscillating"}};
      break;
    default:
      asym = {{"kind", "unknown"}, {"note", v.asymptotic.note}};
      break;
  }
  nlohmann::json j{{"verdict", verdict_name(v.verdict)},
                   {"asymptotic", asym},
                   {"envelope", to_json(v.envelope)},
                   {"series", schatten::to_json(v.trace_series)}};
  if (v.schur)
    j["schur_bound"] = *v.schur;
  else
    j["schur_bound"] = nullptr;
  return j;
}

nlohmann::json to_json(const WitnessResult& w) {
  return nlohmann::json{
      {"quotient", w.quotient},
      {"threshold", w.threshold},
      {"pass", w.pass},
      {"mode", w.mode == WitnessResult::Mode::DirectSum ? "direct-sum"
                                                        : "integral-bracket"},
      {"n", w.n},
      {"detail", w.detail}};
}

}  // namespace helson::bounds

#pragma once

// Symbolic measures on (0, inf): a linear combination of atoms from a
// built-in family plus tabulated densities, with Laplace transforms in
// closed form where available and quadrature elsewhere.  Domain restricted
// to s >= ln 2 (admissibility is only guaranteed there).

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "helson/common.hpp"
#include "helson/quadrature.hpp"

namespace helson::measure {

inline constexpr double kLn2 = 0.6931471805599453;

enum class Trig { Sin, Cos };
enum class Part { Pos, Neg };

struct PointMass {
  double c = 1.0;  // location, > 0
  double w = 1.0;  // mass, > 0
};
struct ExponentialDensity {
  double a = 0.0;  // e^{-a t} dt, a >= 0
};
struct PowerDensity {
  double p = 0.0;  // t^p dt, p > -1; p in (-1,0) is the unbounded family
};
struct ShiftedPowerDensity {
  double alpha = 0.0;  // (1+t)^{sign*alpha} dt, alpha >= 0
  int sign = -1;       // +1 or -1
};
struct CoshExpDensity {
  double a = 1.0;      // e^{-a t} cosh(omega t) dt, a >= |omega|
  double omega = 0.0;
};
struct LogDensity {};  // ln(1+t) dt
struct ExpPowerDensity {
  double a = 1.0;  // e^{a t^p} dt, a > 0
  double p = 0.5;  // p in (0,1)
};
struct OscillatoryDensity {
  double p = 1.0;  // t^p sin(t) dt or t^p cos(t) dt (signed), p > 0
  Trig trig = Trig::Sin;
};
// One Hahn piece of an oscillatory density: t^p max(+-trig(t), 0) dt,
// supported on alternating half-periods; always a positive measure.
struct OscillatoryPartDensity {
  double p = 1.0;
  Trig trig = Trig::Sin;
  Part part = Part::Pos;
};
struct ExpTail {
  double A = 0.0;       // eta(t) ~ A e^{-lambda t} past the last sample
  double lambda = 1.0;  // >= 0
};
struct TabulatedDensity {
  std::vector<std::pair<double, double>> samples;  // strictly increasing t
  std::optional<ExpTail> tail;                     // required by validate
};

using MeasureAtom =
    std::variant<PointMass, ExponentialDensity, PowerDensity,
                 ShiftedPowerDensity, CoshExpDensity, LogDensity,
                 ExpPowerDensity, OscillatoryDensity, OscillatoryPartDensity,
                 TabulatedDensity>;

// One term coef * atom, optionally restricted to a support window [lo, hi).
struct Term {
  double coef = 1.0;
  MeasureAtom atom;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool windowed() const {
    return lo > 0.0 || hi != std::numeric_limits<double>::infinity();
  }
};

struct MeasureSpec {
  std::vector<Term> terms;

  static MeasureSpec single(MeasureAtom atom, double coef = 1.0) {
    MeasureSpec s;
    s.terms.push_back(Term{coef, std::move(atom)});
    return s;
  }
  // positive iff every coefficient * atom-sign is nonnegative
  bool positive() const;
  bool empty() const { return terms.empty(); }
};

enum class LaplaceMethod { ClosedForm, Quadrature };

struct LaplaceValue {
  double value = 0.0;
  double abs_error_bound = 0.0;  // 0 for closed forms (round-off <= 4 ulp)
  LaplaceMethod method = LaplaceMethod::ClosedForm;
};

struct ValidationIssue {
  std::size_t term_index = 0;
  std::string reason;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  std::vector<std::string> flags;  // e.g. "term 0: unbounded-family"
};

// Admissibility: mu^ evaluable and finite at s = ln 2; no point mass at 0.
ValidationReport validate(const MeasureSpec& spec);

// mu^(s) = sum coef * atom transform, s >= ln 2.
LaplaceValue laplace(const MeasureSpec& spec, double s, double tol = 1e-10);
LaplaceValue laplace_term(const Term& term, double s, double tol = 1e-10);

struct HahnParts {
  MeasureSpec plus;
  MeasureSpec minus;
  MeasureSpec total_variation;
};

// Hahn decomposition spec = plus - minus with disjoint supports;
// total_variation = plus + minus.
HahnParts hahn_decompose(const MeasureSpec& spec);

// convex combination: laplace(combine(m1,m2,r), s) = r mu1^ + (1-r) mu2^
MeasureSpec combine(const MeasureSpec& mu1, const MeasureSpec& mu2, double r);

// growth of s * mu^(s) as s -> inf
struct AsymptoticClass {
  enum class Kind { Diverges, TendsTo, BoundedOscillating, Unknown } kind =
      Kind::Unknown;
  double limit = 0.0;          // TendsTo
  double rate_exponent = 0.0;  // Diverges: s mu^(s) ~ rate_coef * s^exponent
  double rate_coef = 0.0;
  std::string note;
};
AsymptoticClass asymptotic_class(const MeasureSpec& spec);

// ---- density helpers (weighted-Lebesgue part; used by diagnostics) ----

// true when the spec carries no point masses (a pure density)
bool is_density_only(const MeasureSpec& spec);
// eta(t) for density specs (0 outside windows)
double density_value(const MeasureSpec& spec, double t);
// eta(0+) when every density atom has a known right limit at 0
std::optional<double> density_limit_at_zero(const MeasureSpec& spec);

enum class Monotonicity { Decreasing, Increasing, Constant, None, Unknown };
Monotonicity density_monotonicity(const MeasureSpec& spec);

// Upper bound mu^_term(s) <= K e^{-c s} s^{-q} valid on s >= ln 2, used for
// rigorous series tails.  Absent when no bound is certified.
struct TransformMajorant {
  double K = 0.0;
  double q = 0.0;
  double c = 0.0;
};
std::optional<TransformMajorant> transform_majorant(const Term& term);
// Lower bound mu^_term(s) >= K e^{-c s} s^{-q} on s >= ln 2 (positive terms).
std::optional<TransformMajorant> transform_minorant(const Term& term);

// Exponential-domination witness eta(t) >= L e^{-b t}: yields the lower
// envelope constant C = L at shift b (per-atom default b).
struct ExpLowerWitness {
  double L = 0.0;
  double b = 0.0;
};
std::optional<ExpLowerWitness> exp_lower_witness(const MeasureAtom& atom);

// ---- JSON ----
// {"terms":[{"coef":1.0,"atom":{"kind":"exp","a":1.0}}, ...]}
nlohmann::json to_json(const MeasureSpec& spec);
// strict: unknown keys anywhere are rejected (throws std::invalid_argument)
MeasureSpec spec_from_json(const nlohmann::json& j, bool strict = true);

}  // namespace helson::measure

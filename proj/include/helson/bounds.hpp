#pragma once

// Norm bounds and the boundedness/compactness classifier: Schur column
// bound, envelope constants C/D, the a_eps lower-bound probe, the x^(N)
// unboundedness witness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "helson/measure.hpp"
#include "helson/parallel.hpp"
#include "helson/schatten.hpp"

namespace helson::bounds {

struct EnvelopeConstants {
  double D = 0.0;  // mu^(ln n) <= D / ln n (grid or family-exact)
  double C = 0.0;  // mu^(ln n) >= C / (b + ln n); 0 when no lower envelope
  double b = 0.0;
  std::vector<double> grid;  // sampled n (exact powers of 2)
  bool d_exact = false;      // true when D is family-exact, not a grid max
  bool c_exact = false;
  std::vector<std::string> flags;
};

// grid n = 2^k, k = 1..kmax; closed-form families override the grid extrema
// with exact constants.  Default b comes from the atoms (b = a for
// exponentials, b = alpha for (1+t)^{-alpha}), overridable.
EnvelopeConstants envelope_constants(const measure::MeasureSpec& spec,
                                     std::optional<double> b_override = {},
                                     int kmax = 60);

struct SchurBound {
  double value = 0.0;  // M: max over sampled n of the weighted column sum
  bool inconclusive = false;  // divergent tail or divergent family
  std::int64_t col_cap = 0;
  int grid_size = 0;
};

// M = max over sampled n of sqrt(ln n) [ sum_{m<=cap} mu^(ln(mn))/(m sqrt(ln m))
//     + integral-test tail ]; for admissible families with mu^ <= D/ln this
// is <= D pi up to the tail slack.
SchurBound schur_bound(const measure::MeasureSpec& spec,
                       std::int64_t col_cap = 200000, int grid_kmax = 40,
                       double tol = 1e-9, Exec exec = default_exec());

struct ProbeResult {
  double eps = 0.0;
  std::int64_t n = 0;
  double quotient = 0.0;  // x^T H x / ||x||^2 with x = truncated a_eps
  double norm_sq = 0.0;
};

// Rayleigh quotient of the truncation against a_eps(m) = m^{-1/2} (ln m)^{-(1+eps)/2}
ProbeResult a_eps_probe(const measure::MeasureSpec& spec, double eps,
                        std::int64_t n, double tol = 1e-10,
                        Exec exec = default_exec());

struct WitnessResult {
  double quotient = 0.0;   // certified lower bound in bracket mode
  double threshold = 0.0;  // 2 C_target atan(1/6)
  bool pass = false;
  enum class Mode { DirectSum, IntegralBracket } mode = Mode::DirectSum;
  std::int64_t n = 0;
  std::string detail;
};

// Quadratic-form witness on x_m = (m ln m)^{-1/2}, N <= m <= N^4.  Small
// supports are summed directly; large ones are bracketed by the 2D integral
// test in log coordinates (certified lower bound on the quotient).
// force_bracket runs the bracket mode on enumerable supports (cross-checks).
WitnessResult unboundedness_witness(const measure::MeasureSpec& spec,
                                    double c_target, std::int64_t n,
                                    Exec exec = default_exec(),
                                    bool force_bracket = false);

// smallest N with mu^(ln m) ln m > c_target on [N, N^4] for divergent
// built-in families (from the symbolic divergence rate)
std::int64_t choose_witness_n(const measure::MeasureSpec& spec,
                              double c_target);

enum class Verdict { Unbounded, BoundedNonCompact, Compact, TraceClass, Inconclusive };

struct ClassificationVerdict {
  Verdict verdict = Verdict::Inconclusive;
  measure::AsymptoticClass asymptotic;
  EnvelopeConstants envelope;
  std::optional<double> schur;  // filled only for cheap (closed-form) specs
  schatten::SeriesVerdict trace_series;
};

// Unbounded if (ln n) mu^(ln n) diverges; BoundedNonCompact on a positive
// limit; Compact on limit 0; TraceClass additionally when the trace-cond
// series converges; Inconclusive for unknown asymptotics.
ClassificationVerdict classify(const measure::MeasureSpec& spec,
                               std::int64_t series_length = 4096,
                               Exec exec = default_exec());

const char* verdict_name(Verdict v);

nlohmann::json to_json(const EnvelopeConstants& e);
nlohmann::json to_json(const ClassificationVerdict& v);
nlohmann::json to_json(const WitnessResult& w);

}  // namespace helson::bounds

#pragma once

// Schatten-class series tests, signed-measure trace bounds, weighted-Lebesgue
// difference criteria, difference-operator diagnostics and sigma_ess /
// sigma_ac predictions.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "helson/matrix.hpp"
#include "helson/measure.hpp"
#include "helson/parallel.hpp"
#include "helson/quadrature.hpp"

namespace helson::schatten {

enum class SeriesKind { TraceCond, HS, ColP, DiagP, EntryP };

struct SeriesVerdict {
  SeriesKind kind = SeriesKind::TraceCond;
  double p = 0.0;  // exponent for ColP/DiagP/EntryP
  std::int64_t length = 0;
  double partial_sum = 0.0;
  enum class TailKind { Bounded, Heuristic, Diverges, Unknown } tail_kind =
      TailKind::Unknown;
  quad::TailBound tail;  // meaningful for Bounded/Heuristic
  enum class Verdict { Converges, Diverges, Inconclusive } verdict =
      Verdict::Inconclusive;
};

// Partial sum of the designated series plus an integral-test tail when the
// family certifies a transform majorant; trace-cond terms share the matrix
// diagonal realization bit for bit.  `majorant_override` replaces the
// family majorant (used for certified-positive difference measures);
// `assume_positive` lets structurally signed specs through when the caller
// certified positivity of the measure.
SeriesVerdict schatten_series(
    const measure::MeasureSpec& spec, SeriesKind kind, double p,
    std::int64_t length, Exec exec = default_exec(),
    std::optional<measure::TransformMajorant> majorant_override = {},
    bool assume_positive = false);

// Bare trace-cond partial sum sum_{m=2}^{length+1} mu^(2 ln m)/m, defined for
// signed specs as well; shares the matrix-diagonal realization bit for bit.
double trace_cond_partial(const measure::MeasureSpec& spec,
                          std::int64_t length, Exec exec = default_exec());

struct SignedTraceBound {
  double bound = 0.0;
  bool infinite = false;
  SeriesVerdict::Verdict verdict = SeriesVerdict::Verdict::Inconclusive;
  SeriesVerdict series;       // |mu| trace-cond series
  bool form_inequality_ok = false;  // x^T H_mu x <= x^T H_|mu| x on random x
  double form_worst_violation = 0.0;
};

// Theorem: if sum |mu|^(2 ln m)/m converges, H_mu is trace class and
// H_mu <= H_|mu|.  The form inequality is certified on `n_vectors` random
// unit vectors at truncation size `check_n`.
SignedTraceBound signed_trace_bound(const measure::MeasureSpec& spec,
                                    std::int64_t length = 4096,
                                    int check_n = 128, int n_vectors = 32,
                                    double budget = 1e-8,
                                    Exec exec = default_exec());

// dominating function g(y) for the weighted-Lebesgue hypotheses
struct DominatingG {
  std::function<double(double)> g;
  double D = 1.0;  // |eta(y/x) - eta(0+)| <= D (y/x)^p g(y)
  double p = 1.0;
  std::string name;
};

// per-family presets (Leb, powers, log, exp, shifted powers, exp-power, ...)
DominatingG default_g_for(const measure::MeasureSpec& spec);

struct WeightDiffReport {
  bool eta_ineq_1_pass = false;
  bool eta_ineq_2_pass = false;
  double eta0 = 0.0;
  double sup_deviation = 0.0;  // sup over the x grid of |x mu^(x) - eta0|
  std::string sign_pattern;    // ">=0", "<=0" or "mixed"
  double d_tilde = 0.0;        // D * int y^p g(y) e^{-y} dy
  double p = 0.0;
  std::optional<std::pair<double, double>> violation;  // failing (x, y)
};

// Numeric verification of the eta-inequalities on an (x, y) grid,
// x >= ln 2, y in (0, y_max].
WeightDiffReport weight_diff_check(const measure::MeasureSpec& spec,
                                   const DominatingG& g, double y_max = 50.0);

struct DifferenceDiagnostics {
  matrix::HelsonTruncation difference;  // built from the signed combination
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  double trace_norm_lower = 0.0;  // sum |lambda_i|; only a lower estimate,
                                  // and no bound at all for signed parts
  bool psd = false;
  bool positive_measure = false;  // domination certificate (numeric grid)
  bool termwise_trace_ok = false;
  SeriesVerdict trace_series;  // trace-cond series of the difference measure
};

// diagnostics for gamma1 H_1 - gamma2 H_2 at a common truncation size
DifferenceDiagnostics difference_operator(const measure::MeasureSpec& spec1,
                                          const measure::MeasureSpec& spec2,
                                          double gamma1, double gamma2, int n,
                                          Exec exec = default_exec());

struct SpectrumPrediction {
  double eta_zero_plus = 0.0;
  bool ess_predicted = false;  // eta-ineq-1 hypothesis check passed
  std::pair<double, double> sigma_ess{0.0, 0.0};
  std::optional<std::pair<double, double>> sigma_ac;
  WeightDiffReport hypothesis_report;
  // empirical evidence from a finite truncation (non-probative: finite
  // sections have pure point spectra)
  int evidence_n = 0;
  double evidence_lambda_max = 0.0;
  bool lambda_max_within_bound = false;
  std::int64_t eigenvalues_inside = 0;
  std::int64_t eigenvalues_outside = 0;
};

// sigma_ess = [0, eta(0+) pi] under eta-ineq-1; sigma_ac additionally under
// eta-ineq-2 with eta(0+) > 0.
SpectrumPrediction spectrum_predict(const measure::MeasureSpec& spec,
                                    int evidence_n = 512,
                                    Exec exec = default_exec());

nlohmann::json to_json(const SeriesVerdict& v);
nlohmann::json to_json(const WeightDiffReport& r);
nlohmann::json to_json(const SpectrumPrediction& p);
nlohmann::json to_json(const DifferenceDiagnostics& d);

}  // namespace helson::schatten

#pragma once

// Special functions and half-line integration with error bounds: Gamma,
// zeta-1 tail sums, the K_eps integral, tanh-sinh quadrature for Laplace
// transforms, and integral-test tail brackets for series.

#include <functional>

#include "helson/common.hpp"

namespace helson::quad {

struct TailBound {
  double lower = 0.0;
  double upper = 0.0;
};

// Decay descriptor for integrands on the half line.  The descriptor is the
// caller's assertion about eventual behavior; Power/LogPower with exponent
// <= 1 are rejected as divergent up front, everything else is integrated and
// watched for numeric blow-up.
struct Decay {
  enum class Kind { Exponential, Power, LogPower } kind = Kind::Exponential;
  double param = 1.0;  // rate for Exponential, exponent q for (Log)Power

  static Decay exponential(double rate) { return {Kind::Exponential, rate}; }
  static Decay power(double q) { return {Kind::Power, q}; }
  // integrand ~ 1/(x (ln x)^q); requires the lower limit > 1
  static Decay log_power(double q) { return {Kind::LogPower, q}; }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  bool converged = false;
  bool diverged = false;
  int levels = 0;
};

// tanh-sinh on a finite interval; refines until successive levels differ by
// less than tol/2 or the refinement cap is hit.
QuadResult integrate_finite(const std::function<double(double)>& f, double a,
                            double b, double tol);

// integral over (a, inf): maps to (0,1) (after an x = e^u substitution for
// LogPower decay) and runs tanh-sinh.  diverged is set either from the decay
// descriptor or from numeric blow-up.
QuadResult integrate_halfline(const std::function<double(double)>& f, double a,
                              double tol, Decay decay);

// Gamma(x) for x > 0; relative error well under 1e-12.
double gamma_fn(double x);

struct ZetaValue {
  double value = 0.0;
  double error = 0.0;  // half-width of the integral-test bracket + fp budget
};

// sum_{n>=2} n^{-s} for s > 1.  Partial sum plus an integral-test bracket for
// the tail; the returned error bound is at most tol.
ZetaValue zeta_minus_one(double s, double tol = 1e-10);

struct KEpsilon {
  double closed_form = 0.0;
  double quadrature_check = 0.0;
};

// K_eps = int_0^inf t^{-(1+eps)/2}/(1+t) dt = pi / sin(pi(1-eps)/2),
// 0 < eps < 1.  Returns both the closed form and the quadrature evaluation.
KEpsilon k_epsilon(double eps, double tol = 1e-9);

struct TailResult {
  enum class Status { Bounded, Diverges } status = Status::Bounded;
  TailBound bound;  // valid when Bounded
};

// Bracket for sum_{k>=alpha} f(k) with f nonincreasing and nonnegative on
// [alpha-1, inf): lower = int_alpha^inf f, upper = int_{alpha-1}^inf f.
TailResult integral_test_tail(const std::function<double(double)>& f,
                              double alpha, Decay decay, double tol = 1e-10);

}  // namespace helson::quad

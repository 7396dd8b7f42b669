#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace helson {

inline constexpr const char* kVersion = "0.1.0";

// Thrown when an iterative numeric routine misses its target tolerance.
// Carries the best estimate and the tolerance actually reached so callers
// can report partial results.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double best, double achieved)
      : std::runtime_error(what),
        best_estimate(best),
        achieved_tolerance(achieved) {}

  double best_estimate;
  double achieved_tolerance;
};

// ln(m*n) through the exact integer product.  Matrix entries and series
// terms must share this realization so diagonal sums and partial sums agree
// bit for bit.  Products stay below 2^53 at desk scale, so the conversion
// is exact.
inline double log_product(std::int64_t m, std::int64_t n) {
  return std::log(static_cast<double>(m * n));
}

// sqrt(m*n), exact for perfect squares (IEEE sqrt is correctly rounded).
inline double sqrt_product(std::int64_t m, std::int64_t n) {
  return std::sqrt(static_cast<double>(m * n));
}

}  // namespace helson

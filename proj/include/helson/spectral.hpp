#pragma once

// Dense symmetric eigendecomposition and the spectral functionals consumed
// by the diagnostics: cyclic Jacobi at small sizes, Householder
// tridiagonalization + implicit-shift QL beyond.

#include <vector>

#include <json.hpp>

#include "helson/dense.hpp"
#include "helson/matrix.hpp"
#include "helson/parallel.hpp"

namespace helson::spectral {

struct SpectralReport {
  std::vector<double> eigenvalues;  // descending
  double trace = 0.0;               // diagonal sum of the input matrix
  double hs_norm = 0.0;             // entrywise Frobenius norm
  double trace_norm_lower = 0.0;    // sum |lambda_i| of the truncation
  double max_residual = 0.0;        // max ||Hv - lambda v||, 0 without vectors
};

// Jacobi for n <= 1024, Householder + QL above.  Non-symmetric input (beyond
// 1e-12 relative) is rejected.  Eigenvectors (matrix columns) are returned
// through `vectors` when requested; residuals are only computed then.
SpectralReport eig_sym(const SymMatrix& h, bool want_vectors = false,
                       SymMatrix* vectors = nullptr);

// Largest eigenvalue by power iteration (deterministic start); for
// entrywise-nonnegative matrices the dominant eigenvector is positive and
// the iteration converges.  Residual-controlled: |lambda - lambda_1| <=
// ||Hx - lambda x|| <= tol * max(1, lambda).
double lambda_max(const SymMatrix& h, double tol = 1e-8,
                  Exec exec = default_exec(), int max_iters = 200000);

struct Functionals {
  double trace = 0.0;
  double hs_norm = 0.0;
  double trace_norm_lower = 0.0;
};

// trace = sum of stored diagonal (= trace-cond partial sum, bit for bit),
// hs_norm = entrywise l2 norm, trace_norm_lower = sum |lambda_i|.
Functionals matrix_functionals(const matrix::HelsonTruncation& t);

nlohmann::json to_json(const SpectralReport& r);

}  // namespace helson::spectral

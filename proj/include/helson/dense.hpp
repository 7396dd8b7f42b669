#pragma once

// Dense symmetric matrix storage shared by the truncation builder and the
// eigensolvers.  Full square row-major storage; both triangles are kept in
// sync by construction.

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "helson/parallel.hpp"

namespace helson {

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }

  double& at(int i, int j) { return data_[idx(i, j)]; }
  double at(int i, int j) const { return data_[idx(i, j)]; }

  // sets both (i,j) and (j,i)
  void set_sym(int i, int j, double v) {
    data_[idx(i, j)] = v;
    data_[idx(j, i)] = v;
  }

  const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * n_; }
  double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * n_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // y = A x (deterministic: per-row serial dot products)
  void matvec(const std::vector<double>& x, std::vector<double>& y,
              Exec exec = default_exec()) const {
    assert(static_cast<int>(x.size()) == n_ && static_cast<int>(y.size()) == n_);
    parallel_for(0, n_, exec, [&](std::int64_t i) {
      const double* r = row(static_cast<int>(i));
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += r[j] * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = s;
    });
  }

  double frobenius_norm_sq(Exec exec = default_exec()) const {
    const std::int64_t total = static_cast<std::int64_t>(data_.size());
    return block_pairwise_sum(total, exec,
                              [&](std::int64_t k) { double v = data_[static_cast<std::size_t>(k)]; return v * v; });
  }

  // max_{i<j} |a_ij - a_ji| (0 by construction for truncations; used to
  // validate caller-supplied matrices)
  double max_asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        const double d = at(i, j) - at(j, i);
        if (d > worst) worst = d;
        if (-d > worst) worst = -d;
      }
    return worst;
  }

 private:
  std::size_t idx(int i, int j) const {
    assert(i >= 0 && i < n_ && j >= 0 && j < n_);
    return static_cast<std::size_t>(i) * n_ + j;
  }

  int n_ = 0;
  std::vector<double> data_;
};

}  // namespace helson

#include "rgar/score_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rgar::kernel {

namespace {

// Four independent accumulators; the combine order is fixed, so the result
// does not depend on who runs the row.
inline double dot_row(const float* row, const float* query, std::size_t dim) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t d = 0;
  for (; d + 4 <= dim; d += 4) {
    a0 += static_cast<double>(row[d]) * static_cast<double>(query[d]);
    a1 += static_cast<double>(row[d + 1]) * static_cast<double>(query[d + 1]);
    a2 += static_cast<double>(row[d + 2]) * static_cast<double>(query[d + 2]);
    a3 += static_cast<double>(row[d + 3]) * static_cast<double>(query[d + 3]);
  }
  for (; d < dim; ++d) {
    a0 += static_cast<double>(row[d]) * static_cast<double>(query[d]);
  }
  return ((a0 + a1) + (a2 + a3));
}

inline double max_of(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

}  // namespace

void similarities_serial(const float* data, std::size_t count, std::size_t dim,
                         const float* query, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = dot_row(data + i * dim, query, dim);
  }
}

void similarities_parallel(const float* data, std::size_t count, std::size_t dim,
                           const float* query, double* out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    out[i] = dot_row(data + static_cast<std::size_t>(i) * dim, query, dim);
  }
}

void softmax_serial(double* x, std::size_t n) {
  if (n == 0) return;
  const double m = max_of(x, n);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - m);
    denom += x[i];
  }
  for (std::size_t i = 0; i < n; ++i) x[i] /= denom;
}

void softmax_parallel(double* x, std::size_t n) {
  if (n == 0) return;
  double m = -std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(max : m)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    m = std::max(m, x[i]);
  }

  const std::size_t n_blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(n_blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(lo + kReduceBlock, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      x[i] = std::exp(x[i] - m);
      s += x[i];
    }
    partial[static_cast<std::size_t>(b)] = s;
  }
  double denom = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) denom += partial[b];

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    x[i] /= denom;
  }
}

void fused_scores_serial(const float* data, std::size_t count, std::size_t dim,
                         const float* queries, std::size_t n_queries, double* out) {
  std::fill(out, out + count, 0.0);
  std::vector<double> scratch(count);
  for (std::size_t q = 0; q < n_queries; ++q) {
    similarities_serial(data, count, dim, queries + q * dim, scratch.data());
    softmax_serial(scratch.data(), count);
    for (std::size_t i = 0; i < count; ++i) out[i] += scratch[i];
  }
}

void fused_scores_parallel(const float* data, std::size_t count, std::size_t dim,
                           const float* queries, std::size_t n_queries, double* out) {
  std::fill(out, out + count, 0.0);
  std::vector<double> scratch(count);
  for (std::size_t q = 0; q < n_queries; ++q) {
    similarities_parallel(data, count, dim, queries + q * dim, scratch.data());
    softmax_parallel(scratch.data(), count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
      out[i] += scratch[i];
    }
  }
}

std::vector<std::uint32_t> top_k_desc(const double* scores, std::size_t n, std::size_t k) {
  k = std::min(k, n);
  if (k == 0) return {};
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  auto better = [scores](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  if (k < n) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k) - 1, idx.end(),
                     better);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end(), better);
  return idx;
}

}  // namespace rgar::kernel

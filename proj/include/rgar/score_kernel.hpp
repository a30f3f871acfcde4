#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rgar::kernel {

// Fixed reduction block. Softmax denominators are accumulated per block and
// the block partials combined in index order, so the parallel kernels give
// bit-identical results for every thread count.
inline constexpr std::size_t kReduceBlock = 8192;

/// out[i] = sum_d query[d] * data[i*dim + d], accumulated in double.
void similarities_serial(const float* data, std::size_t count, std::size_t dim,
                         const float* query, double* out);
void similarities_parallel(const float* data, std::size_t count, std::size_t dim,
                           const float* query, double* out);

/// In-place stable softmax (max subtraction). n == 0 is a no-op.
void softmax_serial(double* x, std::size_t n);
void softmax_parallel(double* x, std::size_t n);

/// out[i] = sum over queries of softmax_i(sim(query, chunk)). `queries` is
/// row-major n_queries x dim. out must hold count entries; it is overwritten.
void fused_scores_serial(const float* data, std::size_t count, std::size_t dim,
                         const float* queries, std::size_t n_queries, double* out);
void fused_scores_parallel(const float* data, std::size_t count, std::size_t dim,
                           const float* queries, std::size_t n_queries, double* out);

/// Indices of the k largest scores, ordered by descending score with ties
/// broken by ascending index. k is clamped to n.
std::vector<std::uint32_t> top_k_desc(const double* scores, std::size_t n, std::size_t k);

}  // namespace rgar::kernel

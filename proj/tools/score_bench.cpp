// Benchmark comparing the serial reference scoring kernels against the
// OpenMP ones, at Textbooks-corpus scale by default.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rgar/score_kernel.hpp"

namespace {

// xorshift64*: fast enough to fill hundreds of MB of synthetic vectors.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9E3779B97F4A7C15ull) {}
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1Dull;
  }
  float uniform() {
    return static_cast<float>((next() >> 11) * (1.0 / 9007199254740992.0)) * 2.0f - 1.0f;
  }
};

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t chunks = 130000;
  std::size_t dim = 768;
  std::size_t n_queries = 3;
  std::size_t top_k = 32;
  int repeats = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const std::size_t value = std::strtoull(argv[i + 1], nullptr, 10);
    if (flag == "--chunks") chunks = value;
    else if (flag == "--dim") dim = value;
    else if (flag == "--queries") n_queries = value;
    else if (flag == "--top") top_k = value;
    else if (flag == "--repeat") repeats = static_cast<int>(value);
    else {
      std::fprintf(stderr, "usage: %s [--chunks N] [--dim D] [--queries Q] [--top K] [--repeat R]\n",
                   argv[0]);
      return 1;
    }
  }

  std::printf("generating %zu x %zu matrix (%.1f MB) + %zu queries\n", chunks, dim,
              chunks * dim * sizeof(float) / 1048576.0, n_queries);
  std::vector<float> data(chunks * dim);
  std::vector<float> queries(n_queries * dim);
  Rng rng(42);
  for (float& x : data) x = rng.uniform();
  for (float& x : queries) x = rng.uniform();

  std::vector<double> serial_scores(chunks), parallel_scores(chunks);
  double t_serial = 1e30, t_parallel = 1e30;
  for (int r = 0; r < repeats; ++r) {
    double t0 = now_s();
    rgar::kernel::fused_scores_serial(data.data(), chunks, dim, queries.data(), n_queries,
                                      serial_scores.data());
    auto top_s = rgar::kernel::top_k_desc(serial_scores.data(), chunks, top_k);
    t_serial = std::min(t_serial, now_s() - t0);

    t0 = now_s();
    rgar::kernel::fused_scores_parallel(data.data(), chunks, dim, queries.data(), n_queries,
                                        parallel_scores.data());
    auto top_p = rgar::kernel::top_k_desc(parallel_scores.data(), chunks, top_k);
    t_parallel = std::min(t_parallel, now_s() - t0);

    if (top_s != top_p) {
      std::fprintf(stderr, "FAIL: serial and parallel top-%zu ids differ\n", top_k);
      return 1;
    }
  }

  double max_diff = 0.0;
  for (std::size_t i = 0; i < chunks; ++i) {
    max_diff = std::max(max_diff, std::fabs(serial_scores[i] - parallel_scores[i]));
  }

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  const double flops = 2.0 * static_cast<double>(chunks) * dim * n_queries;
  std::printf("%-22s %10s %12s\n", "kernel", "best (s)", "GFLOP/s");
  std::printf("%-22s %10.4f %12.2f\n", "fused_scores_serial", t_serial, flops / t_serial / 1e9);
  std::printf("%-22s %10.4f %12.2f  (%d threads)\n", "fused_scores_parallel", t_parallel,
              flops / t_parallel / 1e9, threads);
  std::printf("speedup %.2fx, max |score delta| = %.3e, top-%zu ids identical\n",
              t_serial / t_parallel, max_diff, top_k);
  return 0;
}

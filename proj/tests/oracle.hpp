#pragma once

// Independent brute-force scoring oracle, kept deliberately naive and apart
// from the kernel implementations it checks: plain exp-sum softmax without
// max subtraction, one chunk at a time.

#include <cmath>
#include <vector>

namespace oracle {

inline double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

inline std::vector<double> fused_scores(const std::vector<std::vector<float>>& chunks,
                                        const std::vector<std::vector<float>>& queries) {
  std::vector<double> sc(chunks.size(), 0.0);
  for (const auto& q : queries) {
    std::vector<double> sims(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) sims[i] = dot(q, chunks[i]);
    double denom = 0.0;
    for (double s : sims) denom += std::exp(s);
    for (std::size_t i = 0; i < chunks.size(); ++i) sc[i] += std::exp(sims[i]) / denom;
  }
  return sc;
}

}  // namespace oracle

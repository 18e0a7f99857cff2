#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hkc/dendrogram.hpp"
#include "hkc/matrix.hpp"

namespace hkc {

struct BisectConfig {
  std::size_t k = 2;
  std::size_t restarts = 10;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 100;
};

struct TwoMeansSplit {
  std::vector<Index> left;
  std::vector<Index> right;
  double sse = 0.0;
  std::vector<double> restart_sse;
};

// Best-of-restarts 2-means over the given rows.
TwoMeansSplit two_means(const Matrix& data, std::span<const Index> rows,
                        std::size_t restarts, std::uint64_t seed,
                        std::size_t max_iterations = 100);

double sum_squared_error(const Matrix& data, std::span<const Index> rows);

/// Bisecting k-means. The leaf with the largest SSE is split next. Leaf i of
/// the result is cluster ID i.
Dendrogram bisect_kmeans(const Matrix& data, const BisectConfig& config,
                         std::vector<std::string>* warnings = nullptr);

}  // namespace hkc

#pragma once

// Lloyd's k-means over a row subset. Shared by the core-cluster ablation and
// the bisecting baseline.

#include <span>
#include <vector>

#include "hkc/matrix.hpp"
#include "hkc/random.hpp"

namespace hkc::detail {

enum class KMeansInit { kPlusPlus, kRandomDistinct };

struct KMeansFit {
  std::vector<int> labels;  // per position in `rows`
  Matrix centers;
  double sse = 0.0;
};

KMeansFit lloyd(const Matrix& data, std::span<const Index> rows, std::size_t k,
                KMeansInit init, Rng& rng, std::size_t max_iterations);

}  // namespace hkc::detail

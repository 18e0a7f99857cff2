#include "kmeans.hpp"

#include <algorithm>
#include <limits>

namespace hkc::detail {

namespace {

std::vector<Index> init_plus_plus(const Matrix& data,
                                  std::span<const Index> rows, std::size_t k,
                                  Rng& rng) {
  std::vector<Index> chosen;
  std::vector<double> d2(rows.size(), std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::size_t> first(0, rows.size() - 1);
  chosen.push_back(first(rng));
  std::vector<bool> taken(rows.size(), false);
  taken[chosen.back()] = true;
  while (chosen.size() < k) {
    const auto c = data.row(rows[chosen.back()]);
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(data.row(rows[i]), c));
      if (!taken[i]) total += d2[i];
    }
    std::size_t pick = rows.size();
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (taken[i]) continue;
        target -= d2[i];
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    if (pick == rows.size()) {
      // All remaining points coincide with chosen centers (or rounding ran
      // past the end): take a uniformly random untaken row.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!taken[i]) rest.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> u(0, rest.size() - 1);
      pick = rest[u(rng)];
    }
    taken[pick] = true;
    chosen.push_back(pick);
  }
  return chosen;
}

}  // namespace

KMeansFit lloyd(const Matrix& data, std::span<const Index> rows, std::size_t k,
                KMeansInit init, Rng& rng, std::size_t max_iterations) {
  const std::size_t d = data.cols();
  std::vector<Index> start;
  if (init == KMeansInit::kPlusPlus) {
    start = init_plus_plus(data, rows, k, rng);
  } else {
    start = sample_without_replacement(rows.size(), k, rng);
    std::shuffle(start.begin(), start.end(), rng);
  }

  KMeansFit fit;
  fit.centers = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    auto r = data.row(rows[start[c]]);
    std::copy(r.begin(), r.end(), fit.centers.row(c).begin());
  }
  fit.labels.assign(rows.size(), -1);

  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, max_iterations);
       ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto x = data.row(rows[i]);
      int best = 0;
      double best_sq = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double sq = squared_distance(x, fit.centers.row(c));
        if (sq < best_sq) {
          best_sq = sq;
          best = static_cast<int>(c);
        }
      }
      if (fit.labels[i] != best) {
        fit.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto x = data.row(rows[i]);
      auto s = sums.row(fit.labels[i]);
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
      ++counts[fit.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < d; ++j) {
        fit.centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
      }
    }
  }

  fit.sse = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    fit.sse += squared_distance(data.row(rows[i]), fit.centers.row(fit.labels[i]));
  }
  return fit;
}

}  // namespace hkc::detail

#include "hkc/corecluster.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include <json.hpp>

#include "hkc/error.hpp"
#include "hkc/parallel.hpp"
#include "hkc/random.hpp"
#include "kmeans.hpp"

namespace hkc {

std::vector<Index> select_subset(std::size_t n, std::size_t s,
                                 std::uint64_t seed) {
  if (s < 2 || s > n) {
    throw InvalidArgument("subset size " + std::to_string(s) +
                          " outside [2, " + std::to_string(n) + "]");
  }
  if (s == n) {
    std::vector<Index> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  Rng rng(mix_seed(seed, 0x5ab5e7));
  return sample_without_replacement(n, s, rng);
}

namespace {

// Index of the maximum score; ties go to the smallest dataset row.
std::size_t argmax_by_row(std::span<const double> scores,
                          std::span<const Index> rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && rows[i] < rows[best])) {
      best = i;
    }
  }
  return best;
}

std::vector<Index> without(const std::vector<Index>& from,
                           const std::vector<Index>& removed) {
  std::vector<Index> sorted_removed = removed;
  std::sort(sorted_removed.begin(), sorted_removed.end());
  std::vector<Index> out;
  out.reserve(from.size());
  for (Index x : from) {
    if (!std::binary_search(sorted_removed.begin(), sorted_removed.end(), x)) {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

CoreClusterSet kpskc(const KernelSpace& space, std::span<const Index> subset,
                     std::size_t k, double tau, double rho,
                     GrowthTrace* trace) {
  if (subset.empty()) throw InvalidArgument("kpskc: empty subset");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("kpskc: rho must be in (0, 1)");
  if (!(tau > 0.0)) throw InvalidArgument("kpskc: tau must be positive");
  if (k < 1) throw InvalidArgument("kpskc: k must be at least 1");

  CoreClusterSet out;
  out.subset_rows.assign(subset.begin(), subset.end());
  std::vector<Index> residual = out.subset_rows;
  std::vector<double> scores;
  bool threshold_stop = false;

  while (residual.size() > 1 && out.clusters.size() < k) {
    // Seed: most similar point to the residual distribution.
    const SetSummary whole = space.summarize(residual);
    scores.assign(residual.size(), 0.0);
    parallel_for(0, residual.size(), [&](std::size_t i) {
      scores[i] = space.point_set(residual[i], whole);
    });
    const std::size_t p = argmax_by_row(scores, residual);
    const Index xp = residual[p];

    // Companion: most similar other point to the seed.
    parallel_for(0, residual.size(), [&](std::size_t i) {
      scores[i] = i == p ? -std::numeric_limits<double>::infinity()
                         : space.point_point(residual[i], xp);
    });
    const Index xq = residual[argmax_by_row(scores, residual)];

    double gamma = (1.0 - rho) * space.point_point(xq, xp);
    if (gamma <= tau) {
      threshold_stop = true;
      break;
    }

    std::vector<double> gammas;
    std::vector<Index> grown = {std::min(xp, xq), std::max(xp, xq)};
    std::vector<char> inside(residual.size());
    while (gamma > tau) {
      const SetSummary current = space.summarize(grown);
      parallel_for(0, residual.size(), [&](std::size_t i) {
        inside[i] = space.point_set(residual[i], current) > gamma;
      });
      gammas.push_back(gamma);
      gamma *= 1.0 - rho;
      std::vector<Index> next;
      for (std::size_t i = 0; i < residual.size(); ++i) {
        if (inside[i]) next.push_back(residual[i]);
      }
      // An empty regrowth would leave nothing to summarize; keep the last
      // nonempty set.
      if (next.empty()) break;
      grown = std::move(next);
    }
    if (trace) trace->gammas.push_back(std::move(gammas));
    residual = without(residual, grown);
    out.clusters.push_back(std::move(grown));
  }

  if (out.clusters.size() < k) {
    out.warnings.push_back(
        "kpskc found " + std::to_string(out.clusters.size()) + " of " +
        std::to_string(k) + " clusters" +
        (threshold_stop ? " (seed similarity fell to tau)" : " (subset exhausted)"));
  }
  out.noise = std::move(residual);
  return out;
}

CoreClusterSet kmeans_cores(const Matrix& data, std::span<const Index> subset,
                            std::size_t k, std::size_t restarts,
                            std::uint64_t seed) {
  if (subset.empty()) throw InvalidArgument("kmeans_cores: empty subset");
  if (k < 1 || k > subset.size()) {
    throw InvalidArgument("kmeans_cores: k must be in [1, subset size]");
  }
  if (restarts < 1) throw InvalidArgument("kmeans_cores: restarts must be >= 1");

  detail::KMeansFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(mix_seed(seed, 0x4b3a0000 + r));
    auto fit = detail::lloyd(data, subset, k, detail::KMeansInit::kPlusPlus,
                             rng, 300);
    if (fit.sse < best.sse) best = std::move(fit);
  }

  CoreClusterSet out;
  out.subset_rows.assign(subset.begin(), subset.end());
  std::vector<std::vector<Index>> groups(k);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    groups[best.labels[i]].push_back(subset[i]);
  }
  for (auto& g : groups) {
    if (g.empty()) continue;
    std::sort(g.begin(), g.end());
    out.clusters.push_back(std::move(g));
  }
  if (out.clusters.size() < k) {
    out.warnings.push_back("kmeans produced empty clusters");
  }
  return out;
}

CoreClusterSet ik_dbscan_cores(const KernelSpace& space,
                               std::span<const Index> subset, double eps_sim,
                               std::size_t min_pts, std::size_t k) {
  if (subset.empty()) throw InvalidArgument("ik_dbscan: empty subset");
  if (!(eps_sim > 0.0 && eps_sim <= 1.0)) {
    throw InvalidArgument("ik_dbscan: eps_sim must be in (0, 1]");
  }
  if (min_pts < 1) throw InvalidArgument("ik_dbscan: min_pts must be >= 1");
  if (k < 1) throw InvalidArgument("ik_dbscan: k must be >= 1");

  const std::size_t m = subset.size();
  std::vector<std::vector<std::size_t>> neighbors(m);
  parallel_for(0, m, [&](std::size_t i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (space.point_point(subset[i], subset[j]) >= eps_sim) {
        neighbors[i].push_back(j);
      }
    }
  });

  constexpr int kUnvisited = -1;
  std::vector<int> label(m, kUnvisited);
  std::vector<std::vector<Index>> clusters;
  for (std::size_t i = 0; i < m; ++i) {
    if (label[i] != kUnvisited || neighbors[i].size() < min_pts) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.emplace_back();
    std::deque<std::size_t> frontier = {i};
    label[i] = id;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      clusters[id].push_back(subset[p]);
      if (neighbors[p].size() < min_pts) continue;  // border point
      for (std::size_t q : neighbors[p]) {
        if (label[q] == kUnvisited) {
          label[q] = id;
          frontier.push_back(q);
        }
      }
    }
  }

  CoreClusterSet out;
  out.subset_rows.assign(subset.begin(), subset.end());
  if (clusters.empty()) {
    out.warnings.push_back("ik_dbscan found no core point");
    out.noise = out.subset_rows;
    return out;
  }
  for (auto& c : clusters) std::sort(c.begin(), c.end());
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (c < k) {
      out.clusters.push_back(std::move(clusters[c]));
    } else {
      out.noise.insert(out.noise.end(), clusters[c].begin(), clusters[c].end());
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (label[i] == kUnvisited) out.noise.push_back(subset[i]);
  }
  std::sort(out.noise.begin(), out.noise.end());
  if (out.clusters.size() < k) {
    out.warnings.push_back("ik_dbscan found " +
                           std::to_string(out.clusters.size()) + " of " +
                           std::to_string(k) + " clusters");
  }
  return out;
}

std::string cores_to_json(const CoreClusterSet& cores) {
  nlohmann::json j;
  j["format"] = "hkc.core_clusters";
  j["version"] = 1;
  j["clusters"] = cores.clusters;
  j["noise"] = cores.noise;
  j["subset_rows"] = cores.subset_rows;
  j["warnings"] = cores.warnings;
  return j.dump();
}

CoreClusterSet cores_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidData(std::string("malformed core-cluster JSON: ") + e.what());
  }
  if (j.value("format", "") != "hkc.core_clusters") {
    throw InvalidData("not a core-cluster file");
  }
  CoreClusterSet c;
  c.clusters = j.at("clusters").get<std::vector<std::vector<Index>>>();
  c.noise = j.at("noise").get<std::vector<Index>>();
  c.subset_rows = j.at("subset_rows").get<std::vector<Index>>();
  c.warnings = j.value("warnings", std::vector<std::string>{});
  return c;
}

}  // namespace hkc

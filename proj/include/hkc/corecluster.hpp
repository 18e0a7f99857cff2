#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hkc/kernel_space.hpp"
#include "hkc/matrix.hpp"

namespace hkc {

/// Disjoint core clusters found on a data subset, plus the subset's leftover
/// noise. All indices are rows of the full dataset; `subset_rows` lists the
/// subset the clusterer ran on, and clusters + noise partition it.
struct CoreClusterSet {
  std::vector<std::vector<Index>> clusters;
  std::vector<Index> noise;
  std::vector<Index> subset_rows;
  std::vector<std::string> warnings;

  std::size_t size() const { return clusters.size(); }
  std::size_t cluster_size(std::size_t id) const { return clusters[id].size(); }
};

/// Uniform sample of s rows without replacement. s == n yields 0..n-1 in
/// order; otherwise rows are returned ascending.
std::vector<Index> select_subset(std::size_t n, std::size_t s,
                                 std::uint64_t seed);

// Per-cluster record of the growth thresholds used by kpskc.
struct GrowthTrace {
  std::vector<std::vector<double>> gammas;
};

/// Distributional-kernel point-set kernel clustering capped at k clusters.
///
/// Seeds at the point most similar to the residual set, pairs it with its most
/// similar companion, then repeatedly regrows the cluster as every residual
/// point with K(delta(x), P_G) > gamma while gamma decays by (1 - rho) and
/// stays above tau. Stops early, with a warning, when a seed's starting gamma
/// is already <= tau.
CoreClusterSet kpskc(const KernelSpace& space, std::span<const Index> subset,
                     std::size_t k, double tau, double rho,
                     GrowthTrace* trace = nullptr);

/// Lloyd k-means on raw coordinates; best of `restarts` k-means++ starts by
/// within-cluster SSE. Never produces noise.
CoreClusterSet kmeans_cores(const Matrix& data, std::span<const Index> subset,
                            std::size_t k, std::size_t restarts,
                            std::uint64_t seed);

/// DBSCAN with the neighborhood {y : kappa(x, y) >= eps_sim} under the point
/// kernel of `space`. Largest k clusters are kept; the rest become noise.
CoreClusterSet ik_dbscan_cores(const KernelSpace& space,
                               std::span<const Index> subset, double eps_sim,
                               std::size_t min_pts, std::size_t k);

std::string cores_to_json(const CoreClusterSet& cores);
CoreClusterSet cores_from_json(const std::string& text);

}  // namespace hkc

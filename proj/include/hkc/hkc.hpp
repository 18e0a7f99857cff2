#pragma once

// End-to-end divisive hierarchical clustering driven by a distributional
// kernel: core clusters on a subset, greedy bisection over core clusters,
// kernel point assignment, refinement, and leaf finalization.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkc/corecluster.hpp"
#include "hkc/dendrogram.hpp"
#include "hkc/ikernel.hpp"
#include "hkc/kernel_space.hpp"
#include "hkc/matrix.hpp"

namespace hkc {

enum class Clusterer { kKpskc, kKMeans, kIkDbscan };
enum class KernelKind { kIdk, kGdk };

Clusterer parse_clusterer(const std::string& name);
KernelKind parse_kernel(const std::string& name);
std::string to_string(Clusterer c);
std::string to_string(KernelKind k);

struct HkcConfig {
  std::size_t s = 0;  // 0 means the whole dataset
  std::size_t k = 2;
  std::size_t psi = 16;
  std::size_t t = 200;
  double tau = 0.01;
  double rho = 0.1;
  std::uint64_t seed = 1;
  Clusterer clusterer = Clusterer::kKpskc;
  KernelKind kernel = KernelKind::kIdk;
  bool refine = true;
  bool agglomerative = false;  // build the tree with ahc_build instead
  double gdk_bandwidth = 0.0;  // 0 selects the median heuristic
  double dbscan_eps = 0.5;
  std::size_t dbscan_min_pts = 5;
  std::size_t kmeans_restarts = 10;

  void validate(std::size_t n) const;
};

struct SplitRecord {
  int node = -1;
  int anchor_left = -1;
  int anchor_right = -1;
};

/// Builds the bisection tree over core clusters. Each multi-cluster leaf is
/// split around its two largest clusters; every other cluster joins the anchor
/// it is most similar to. Anchors always stay on their own side.
Dendrogram build_tree(const CoreClusterSet& cores, const KernelSpace& space,
                      std::vector<SplitRecord>* splits = nullptr);

/// argmax_j K(delta(x), P_Gj) for every dataset row, ties to the smallest j.
/// Rows with zero similarity to every cluster land in cluster 0 and are
/// counted in `orphans`.
std::vector<int> assign_points(const KernelSpace& space,
                               std::span<const SetSummary> clusters,
                               std::size_t* orphans = nullptr);
std::vector<int> assign_points(const KernelSpace& space,
                               const CoreClusterSet& cores,
                               std::size_t* orphans = nullptr);

struct RefineIteration {
  std::size_t changes = 0;  // points outside their previous cluster
  double objective_previous = 0.0;  // sum K(delta(x), P_A(x)) before reassignment
  double objective_reassigned = 0.0;  // same embeddings, new assignment
};

struct RefineResult {
  std::vector<int> assignment;
  std::size_t iterations = 0;
  std::vector<std::size_t> change_counts;  // one per loop-condition check
  std::vector<RefineIteration> trace;
};

/// Reassigns points against recomputed cluster embeddings until fewer than
/// floor(n/100) points move (and at least one does), or 100 iterations.
/// `cores` seeds the comparison set for the first change count. Empty
/// clusters keep their previous embedding.
RefineResult refine(const KernelSpace& space,
                    const std::vector<std::vector<Index>>& cores,
                    std::vector<int> initial, std::size_t k);

struct StageTimings {
  double fit = 0.0;
  double cores = 0.0;
  double tree = 0.0;
  double assign = 0.0;
  double refine = 0.0;

  double total() const { return fit + cores + tree + assign + refine; }
};

struct HkcResult {
  Dendrogram tree;
  std::vector<int> assignments;  // cluster ID (one per leaf) for every point
  CoreClusterSet cores;
  std::size_t k_effective = 0;
  double tsc_before_refine = 0.0;  // tsc_local
  double tsc_after_refine = 0.0;
  std::size_t iterations = 0;
  std::size_t orphans = 0;
  std::vector<SplitRecord> splits;
  std::vector<std::string> warnings;
  StageTimings timings;
  std::optional<PartitioningModel> model;
  double bandwidth = 0.0;
};

std::unique_ptr<KernelSpace> make_space(const Matrix& data,
                                        const HkcConfig& config,
                                        std::optional<PartitioningModel>* model,
                                        double* bandwidth);

HkcResult run_hkc(const Matrix& data, const HkcConfig& config);

/// Runs everything after kernel construction against a prepared space.
HkcResult run_hkc(const Matrix& data, const HkcConfig& config,
                  const KernelSpace& space);

struct PropertyViolations {
  std::size_t split_cores = 0;     // core cluster spanning two children
  std::size_t misplaced = 0;       // non-anchor cluster not with its argmax anchor
  std::size_t partition = 0;       // leaves fail to partition the dataset
  std::size_t total() const { return split_cores + misplaced + partition; }
};

PropertyViolations check_properties(const HkcResult& result,
                                    const KernelSpace& space);

}  // namespace hkc

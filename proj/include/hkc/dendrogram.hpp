#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkc/corecluster.hpp"
#include "hkc/kernel_space.hpp"
#include "hkc/matrix.hpp"

namespace hkc {

struct DendroNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  // Core-cluster IDs below this node, ascending.
  std::vector<int> clusters;
  // Creation order of the split at this node; -1 for leaves.
  int split_rank = -1;
  // Distance between the children's kernel mean embeddings, when computed.
  std::optional<double> alpha;

  bool is_leaf() const { return left < 0; }
};

/// Binary tree over core-cluster IDs. Once finalized, every cluster ID owns a
/// point set and the leaves partition the dataset.
class Dendrogram {
 public:
  Dendrogram() = default;

  /// Tree with a single root holding cluster IDs 0..num_clusters-1.
  explicit Dendrogram(std::size_t num_clusters);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_clusters() const { return num_clusters_; }
  const DendroNode& node(int id) const { return nodes_.at(id); }
  int root() const { return 0; }

  std::vector<int> leaves() const;  // left-to-right order
  std::size_t num_leaves() const;

  /// Splits a leaf into two children holding the given cluster IDs, which must
  /// partition the leaf's IDs. Returns the id of the left child; the right
  /// child is left + 1.
  int split(int leaf, std::vector<int> left_clusters,
            std::vector<int> right_clusters);

  void set_alpha(int node, double alpha);

  bool finalized() const { return finalized_; }
  std::size_t num_points() const { return num_points_; }

  /// Attaches point sets to cluster IDs. They must partition 0..n-1.
  void finalize(std::vector<std::vector<Index>> cluster_points,
                std::size_t num_points);
  const std::vector<Index>& cluster_points(int cluster) const;
  // All points below a node, ascending.
  std::vector<Index> node_points(int node) const;
  // Leaf id per point.
  std::vector<int> leaf_of_points() const;

  /// Internal node whose split was created last.
  int last_split() const;

  /// Turns an internal node with two leaf children into a leaf.
  Dendrogram contract(int parent) const;
  /// Contracts two sibling leaves into their parent.
  Dendrogram contract(int leaf_a, int leaf_b) const;

  // Node cluster-ID sets as a canonical string, children unordered.
  std::string canonical_topology() const;

  std::string to_newick() const;
  std::string to_json() const;
  static Dendrogram from_json(const std::string& text);

 private:
  void check_node(int id) const;

  std::vector<DendroNode> nodes_;
  std::size_t num_clusters_ = 0;
  std::vector<std::vector<Index>> cluster_points_;
  std::size_t num_points_ = 0;
  bool finalized_ = false;
};

bool same_topology(const Dendrogram& a, const Dendrogram& b);

/// Sum over leaves of K(delta(x), P_leaf) for every point in the leaf.
double tsc(const Dendrogram& tree, const KernelSpace& space);
/// tsc divided by the number of points.
double tsc_local(const Dendrogram& tree, const KernelSpace& space);

struct ContractionStep {
  int parent = -1;
  std::size_t leaves_before = 0;
  double tsc_local_before = 0.0;
  double tsc_local_after = 0.0;
  // |Phi(P1) - Phi(P2)| of the two contracted leaves.
  double sibling_distance = 0.0;
};

/// Contracts the most recent split repeatedly until one leaf is left, updating
/// leaf embeddings by the weighted-mean identity. Returns k-1 steps.
std::vector<ContractionStep> contraction_sequence(const Dendrogram& tree,
                                                  const KernelSpace& space);

/// Mean of tsc_local over the sub-dendrograms with p..k leaves obtained by the
/// contraction sequence.
double tsc_global_p(const Dendrogram& tree, std::size_t p,
                    const KernelSpace& space);

/// Fills every internal node's alpha with its children's embedding distance.
void annotate_alphas(Dendrogram& tree, const KernelSpace& space);

/// Dendrogram purity over all same-label point pairs.
double dendrogram_purity(const Dendrogram& tree, std::span<const int> labels);

/// Agglomerative construction over core clusters with single linkage
/// f(X, Y) = max K(P_Ci, P_Cj); ties go to the lexicographically smallest
/// pair of node positions. Returns an unfinalized tree.
Dendrogram ahc_build(const CoreClusterSet& cores, const KernelSpace& space);

}  // namespace hkc

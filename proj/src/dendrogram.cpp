#include "hkc/dendrogram.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hkc/error.hpp"

namespace hkc {

namespace {

std::string join_ids(const std::vector<int>& ids, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

Dendrogram::Dendrogram(std::size_t num_clusters) : num_clusters_(num_clusters) {
  if (num_clusters == 0) throw InvalidArgument("dendrogram needs >= 1 cluster");
  DendroNode root;
  root.clusters.resize(num_clusters);
  std::iota(root.clusters.begin(), root.clusters.end(), 0);
  nodes_.push_back(std::move(root));
}

void Dendrogram::check_node(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw InvalidArgument("node id " + std::to_string(id) + " out of range");
  }
}

std::vector<int> Dendrogram::leaves() const {
  std::vector<int> out;
  if (nodes_.empty()) return out;
  std::vector<int> stack = {root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const auto& n = nodes_[id];
    if (n.is_leaf()) {
      out.push_back(id);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

std::size_t Dendrogram::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const DendroNode& n) { return n.is_leaf(); }));
}

int Dendrogram::split(int leaf, std::vector<int> left_clusters,
                      std::vector<int> right_clusters) {
  check_node(leaf);
  if (!nodes_[leaf].is_leaf()) throw InvalidArgument("split target is not a leaf");
  if (left_clusters.empty() || right_clusters.empty()) {
    throw InvalidArgument("split sides must be nonempty");
  }
  std::sort(left_clusters.begin(), left_clusters.end());
  std::sort(right_clusters.begin(), right_clusters.end());
  std::vector<int> both;
  std::merge(left_clusters.begin(), left_clusters.end(), right_clusters.begin(),
             right_clusters.end(), std::back_inserter(both));
  if (both != nodes_[leaf].clusters) {
    throw InvalidArgument("split sides must partition the leaf's clusters");
  }
  int rank = 0;
  for (const auto& n : nodes_) rank = std::max(rank, n.split_rank + 1);

  const int left = static_cast<int>(nodes_.size());
  DendroNode l;
  l.parent = leaf;
  l.clusters = std::move(left_clusters);
  DendroNode r;
  r.parent = leaf;
  r.clusters = std::move(right_clusters);
  nodes_.push_back(std::move(l));
  nodes_.push_back(std::move(r));
  nodes_[leaf].left = left;
  nodes_[leaf].right = left + 1;
  nodes_[leaf].split_rank = rank;
  return left;
}

void Dendrogram::set_alpha(int node, double alpha) {
  check_node(node);
  nodes_[node].alpha = alpha;
}

void Dendrogram::finalize(std::vector<std::vector<Index>> cluster_points,
                          std::size_t num_points) {
  if (cluster_points.size() != num_clusters_) {
    throw InvalidArgument("finalize: one point set per cluster ID required");
  }
  std::vector<char> seen(num_points, 0);
  std::size_t total = 0;
  for (auto& pts : cluster_points) {
    std::sort(pts.begin(), pts.end());
    for (Index p : pts) {
      if (p >= num_points) throw InvalidArgument("finalize: point index out of range");
      if (seen[p]) throw InvalidArgument("finalize: point assigned twice");
      seen[p] = 1;
      ++total;
    }
  }
  if (total != num_points) {
    throw InvalidArgument("finalize: point sets do not cover the dataset");
  }
  cluster_points_ = std::move(cluster_points);
  num_points_ = num_points;
  finalized_ = true;
}

const std::vector<Index>& Dendrogram::cluster_points(int cluster) const {
  if (!finalized_) throw InvalidState("dendrogram is not finalized");
  return cluster_points_.at(cluster);
}

std::vector<Index> Dendrogram::node_points(int node) const {
  check_node(node);
  if (!finalized_) throw InvalidState("dendrogram is not finalized");
  std::vector<Index> out;
  for (int c : nodes_[node].clusters) {
    out.insert(out.end(), cluster_points_[c].begin(), cluster_points_[c].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Dendrogram::leaf_of_points() const {
  if (!finalized_) throw InvalidState("dendrogram is not finalized");
  std::vector<int> out(num_points_, -1);
  for (int leaf : leaves()) {
    for (int c : nodes_[leaf].clusters) {
      for (Index p : cluster_points_[c]) out[p] = leaf;
    }
  }
  return out;
}

int Dendrogram::last_split() const {
  int best = -1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf() &&
        (best < 0 || nodes_[i].split_rank > nodes_[best].split_rank)) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

Dendrogram Dendrogram::contract(int parent) const {
  check_node(parent);
  const auto& p = nodes_[parent];
  if (p.is_leaf()) throw InvalidArgument("contract: node is already a leaf");
  if (!nodes_[p.left].is_leaf() || !nodes_[p.right].is_leaf()) {
    throw InvalidArgument("contract: children must both be leaves");
  }
  std::vector<int> remap(nodes_.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (static_cast<int>(i) == p.left || static_cast<int>(i) == p.right) continue;
    remap[i] = next++;
  }
  Dendrogram out = *this;
  out.nodes_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (remap[i] < 0) continue;
    DendroNode n = nodes_[i];
    if (n.parent >= 0) n.parent = remap[n.parent];
    if (static_cast<int>(i) == parent) {
      n.left = n.right = -1;
      n.split_rank = -1;
      n.alpha.reset();
    } else if (!n.is_leaf()) {
      n.left = remap[n.left];
      n.right = remap[n.right];
    }
    out.nodes_.push_back(std::move(n));
  }
  return out;
}

Dendrogram Dendrogram::contract(int leaf_a, int leaf_b) const {
  check_node(leaf_a);
  check_node(leaf_b);
  const auto& a = nodes_[leaf_a];
  const auto& b = nodes_[leaf_b];
  if (leaf_a == leaf_b || !a.is_leaf() || !b.is_leaf() || a.parent < 0 ||
      a.parent != b.parent) {
    throw InvalidArgument("contract: arguments must be sibling leaves");
  }
  return contract(a.parent);
}

std::string Dendrogram::canonical_topology() const {
  std::vector<std::string> sets;
  for (const auto& n : nodes_) sets.push_back(join_ids(n.clusters, ","));
  std::sort(sets.begin(), sets.end());
  std::string out;
  for (const auto& s : sets) out += "{" + s + "}";
  return out;
}

bool same_topology(const Dendrogram& a, const Dendrogram& b) {
  return a.num_clusters() == b.num_clusters() &&
         a.canonical_topology() == b.canonical_topology();
}

std::string Dendrogram::to_newick() const {
  std::function<std::string(int)> render = [&](int id) -> std::string {
    const auto& n = nodes_[id];
    if (!n.is_leaf()) {
      return "(" + render(n.left) + "," + render(n.right) + ")";
    }
    std::string label = "C" + join_ids(n.clusters, "+C");
    if (finalized_) {
      std::size_t count = 0;
      for (int c : n.clusters) count += cluster_points_[c].size();
      label += "_n" + std::to_string(count);
    }
    return label;
  };
  return render(root()) + ";";
}

std::string Dendrogram::to_json() const {
  nlohmann::json j;
  j["format"] = "hkc.dendrogram";
  j["version"] = 1;
  j["num_clusters"] = num_clusters_;
  j["num_leaves"] = num_leaves();
  j["finalized"] = finalized_;
  j["num_points"] = num_points_;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    nlohmann::json jn;
    jn["id"] = i;
    jn["parent"] = n.parent;
    jn["children"] = n.is_leaf() ? nlohmann::json::array()
                                 : nlohmann::json::array({n.left, n.right});
    jn["clusters"] = n.clusters;
    jn["split_rank"] = n.split_rank;
    jn["alpha"] = n.alpha ? nlohmann::json(*n.alpha) : nlohmann::json(nullptr);
    if (finalized_ && n.is_leaf()) jn["points"] = node_points(static_cast<int>(i));
    nodes.push_back(std::move(jn));
  }
  if (finalized_) j["cluster_points"] = cluster_points_;
  return j.dump();
}

Dendrogram Dendrogram::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidData(std::string("malformed dendrogram JSON: ") + e.what());
  }
  if (j.value("format", "") != "hkc.dendrogram") {
    throw InvalidData("not a dendrogram file");
  }
  try {
    Dendrogram t;
    t.num_clusters_ = j.at("num_clusters").get<std::size_t>();
    for (const auto& jn : j.at("nodes")) {
      DendroNode n;
      n.parent = jn.at("parent").get<int>();
      const auto& ch = jn.at("children");
      if (ch.size() == 2) {
        n.left = ch[0].get<int>();
        n.right = ch[1].get<int>();
      } else if (!ch.empty()) {
        throw InvalidData("dendrogram nodes must have 0 or 2 children");
      }
      n.clusters = jn.at("clusters").get<std::vector<int>>();
      n.split_rank = jn.value("split_rank", -1);
      if (jn.contains("alpha") && !jn["alpha"].is_null()) {
        n.alpha = jn["alpha"].get<double>();
      }
      t.nodes_.push_back(std::move(n));
    }
    const int count = static_cast<int>(t.nodes_.size());
    for (const auto& n : t.nodes_) {
      if (n.parent >= count || n.left >= count || n.right >= count) {
        throw InvalidData("dendrogram node reference out of range");
      }
    }
    if (j.value("finalized", false)) {
      t.finalize(j.at("cluster_points").get<std::vector<std::vector<Index>>>(),
                 j.at("num_points").get<std::size_t>());
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidData(std::string("malformed dendrogram JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Objectives

namespace {

double leaf_contribution(const KernelSpace& space,
                         const std::vector<Index>& points,
                         const SetSummary& summary) {
  double s = 0.0;
  for (Index x : points) s += space.point_set(x, summary);
  return s;
}

void require_finalized(const Dendrogram& tree) {
  if (!tree.finalized()) throw InvalidState("dendrogram is not finalized");
}

}  // namespace

double tsc(const Dendrogram& tree, const KernelSpace& space) {
  require_finalized(tree);
  double total = 0.0;
  for (int leaf : tree.leaves()) {
    const auto pts = tree.node_points(leaf);
    if (pts.empty()) continue;
    total += leaf_contribution(space, pts, space.summarize(pts));
  }
  return total;
}

double tsc_local(const Dendrogram& tree, const KernelSpace& space) {
  require_finalized(tree);
  return tsc(tree, space) / static_cast<double>(tree.num_points());
}

std::vector<ContractionStep> contraction_sequence(const Dendrogram& tree,
                                                  const KernelSpace& space) {
  require_finalized(tree);
  const double n = static_cast<double>(tree.num_points());
  const std::size_t count = tree.num_nodes();

  std::vector<char> is_leaf(count, 0);
  std::vector<std::vector<Index>> points(count);
  std::vector<SetSummary> summary(count);
  std::vector<double> contribution(count, 0.0);
  for (int leaf : tree.leaves()) {
    is_leaf[leaf] = 1;
    points[leaf] = tree.node_points(leaf);
    if (!points[leaf].empty()) {
      summary[leaf] = space.summarize(points[leaf]);
      contribution[leaf] = leaf_contribution(space, points[leaf], summary[leaf]);
    }
  }
  auto current_tsc_local = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (is_leaf[i]) s += contribution[i];
    }
    return s / n;
  };

  std::vector<int> internal;
  for (std::size_t i = 0; i < count; ++i) {
    if (!tree.node(static_cast<int>(i)).is_leaf()) internal.push_back(static_cast<int>(i));
  }
  std::sort(internal.begin(), internal.end(), [&](int a, int b) {
    return tree.node(a).split_rank > tree.node(b).split_rank;
  });

  std::vector<ContractionStep> steps;
  std::size_t leaves = tree.num_leaves();
  for (int p : internal) {
    const auto& node = tree.node(p);
    const int a = node.left;
    const int b = node.right;
    if (!is_leaf[a] || !is_leaf[b]) {
      throw InvalidState("split order does not yield sibling leaves");
    }
    ContractionStep step;
    step.parent = p;
    step.leaves_before = leaves;
    step.tsc_local_before = current_tsc_local();

    points[p] = points[a];
    points[p].insert(points[p].end(), points[b].begin(), points[b].end());
    if (points[a].empty()) {
      summary[p] = summary[b];
    } else if (points[b].empty()) {
      summary[p] = summary[a];
    } else {
      step.sibling_distance = space.set_distance(summary[a], summary[b]);
      summary[p] = space.merge(summary[a], summary[b]);
    }
    contribution[p] =
        points[p].empty() ? 0.0 : leaf_contribution(space, points[p], summary[p]);
    is_leaf[a] = is_leaf[b] = 0;
    is_leaf[p] = 1;
    --leaves;
    step.tsc_local_after = current_tsc_local();
    steps.push_back(step);
  }
  return steps;
}

double tsc_global_p(const Dendrogram& tree, std::size_t p,
                    const KernelSpace& space) {
  require_finalized(tree);
  const std::size_t k = tree.num_leaves();
  if (p < 1 || p > k) {
    throw InvalidArgument("p must be in [1, " + std::to_string(k) + "]");
  }
  const auto steps = contraction_sequence(tree, space);
  double sum = steps.empty() ? tsc_local(tree, space) : steps.front().tsc_local_before;
  for (std::size_t i = 0; i < k - p; ++i) sum += steps[i].tsc_local_after;
  return sum / static_cast<double>(k - p + 1);
}

void annotate_alphas(Dendrogram& tree, const KernelSpace& space) {
  require_finalized(tree);
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) {
    const auto& n = tree.node(static_cast<int>(i));
    if (n.is_leaf()) continue;
    const auto a = tree.node_points(n.left);
    const auto b = tree.node_points(n.right);
    if (a.empty() || b.empty()) continue;
    tree.set_alpha(static_cast<int>(i),
                   space.set_distance(space.summarize(a), space.summarize(b)));
  }
}

double dendrogram_purity(const Dendrogram& tree, std::span<const int> labels) {
  require_finalized(tree);
  if (labels.size() != tree.num_points()) {
    throw InvalidArgument("purity: label count does not match point count");
  }
  std::map<int, std::size_t> dense;
  for (int l : labels) dense.emplace(l, dense.size());
  const std::size_t num_labels = dense.size();
  std::vector<std::size_t> label_of(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) label_of[i] = dense[labels[i]];

  std::vector<long double> totals(num_labels, 0.0L);
  for (std::size_t l : label_of) totals[l] += 1.0L;
  long double pairs = 0.0L;
  for (long double c : totals) pairs += c * (c - 1.0L);
  if (pairs == 0.0L) {
    throw InvalidArgument("purity: no two points share a label");
  }

  // Label histogram per node, post-order.
  std::vector<std::vector<long double>> hist(tree.num_nodes());
  long double numerator = 0.0L;
  std::function<void(int)> visit = [&](int id) {
    const auto& n = tree.node(id);
    auto& h = hist[id];
    h.assign(num_labels, 0.0L);
    if (n.is_leaf()) {
      for (int c : n.clusters) {
        for (Index p : tree.cluster_points(c)) h[label_of[p]] += 1.0L;
      }
    } else {
      visit(n.left);
      visit(n.right);
      for (std::size_t l = 0; l < num_labels; ++l) {
        h[l] = hist[n.left][l] + hist[n.right][l];
      }
    }
    long double size = 0.0L;
    for (long double c : h) size += c;
    if (size == 0.0L) return;
    for (std::size_t l = 0; l < num_labels; ++l) {
      // Ordered same-label pairs whose least common ancestor is this node.
      const long double lca_pairs =
          n.is_leaf() ? h[l] * (h[l] - 1.0L)
                      : 2.0L * hist[n.left][l] * hist[n.right][l];
      numerator += lca_pairs * h[l] / size;
    }
  };
  visit(tree.root());
  return static_cast<double>(numerator / pairs);
}

Dendrogram ahc_build(const CoreClusterSet& cores, const KernelSpace& space) {
  const std::size_t m = cores.size();
  if (m < 2) throw InvalidArgument("ahc_build: need at least 2 core clusters");
  std::vector<SetSummary> summaries;
  summaries.reserve(m);
  for (const auto& c : cores.clusters) summaries.push_back(space.summarize(c));

  // Active nodes ordered by their smallest cluster ID.
  std::vector<std::vector<int>> active(m);
  for (std::size_t i = 0; i < m; ++i) active[i] = {static_cast<int>(i)};
  std::vector<std::vector<double>> link(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      link[i][j] = link[j][i] = space.set_set(summaries[i], summaries[j]);
    }
  }

  std::vector<std::pair<std::vector<int>, std::vector<int>>> merges;
  while (active.size() > 1) {
    std::size_t bi = 0;
    std::size_t bj = 1;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        if (link[i][j] > link[bi][bj]) {
          bi = i;
          bj = j;
        }
      }
    }
    merges.emplace_back(active[bi], active[bj]);
    std::vector<int> merged = active[bi];
    merged.insert(merged.end(), active[bj].begin(), active[bj].end());
    std::sort(merged.begin(), merged.end());

    // Single-linkage update: the merged row is the elementwise max.
    for (std::size_t l = 0; l < active.size(); ++l) {
      link[bi][l] = link[l][bi] = std::max(link[bi][l], link[bj][l]);
    }
    active[bi] = std::move(merged);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    link.erase(link.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : link) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
    // bi < bj, and erasing bj keeps the ordering by smallest cluster ID.
  }

  Dendrogram tree(m);
  for (auto it = merges.rbegin(); it != merges.rend(); ++it) {
    std::vector<int> both = it->first;
    both.insert(both.end(), it->second.begin(), it->second.end());
    std::sort(both.begin(), both.end());
    int target = -1;
    for (int leaf : tree.leaves()) {
      if (tree.node(leaf).clusters == both) target = leaf;
    }
    if (target < 0) throw InvalidState("ahc_build: merge history is inconsistent");
    tree.split(target, it->first, it->second);
  }
  return tree;
}

}  // namespace hkc

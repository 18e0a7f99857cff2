#include "hkc/baseline.hpp"

#include <algorithm>
#include <limits>

#include "hkc/error.hpp"
#include "hkc/random.hpp"
#include "kmeans.hpp"

namespace hkc {

double sum_squared_error(const Matrix& data, std::span<const Index> rows) {
  if (rows.empty()) return 0.0;
  std::vector<double> mean(data.cols(), 0.0);
  for (Index r : rows) {
    auto x = data.row(r);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += x[j];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  double sse = 0.0;
  for (Index r : rows) sse += squared_distance(data.row(r), mean);
  return sse;
}

TwoMeansSplit two_means(const Matrix& data, std::span<const Index> rows,
                        std::size_t restarts, std::uint64_t seed,
                        std::size_t max_iterations) {
  if (rows.size() < 2) throw InvalidArgument("two_means: need at least 2 rows");
  if (restarts < 1) throw InvalidArgument("two_means: restarts must be >= 1");
  TwoMeansSplit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(mix_seed(seed, r));
    const auto fit = detail::lloyd(data, rows, 2,
                                   detail::KMeansInit::kRandomDistinct, rng,
                                   max_iterations);
    best.restart_sse.push_back(fit.sse);
    const bool both_sides =
        std::count(fit.labels.begin(), fit.labels.end(), 0) > 0 &&
        std::count(fit.labels.begin(), fit.labels.end(), 1) > 0;
    if (!both_sides || fit.sse >= best.sse) continue;
    best.sse = fit.sse;
    best.left.clear();
    best.right.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (fit.labels[i] == 0 ? best.left : best.right).push_back(rows[i]);
    }
  }
  return best;
}

namespace {

struct BisectNode {
  std::vector<Index> points;
  int left = -1;
  int right = -1;
  double sse = 0.0;
  bool splittable = true;
};

}  // namespace

Dendrogram bisect_kmeans(const Matrix& data, const BisectConfig& config,
                         std::vector<std::string>* warnings) {
  const std::size_t n = data.rows();
  if (config.k < 2) throw InvalidArgument("bisect_kmeans: k must be >= 2");
  if (n < config.k) throw InvalidArgument("bisect_kmeans: n must be >= k");
  if (config.restarts < 1) throw InvalidArgument("bisect_kmeans: restarts must be >= 1");
  if (!data.all_finite()) throw InvalidData("dataset contains non-finite values");

  std::vector<BisectNode> nodes(1);
  nodes[0].points.resize(n);
  for (std::size_t i = 0; i < n; ++i) nodes[0].points[i] = i;
  nodes[0].sse = sum_squared_error(data, nodes[0].points);
  std::vector<int> split_order;
  std::size_t leaves = 1;

  while (leaves < config.k) {
    int target = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& nd = nodes[i];
      if (nd.left >= 0 || !nd.splittable || nd.points.size() < 2) continue;
      if (target < 0 || nd.sse > nodes[target].sse) target = static_cast<int>(i);
    }
    if (target < 0) {
      if (warnings) {
        warnings->push_back("bisect_kmeans stopped at " + std::to_string(leaves) +
                            " leaves: no splittable leaf");
      }
      break;
    }
    auto split = two_means(data, nodes[target].points, config.restarts,
                           mix_seed(config.seed, split_order.size()),
                           config.max_iterations);
    if (split.left.empty() || split.right.empty()) {
      nodes[target].splittable = false;
      continue;
    }
    BisectNode l;
    l.points = std::move(split.left);
    l.sse = sum_squared_error(data, l.points);
    BisectNode r;
    r.points = std::move(split.right);
    r.sse = sum_squared_error(data, r.points);
    nodes[target].left = static_cast<int>(nodes.size());
    nodes[target].right = static_cast<int>(nodes.size()) + 1;
    nodes.push_back(std::move(l));
    nodes.push_back(std::move(r));
    split_order.push_back(target);
    ++leaves;
  }

  // Number the leaves left to right; each becomes one cluster ID.
  std::vector<std::vector<int>> ids(nodes.size());
  std::vector<std::vector<Index>> cluster_points;
  auto label = [&](auto&& self, int id) -> void {
    auto& nd = nodes[id];
    if (nd.left < 0) {
      ids[id] = {static_cast<int>(cluster_points.size())};
      cluster_points.push_back(nd.points);
      return;
    }
    self(self, nd.left);
    self(self, nd.right);
    ids[id] = ids[nd.left];
    ids[id].insert(ids[id].end(), ids[nd.right].begin(), ids[nd.right].end());
  };
  label(label, 0);

  Dendrogram tree(cluster_points.size());
  std::vector<int> tree_id(nodes.size(), -1);
  tree_id[0] = tree.root();
  for (int s : split_order) {
    const int left = tree.split(tree_id[s], ids[nodes[s].left], ids[nodes[s].right]);
    tree_id[nodes[s].left] = left;
    tree_id[nodes[s].right] = left + 1;
  }
  tree.finalize(std::move(cluster_points), n);
  return tree;
}

}  // namespace hkc

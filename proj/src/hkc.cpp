#include "hkc/hkc.hpp"

#include <algorithm>
#include <chrono>

#include "hkc/error.hpp"
#include "hkc/parallel.hpp"

namespace hkc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<SetSummary> summarize_all(const KernelSpace& space,
                                      const std::vector<std::vector<Index>>& sets) {
  std::vector<SetSummary> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(space.summarize(s));
  return out;
}

std::vector<std::vector<Index>> group_by_cluster(std::span<const int> assignment,
                                                 std::size_t k) {
  std::vector<std::vector<Index>> groups(k);
  for (std::size_t x = 0; x < assignment.size(); ++x) {
    groups[assignment[x]].push_back(x);
  }
  return groups;
}

}  // namespace

Clusterer parse_clusterer(const std::string& name) {
  if (name == "kpskc") return Clusterer::kKpskc;
  if (name == "kmeans") return Clusterer::kKMeans;
  if (name == "ik-dbscan") return Clusterer::kIkDbscan;
  throw InvalidArgument("unknown clusterer '" + name + "'");
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "idk") return KernelKind::kIdk;
  if (name == "gdk") return KernelKind::kGdk;
  throw InvalidArgument("unknown kernel '" + name + "'");
}

std::string to_string(Clusterer c) {
  switch (c) {
    case Clusterer::kKpskc: return "kpskc";
    case Clusterer::kKMeans: return "kmeans";
    case Clusterer::kIkDbscan: return "ik-dbscan";
  }
  return "?";
}

std::string to_string(KernelKind k) {
  return k == KernelKind::kIdk ? "idk" : "gdk";
}

void HkcConfig::validate(std::size_t n) const {
  if (k < 2) throw InvalidArgument("k must be at least 2");
  if (s != 0 && (s < 2 || s > n)) {
    throw InvalidArgument("subset size must be in [2, n]");
  }
  if (kernel == KernelKind::kIdk || clusterer == Clusterer::kIkDbscan) {
    if (psi < 2 || psi > n) throw InvalidArgument("psi must be in [2, n]");
    if (t < 1) throw InvalidArgument("t must be at least 1");
  }
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must be in (0, 1)");
  if (gdk_bandwidth < 0.0) throw InvalidArgument("bandwidth must be positive");
  if (kmeans_restarts < 1) throw InvalidArgument("restarts must be at least 1");
}

Dendrogram build_tree(const CoreClusterSet& cores, const KernelSpace& space,
                      std::vector<SplitRecord>* splits) {
  const std::size_t m = cores.size();
  if (m < 2) throw InvalidArgument("build_tree: need at least 2 core clusters");
  const auto summaries = summarize_all(space, cores.clusters);
  std::vector<std::vector<double>> sim(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      sim[i][j] = sim[j][i] = space.set_set(summaries[i], summaries[j]);
    }
  }

  Dendrogram tree(m);
  while (tree.num_leaves() < m) {
    for (int leaf : tree.leaves()) {
      const auto& ids = tree.node(leaf).clusters;
      if (ids.size() < 2) continue;
      std::vector<int> by_size = ids;
      std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
        return cores.cluster_size(a) > cores.cluster_size(b);
      });
      const int a1 = by_size[0];
      const int a2 = by_size[1];
      std::vector<int> left = {a1};
      std::vector<int> right = {a2};
      for (int g : ids) {
        if (g == a1 || g == a2) continue;
        (sim[g][a2] > sim[g][a1] ? right : left).push_back(g);
      }
      tree.split(leaf, left, right);
      if (splits) splits->push_back({leaf, a1, a2});
    }
  }
  return tree;
}

std::vector<int> assign_points(const KernelSpace& space,
                               std::span<const SetSummary> clusters,
                               std::size_t* orphans) {
  if (clusters.empty()) throw InvalidArgument("assign_points: no clusters");
  const std::size_t n = space.num_points();
  std::vector<int> out(n, 0);
  std::vector<char> orphan(n, 0);
  parallel_for(0, n, [&](std::size_t x) {
    int best = 0;
    double best_sim = space.point_set(x, clusters[0]);
    for (std::size_t j = 1; j < clusters.size(); ++j) {
      const double s = space.point_set(x, clusters[j]);
      if (s > best_sim) {
        best_sim = s;
        best = static_cast<int>(j);
      }
    }
    out[x] = best;
    orphan[x] = best_sim <= 0.0;
  });
  if (orphans) {
    *orphans = static_cast<std::size_t>(std::count(orphan.begin(), orphan.end(), 1));
  }
  return out;
}

std::vector<int> assign_points(const KernelSpace& space,
                               const CoreClusterSet& cores,
                               std::size_t* orphans) {
  const auto summaries = summarize_all(space, cores.clusters);
  return assign_points(space, summaries, orphans);
}

RefineResult refine(const KernelSpace& space,
                    const std::vector<std::vector<Index>>& cores,
                    std::vector<int> initial, std::size_t k) {
  const std::size_t n = initial.size();
  if (n != space.num_points()) {
    throw InvalidArgument("refine: assignment length does not match dataset");
  }
  if (cores.size() != k) throw InvalidArgument("refine: need one core set per cluster");
  for (int a : initial) {
    if (a < 0 || static_cast<std::size_t>(a) >= k) {
      throw InvalidArgument("refine: assignment label out of range");
    }
  }
  const std::size_t delta = n / 100;
  // Delta == 0 would never stop on the change count; stop at a fixed point.
  const std::size_t threshold = std::max<std::size_t>(delta, 1);
  constexpr std::size_t kMaxIterations = 100;

  std::vector<int> previous(n, -1);  // A: starts as the core clusters
  for (std::size_t j = 0; j < k; ++j) {
    for (Index x : cores[j]) previous[x] = static_cast<int>(j);
  }
  std::vector<SetSummary> summaries = summarize_all(space, cores);

  RefineResult result;
  result.assignment = std::move(initial);
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    std::size_t changes = 0;
    for (std::size_t x = 0; x < n; ++x) {
      changes += result.assignment[x] != previous[x];
    }
    result.change_counts.push_back(changes);
    if (changes < threshold) break;

    previous = result.assignment;
    const auto groups = group_by_cluster(previous, k);
    for (std::size_t j = 0; j < k; ++j) {
      if (!groups[j].empty()) summaries[j] = space.summarize(groups[j]);
    }
    RefineIteration step;
    step.changes = changes;
    result.assignment = assign_points(space, summaries);
    std::vector<double> before(n);
    std::vector<double> after(n);
    parallel_for(0, n, [&](std::size_t x) {
      before[x] = space.point_set(x, summaries[previous[x]]);
      after[x] = space.point_set(x, summaries[result.assignment[x]]);
    });
    for (std::size_t x = 0; x < n; ++x) {
      step.objective_previous += before[x];
      step.objective_reassigned += after[x];
    }
    result.trace.push_back(step);
    ++result.iterations;
  }
  return result;
}

std::unique_ptr<KernelSpace> make_space(const Matrix& data,
                                        const HkcConfig& config,
                                        std::optional<PartitioningModel>* model,
                                        double* bandwidth) {
  if (config.kernel == KernelKind::kIdk) {
    auto fitted = fit_isolation_model(data, config.psi, config.t, config.seed);
    if (model) *model = fitted;
    return std::make_unique<IdkSpace>(std::move(fitted), data);
  }
  const double bw = config.gdk_bandwidth > 0.0
                        ? config.gdk_bandwidth
                        : median_bandwidth(data, config.seed);
  if (bandwidth) *bandwidth = bw;
  return std::make_unique<GdkSpace>(data, bw);
}

HkcResult run_hkc(const Matrix& data, const HkcConfig& config) {
  config.validate(data.rows());
  if (!data.all_finite()) throw InvalidData("dataset contains non-finite values");
  const auto start = Clock::now();
  std::optional<PartitioningModel> model;
  double bandwidth = 0.0;
  auto space = make_space(data, config, &model, &bandwidth);
  const double fit_time = seconds_since(start);
  HkcResult result = run_hkc(data, config, *space);
  result.timings.fit = fit_time;
  result.model = std::move(model);
  result.bandwidth = bandwidth;
  return result;
}

HkcResult run_hkc(const Matrix& data, const HkcConfig& config,
                  const KernelSpace& space) {
  const std::size_t n = data.rows();
  config.validate(n);
  if (space.num_points() != n) {
    throw InvalidArgument("kernel space does not match the dataset");
  }
  HkcResult result;

  auto t0 = Clock::now();
  const auto subset = select_subset(n, config.s == 0 ? n : config.s, config.seed);
  switch (config.clusterer) {
    case Clusterer::kKpskc:
      result.cores = kpskc(space, subset, config.k, config.tau, config.rho);
      break;
    case Clusterer::kKMeans:
      result.cores = kmeans_cores(data, subset, config.k,
                                  config.kmeans_restarts, config.seed);
      break;
    case Clusterer::kIkDbscan: {
      // Neighborhoods always use the Isolation Kernel, even when the
      // downstream distributional kernel is Gaussian.
      std::unique_ptr<IdkSpace> ik;
      const KernelSpace* neighborhood = &space;
      if (dynamic_cast<const IdkSpace*>(&space) == nullptr) {
        ik = std::make_unique<IdkSpace>(
            fit_isolation_model(data, config.psi, config.t, config.seed), data);
        neighborhood = ik.get();
      }
      result.cores = ik_dbscan_cores(*neighborhood, subset, config.dbscan_eps,
                                     config.dbscan_min_pts, config.k);
      break;
    }
  }
  result.timings.cores = seconds_since(t0);
  result.warnings = result.cores.warnings;
  const std::size_t k = result.cores.size();
  result.k_effective = k;
  if (k == 0) throw InvalidState("no core clusters were found");
  if (k < config.k) {
    result.warnings.push_back("proceeding with k = " + std::to_string(k) +
                              " instead of " + std::to_string(config.k));
  }

  t0 = Clock::now();
  if (k < 2) {
    result.tree = Dendrogram(1);
  } else if (config.agglomerative) {
    result.tree = ahc_build(result.cores, space);
  } else {
    result.tree = build_tree(result.cores, space, &result.splits);
  }
  result.timings.tree = seconds_since(t0);

  t0 = Clock::now();
  auto assignment = assign_points(space, result.cores, &result.orphans);
  result.timings.assign = seconds_since(t0);
  if (result.orphans > 0) {
    result.warnings.push_back(std::to_string(result.orphans) +
                              " points had zero similarity to every core "
                              "cluster and were assigned to cluster 0");
  }
  {
    Dendrogram before = result.tree;
    before.finalize(group_by_cluster(assignment, k), n);
    result.tsc_before_refine = tsc_local(before, space);
  }

  t0 = Clock::now();
  if (config.refine) {
    auto refined = refine(space, result.cores.clusters, std::move(assignment), k);
    assignment = std::move(refined.assignment);
    result.iterations = refined.iterations;
  }
  result.timings.refine = seconds_since(t0);

  result.tree.finalize(group_by_cluster(assignment, k), n);
  result.tsc_after_refine = tsc_local(result.tree, space);
  annotate_alphas(result.tree, space);
  result.assignments = std::move(assignment);
  return result;
}

PropertyViolations check_properties(const HkcResult& result,
                                    const KernelSpace& space) {
  PropertyViolations v;
  const auto& tree = result.tree;
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) {
    const auto& node = tree.node(static_cast<int>(i));
    if (node.is_leaf()) continue;
    const auto& l = tree.node(node.left).clusters;
    const auto& r = tree.node(node.right).clusters;
    std::vector<int> common;
    std::set_intersection(l.begin(), l.end(), r.begin(), r.end(),
                          std::back_inserter(common));
    std::vector<int> both;
    std::merge(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(both));
    v.split_cores += common.size();
    if (both != node.clusters) ++v.split_cores;
  }

  std::vector<SetSummary> summaries;
  for (const auto& c : result.cores.clusters) summaries.push_back(space.summarize(c));
  for (const auto& s : result.splits) {
    const auto& node = tree.node(s.node);
    const auto check_side = [&](int child, int own, int other) {
      for (int g : tree.node(child).clusters) {
        if (g == own) continue;
        if (space.set_set(summaries[g], summaries[own]) <
            space.set_set(summaries[g], summaries[other])) {
          ++v.misplaced;
        }
      }
    };
    check_side(node.left, s.anchor_left, s.anchor_right);
    check_side(node.right, s.anchor_right, s.anchor_left);
  }

  if (!tree.finalized()) {
    ++v.partition;
  } else {
    std::vector<int> hits(tree.num_points(), 0);
    for (int leaf : tree.leaves()) {
      for (Index p : tree.node_points(leaf)) ++hits[p];
    }
    for (int h : hits) v.partition += h != 1;
  }
  return v;
}

}  // namespace hkc

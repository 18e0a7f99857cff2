// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
// Every tolerance and budget is a named constant below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hkc/baseline.hpp"
#include "hkc/data.hpp"
#include "hkc/dendrogram.hpp"
#include "hkc/error.hpp"
#include "hkc/graph.hpp"
#include "hkc/hkc.hpp"
#include "hkc/ikernel.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hkc;

namespace {

// Tolerances.
constexpr double kKmeTolerance = 1e-12;
constexpr double kPurityTarget = 0.95;
constexpr double kBisectCeiling = 0.90;
constexpr double kRefineAgreement = 0.02;
constexpr double kBoundSlack = 1e-9;
constexpr double kPurityOracleTolerance = 1e-12;
constexpr double kIndexTolerance = 1e-12;
constexpr double kWlTolerance = 1e-12;
// Applied to the geometric mean ratio per doubling over 1x..8x; single
// steps of a millisecond-scale run are too noisy to bound individually.
constexpr double kMaxDoublingRatio = 3.0;
// Linear model is preferred when the fitted quadratic term explains at most
// this share of the predicted time at the largest size.
constexpr double kMaxQuadraticShare = 0.25;

// Wall-clock budgets in seconds.
constexpr double kBudgetKme = 60;
constexpr double kBudgetPurity = 120;
constexpr double kBudgetAblation = 180;
constexpr double kBudgetAhc = 10;
constexpr double kBudgetScaleup = 600;

// Instance counts.
constexpr int kKmeInstances = 120;
constexpr int kMinContractionRuns = 20;
constexpr int kPurityTrees = 200;
constexpr int kWlGraphs = 50;

// Search grid for (psi, tau); rho and t fixed.
constexpr std::size_t kPsiGrid[] = {4, 6, 8, 16, 24, 32, 48};
constexpr double kTauGrid[] = {1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1};
constexpr double kRho = 0.1;
constexpr std::size_t kT = 200;
constexpr std::size_t kK = 6;
constexpr std::uint64_t kSeed = 1;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %-3s %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& text) {
  std::printf("[INFO]     %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// One H-KC run kept for the structural and bound checks.
struct Run {
  std::string label;
  HkcResult result;
  std::shared_ptr<KernelSpace> space;
};

std::vector<Run> runs;

std::shared_ptr<KernelSpace> space_for(const Matrix& data, const HkcResult& r) {
  if (r.model) return std::make_shared<IdkSpace>(*r.model, data);
  return std::make_shared<GdkSpace>(data, r.bandwidth);
}

std::optional<HkcResult> try_run(const Matrix& data, const HkcConfig& c,
                                 const std::string& label) {
  try {
    auto r = run_hkc(data, c);
    runs.push_back({label, r, space_for(data, r)});
    return r;
  } catch (const InvalidState&) {
    return std::nullopt;  // no core cluster at this setting
  }
}

HkcConfig base_config() {
  HkcConfig c;
  c.k = kK;
  c.t = kT;
  c.rho = kRho;
  c.seed = kSeed;
  return c;
}

// ---------------------------------------------------------------------------

void kme_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < kKmeInstances; ++i) {
    const std::size_t psi = 4 + rng() % 45;
    const std::size_t t = i % 2 == 0 ? 10 : 200;
    const std::size_t n = psi + rng() % 60;
    const auto data = test::random_matrix(n, 1 + rng() % 3, rng());
    const auto m = fit_isolation_model(data, psi, t, rng());
    const auto x = test::random_matrix(1 + rng() % 30, data.cols(), rng(), -1.2, 1.2);
    const auto y = test::random_matrix(1 + rng() % 30, data.cols(), rng(), -1.2, 1.2);
    const double fast = kernel_dist_dist(embed_distribution(m, x), embed_distribution(m, y));
    worst = std::max(worst, std::abs(fast - oracle::mean_kappa(m, x, y)));
  }
  const double secs = since(t0);
  report("1", "KME identity", worst <= kKmeTolerance && secs < kBudgetKme,
         fmt("%d instances, max |<Phi(X),Phi(Y)> - mean kappa| = %.2e (tol %.0e) [%.1f s < %.0f s]",
             kKmeInstances, worst, kKmeTolerance, secs, kBudgetKme));
}

struct Tuned {
  double purity = -1.0;
  std::size_t psi = 0;
  double tau = 0.0;
  HkcResult result;
};

Tuned analog_purity(const LabeledDataset& ds) {
  const auto t0 = Clock::now();
  Tuned best;
  for (std::size_t psi : kPsiGrid) {
    for (double tau : kTauGrid) {
      auto c = base_config();
      c.psi = psi;
      c.tau = tau;
      const auto r = try_run(ds.points, c, fmt("idk psi=%zu tau=%g", psi, tau));
      if (!r) continue;
      const double p = dendrogram_purity(r->tree, *ds.labels);
      if (p > best.purity) best = {p, psi, tau, *r};
    }
  }
  BisectConfig bc;
  bc.k = kK;
  bc.seed = kSeed;
  const double bisect = dendrogram_purity(bisect_kmeans(ds.points, bc), *ds.labels);
  const double secs = since(t0);
  report("2", "artificial-analog purity",
         best.purity >= kPurityTarget && bisect <= kBisectCeiling && secs < kBudgetPurity,
         fmt("H-KC best %.4f at psi=%zu tau=%g (>= %.2f); Bisect-Kmeans %.4f (<= %.2f); "
             "n=%zu [%.1f s < %.0f s]",
             best.purity, best.psi, best.tau, kPurityTarget, bisect, kBisectCeiling,
             ds.size(), secs, kBudgetPurity));
  return best;
}

void ablations(const LabeledDataset& ds, const Tuned& tuned) {
  const auto t0 = Clock::now();
  // GDK with the default median-heuristic bandwidth, same tau grid.
  double gdk_best = -1.0;
  double gdk_tau = 0.0;
  double bandwidth = 0.0;
  for (double tau : kTauGrid) {
    auto c = base_config();
    c.kernel = KernelKind::kGdk;
    c.tau = tau;
    const auto r = try_run(ds.points, c, fmt("gdk median tau=%g", tau));
    if (!r) continue;
    bandwidth = r->bandwidth;
    const double p = dendrogram_purity(r->tree, *ds.labels);
    if (p > gdk_best) {
      gdk_best = p;
      gdk_tau = tau;
    }
  }
  auto c = base_config();
  c.psi = tuned.psi;
  c.tau = tuned.tau;
  c.refine = false;
  const auto plain = try_run(ds.points, c, "idk no-refine");
  const double no_refine = plain ? dendrogram_purity(plain->tree, *ds.labels) : 0.0;
  const double secs = since(t0);
  const bool pass = tuned.purity > gdk_best &&
                    std::abs(tuned.purity - no_refine) <= kRefineAgreement &&
                    secs < kBudgetAblation;
  report("3", "ablation ordering", pass,
         fmt("IDK %.4f > GDK %.4f (median bandwidth %.3f, best tau=%g); refine %.4f vs "
             "no-refine %.4f, |diff| %.4f <= %.2f [%.1f s < %.0f s]",
             tuned.purity, gdk_best, bandwidth, gdk_tau, tuned.purity, no_refine,
             std::abs(tuned.purity - no_refine), kRefineAgreement, secs, kBudgetAblation));

  // Not part of the criterion: GDK with hand-picked bandwidths.
  double swept = -1.0;
  std::string where;
  for (double scale : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    for (double tau : {5e-3, 1e-2, 5e-2}) {
      auto g = base_config();
      g.kernel = KernelKind::kGdk;
      g.gdk_bandwidth = bandwidth * scale;
      g.tau = tau;
      const auto r = try_run(ds.points, g, fmt("gdk bw=%.3f tau=%g", g.gdk_bandwidth, tau));
      if (!r) continue;
      const double p = dendrogram_purity(r->tree, *ds.labels);
      if (p > swept) {
        swept = p;
        where = fmt("bandwidth %.3f, tau=%g", g.gdk_bandwidth, tau);
      }
    }
  }
  info(fmt("GDK with swept bandwidth reaches %.4f (%s); IDK best %.4f", swept,
           where.c_str(), tuned.purity));
}

void extra_runs() {
  // Smaller, differently shaped datasets so the bound checks see more trees.
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto data = test::blobs({{0, 0}, {3, 0}, {0, 3}, {3, 3}, {6, 1.5}}, 60,
                                  0.3 + 0.1 * static_cast<double>(seed % 4), seed);
    auto c = base_config();
    c.k = 5;
    c.psi = 8 + 4 * (seed % 3);
    c.t = 100;
    c.tau = 0.005;
    c.seed = seed;
    c.s = seed % 2 == 0 ? 200 : 0;
    try_run(data, c, fmt("blobs seed=%llu", static_cast<unsigned long long>(seed)));
  }
}

void contraction_bounds() {
  std::size_t trees = 0, steps = 0;
  double worst_lemma = INFINITY, worst_corollary = INFINITY;
  for (const auto& run : runs) {
    const auto& tree = run.result.tree;
    if (tree.num_leaves() < 2) continue;
    ++trees;
    const std::size_t k = tree.num_leaves();
    const auto seq = contraction_sequence(tree, *run.space);
    double alpha_max = 0.0;
    for (const auto& s : seq) {
      ++steps;
      worst_lemma = std::min(worst_lemma, s.tsc_local_after - (s.tsc_local_before - s.sibling_distance));
      alpha_max = std::max(alpha_max, s.sibling_distance);
    }
    const double local = tsc_local(tree, *run.space);
    for (std::size_t p = 1; p <= k; ++p) {
      const double g = tsc_global_p(tree, p, *run.space);
      worst_corollary = std::min(worst_corollary, g - (local - static_cast<double>(k - p) * alpha_max));
    }
  }
  report("4", "single-contraction bound",
         trees >= static_cast<std::size_t>(kMinContractionRuns) && worst_lemma >= -kBoundSlack,
         fmt("%zu dendrograms, %zu contraction steps, min slack %.3e (>= -%.0e)", trees,
             steps, worst_lemma, kBoundSlack));
  report("5", "p-level global bound",
         trees >= static_cast<std::size_t>(kMinContractionRuns) && worst_corollary >= -kBoundSlack,
         fmt("%zu dendrograms, all p in [1,k], min slack %.3e (>= -%.0e)", trees,
             worst_corollary, kBoundSlack));
}

void ahc_equivalence(const LabeledDataset& ds, const Tuned& tuned) {
  const auto t0 = Clock::now();
  IdkSpace space(*tuned.result.model, ds.points);
  const auto divisive = build_tree(tuned.result.cores, space);
  const auto agglomerative = ahc_build(tuned.result.cores, space);
  const bool same = same_topology(divisive, agglomerative);
  const double secs = since(t0);
  report("6", "AHC equivalence", same && secs < kBudgetAhc,
         fmt("%zu core clusters; build_tree %s vs ahc_build %s [%.2f s < %.0f s]",
             tuned.result.cores.size(), divisive.canonical_topology().c_str(),
             agglomerative.canonical_topology().c_str(), secs, kBudgetAhc));
}

void metric_oracles() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < kPurityTrees; ++i) {
    const std::size_t k = 1 + rng() % 8;
    const std::size_t n = k + 1 + rng() % (50 - k);
    const auto tree = oracle::random_tree(k, n, rng, i % 3 != 0);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng() % (1 + i % 4));
    labels[0] = labels[1];
    worst = std::max(worst, std::abs(dendrogram_purity(tree, labels) - oracle::pair_purity(tree, labels)));
  }
  // Hand-worked contingency tables.
  const std::vector<int> a = {0, 0, 1, 1}, b = {0, 0, 1, 2};
  const std::vector<int> c = {0, 0, 0, 1, 1, 1}, d = {0, 0, 1, 1, 2, 2};
  const double ln2 = std::log(2.0), ln3 = std::log(3.0);
  const double errs[] = {
      std::abs(ari(b, a) - 4.0 / 7.0),
      std::abs(nmi(b, a) - 0.8),
      std::abs(ari(d, c) - 0.8 / 3.3),
      std::abs(nmi(d, c) - (2.0 / 3.0) * ln2 / ((ln2 + ln3) / 2)),
  };
  const double worst_index = *std::max_element(std::begin(errs), std::end(errs));
  report("7", "purity/NMI/ARI oracles",
         worst <= kPurityOracleTolerance && worst_index <= kIndexTolerance,
         fmt("%d random trees (n <= 50), max purity diff %.2e (tol %.0e); "
             "NMI/ARI max diff %.2e (tol %.0e)",
             kPurityTrees, worst, kPurityOracleTolerance, worst_index, kIndexTolerance));
}

// Recomputes the desired properties without check_properties.
std::size_t violations(const Run& run) {
  const auto& r = run.result;
  const auto& tree = r.tree;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) {
    const auto& node = tree.node(static_cast<int>(i));
    if (node.is_leaf()) continue;
    std::vector<int> joined = tree.node(node.left).clusters;
    const auto& right = tree.node(node.right).clusters;
    joined.insert(joined.end(), right.begin(), right.end());
    std::sort(joined.begin(), joined.end());
    bad += joined != node.clusters;
    bad += std::adjacent_find(joined.begin(), joined.end()) != joined.end();
  }
  std::vector<SetSummary> sum;
  for (const auto& g : r.cores.clusters) sum.push_back(run.space->summarize(g));
  for (const auto& s : r.splits) {
    const auto& node = tree.node(s.node);
    auto ids = node.clusters;
    std::stable_sort(ids.begin(), ids.end(), [&](int x, int y) {
      return r.cores.cluster_size(x) > r.cores.cluster_size(y);
    });
    const int a1 = ids[0], a2 = ids[1];
    const auto& left = tree.node(node.left).clusters;
    const auto& right = tree.node(node.right).clusters;
    bad += std::find(left.begin(), left.end(), a1) == left.end();
    bad += std::find(right.begin(), right.end(), a2) == right.end();
    for (int g : ids) {
      if (g == a1 || g == a2) continue;
      const bool goes_right = run.space->set_set(sum[g], sum[a2]) > run.space->set_set(sum[g], sum[a1]);
      const auto& side = goes_right ? right : left;
      bad += std::find(side.begin(), side.end(), g) == side.end();
    }
  }
  std::vector<int> hits(tree.num_points(), 0);
  for (int leaf : tree.leaves()) {
    for (Index p : tree.node_points(leaf)) ++hits[p];
  }
  for (int h : hits) bad += h != 1;
  bad += tree.num_points() != run.space->num_points();
  return bad;
}

void structural_suite() {
  std::size_t total = 0, library = 0;
  for (const auto& run : runs) {
    total += violations(run);
    library += check_properties(run.result, *run.space).total();
  }
  report("8", "desired-property suite", total == 0 && library == 0,
         fmt("%zu H-KC runs, %zu violations (independent check), %zu (library check)",
             runs.size(), total, library));
}

// Least squares polynomial coefficients via normal equations (tiny systems).
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const int m = degree + 1;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a[r][c] += std::pow(x[i], r + c);
      a[r][m] += std::pow(x[i], r) * y[i];
    }
  }
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> coef;
  for (int r = 0; r < m; ++r) coef.push_back(a[r][m] / a[r][r]);
  return coef;
}

// Median over `repeats` batches; each batch repeats f until at least
// `min_batch` seconds pass and records the mean time per call.
double median_time(int repeats, const std::function<void()>& f, double min_batch = 0.0) {
  std::vector<double> t;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = Clock::now();
    int calls = 0;
    do {
      f();
      ++calls;
    } while (since(t0) < min_batch);
    t.push_back(since(t0) / calls);
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

void scaleup(const Tuned& tuned) {
  const auto t0 = Clock::now();
  constexpr std::size_t kSubset = 1000;
  constexpr int kRepeats = 5;
  constexpr double kMinBatch = 0.25;
  const std::vector<std::size_t> mult = {1, 2, 4, 8};
  std::vector<double> x, hkc_t, bisect_t;
  for (std::size_t m : mult) {
    const auto ds = paper_analog(7, m);
    auto c = base_config();
    c.psi = tuned.psi;
    c.tau = tuned.tau;
    c.s = kSubset;
    hkc_t.push_back(median_time(kRepeats, [&] { (void)run_hkc(ds.points, c); }));
    BisectConfig bc;
    bc.k = kK;
    bc.seed = kSeed;
    bisect_t.push_back(
        median_time(kRepeats, [&] { (void)bisect_kmeans(ds.points, bc); }, kMinBatch));
    x.push_back(static_cast<double>(m));
  }
  const double doublings = std::log2(x.back() / x.front());
  const double hkc_ratio = std::pow(hkc_t.back() / hkc_t.front(), 1.0 / doublings);
  const double bisect_ratio = std::pow(bisect_t.back() / bisect_t.front(), 1.0 / doublings);
  double hkc_step = 0.0, bisect_step = 0.0;
  for (std::size_t i = 1; i < mult.size(); ++i) {
    hkc_step = std::max(hkc_step, hkc_t[i] / hkc_t[i - 1]);
    bisect_step = std::max(bisect_step, bisect_t[i] / bisect_t[i - 1]);
  }
  std::string ratios;
  for (std::size_t i = 0; i < mult.size(); ++i) {
    ratios += fmt("%s%zux: %.3fs/%.3fs", i ? ", " : "", mult[i], hkc_t[i], bisect_t[i]);
  }
  const double top = x.back();
  auto quadratic_share = [&](const std::vector<double>& y) {
    const auto quad = polyfit(x, y, 2);
    const double predicted = quad[0] + quad[1] * top + quad[2] * top * top;
    return quad[2] <= 0.0 ? 0.0 : quad[2] * top * top / predicted;
  };
  const double share = quadratic_share(hkc_t);
  const double bisect_share = quadratic_share(bisect_t);
  const double secs = since(t0);
  info("scaleup times H-KC/Bisect-Kmeans (s = 1000, k = 6): " + ratios);
  info(fmt("largest single-step ratio H-KC %.2f, Bisect-Kmeans %.2f; Bisect-Kmeans quadratic "
           "share at 8n %.3f",
           hkc_step, bisect_step, bisect_share));
  report("9", "scaleup",
         hkc_ratio <= kMaxDoublingRatio && bisect_ratio <= kMaxDoublingRatio &&
             share <= kMaxQuadraticShare && secs < kBudgetScaleup,
         fmt("mean ratio per doubling H-KC %.2f, Bisect-Kmeans %.2f (<= %.1f); H-KC quadratic "
             "share at 8n %.3f (<= %.2f) [%.1f s < %.0f s]",
             hkc_ratio, bisect_ratio, kMaxDoublingRatio, share, kMaxQuadraticShare, secs,
             kBudgetScaleup));
}

void wl_embedding() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int i = 0; i < kWlGraphs; ++i) {
    const std::size_t n = 1 + rng() % 15, m = 1 + rng() % 4, h = rng() % 6;
    const auto attrs = test::random_matrix(n, m, rng());
    const auto edges = oracle::random_edges(n, rng, i % 2 == 0);
    const auto got = wl_embed(AttributedGraph(attrs, edges), h).vertices;
    const auto want = oracle::wl(attrs, edges, h);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t j = 0; j < want.cols(); ++j) {
        worst = std::max(worst, std::abs(got(v, j) - want(v, j)));
      }
    }
  }
  // Equal (dyadic) attributes with unit weights stay fixed at every level.
  bool fixed = true;
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 2 + rng() % 12;
    Matrix attrs(n, 3);
    for (std::size_t v = 0; v < n; ++v) {
      attrs(v, 0) = 0.625;
      attrs(v, 1) = -2.0;
      attrs(v, 2) = 1024.5;
    }
    const auto emb = wl_embed(AttributedGraph(attrs, oracle::random_edges(n, rng, true)), 5);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t j = 0; j < emb.vertices.cols(); ++j) {
        fixed = fixed && emb.vertices(v, j) == attrs(v, j % 3);
      }
    }
  }
  report("11", "WL embedding", worst <= kWlTolerance && fixed,
         fmt("%d random graphs (h <= 5), max diff %.2e (tol %.0e); equal-attribute fixed point %s",
             kWlGraphs, worst, kWlTolerance, fixed ? "exact" : "broken"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const auto ds = paper_analog();
  info(fmt("dataset %s: n=%zu, d=%zu", kPaperAnalogVersion, ds.size(), ds.dim()));

  kme_identity();
  const auto tuned = analog_purity(ds);
  ablations(ds, tuned);
  extra_runs();
  contraction_bounds();
  ahc_equivalence(ds, tuned);
  metric_oracles();
  structural_suite();
  scaleup(tuned);
  std::printf("[N/A ] 10  real-data results: HER2, Slide-seq V2 and the 14-dataset table "
              "need external data pipelines; declared not reproducible\n");
  wl_embedding();

  std::printf("%d criteria failed; total %.1f s\n", failures, since(t0));
  return failures == 0 ? 0 : 1;
}

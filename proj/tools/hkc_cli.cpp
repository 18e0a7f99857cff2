// hkc: command-line frontend for kernel-driven divisive hierarchical
// clustering. Exit codes: 0 success, 2 usage/validation error, 1 internal.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hkc/baseline.hpp"
#include "hkc/data.hpp"
#include "hkc/dendrogram.hpp"
#include "hkc/error.hpp"
#include "hkc/graph.hpp"
#include "hkc/hkc.hpp"
#include "hkc/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestSchema = "hkc.manifest/1";

// Usage error raised after CLI11 parsing succeeded.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

// 64-bit FNV-1a of a file's bytes, hex encoded.
std::string file_hash(const std::string& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : read_text(path)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool header_has(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return false;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) {
    cell.erase(std::remove_if(cell.begin(), cell.end(),
                              [](char c) { return c == '"' || c == '\r' || c == ' '; }),
               cell.end());
    if (cell == column) return true;
  }
  return false;
}

hkc::LabeledDataset load_dataset(const std::string& path,
                                 const std::string& label_column) {
  std::optional<std::string> label;
  if (!label_column.empty() && header_has(path, label_column)) label = label_column;
  auto ds = hkc::load_csv(path, label);
  ds.validate();
  return ds;
}

std::string default_out_dir() {
  if (const char* env = std::getenv("HKC_OUTPUT_DIR"); env && *env) return env;
  return "hkc_out";
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string preset;
  std::string spec;
  std::uint64_t seed = 7;
  std::size_t scale = 1;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.preset.empty() == a.spec.empty()) {
    throw UsageError("give exactly one of --preset or --spec");
  }
  hkc::LabeledDataset ds;
  if (!a.preset.empty()) {
    if (a.preset != "paper-analog") throw UsageError("unknown preset '" + a.preset + "'");
    ds = hkc::paper_analog(a.seed, a.scale);
  } else {
    auto comps = hkc::mixture_from_json(read_text(a.spec));
    for (auto& c : comps) c.n *= a.scale;
    ds = hkc::generate_mixture(comps, a.seed, a.spec);
  }
  hkc::save_csv(a.out, ds);
  std::cout << "wrote " << ds.size() << " points (" << ds.dim() << "-D, "
            << (ds.labels ? std::set<int>(ds.labels->begin(), ds.labels->end()).size() : 0)
            << " classes) to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ClusterArgs {
  std::string algo = "hkc";
  std::string in;
  std::string label_column = "label";
  std::string out_dir;
  std::size_t k = 6;
  std::size_t psi = 16;
  std::size_t t = 200;
  double tau = 0.01;
  double rho = 0.1;
  std::size_t subset = 0;
  std::string kernel = "idk";
  std::string clusterer = "kpskc";
  bool no_refine = false;
  std::uint64_t seed = 1;
  std::size_t restarts = 10;
  double bandwidth = 0.0;
  double eps_sim = 0.5;
  std::size_t min_pts = 5;
};

int cmd_cluster(const ClusterArgs& a) {
  const auto ds = load_dataset(a.in, a.label_column);
  const fs::path dir = a.out_dir.empty() ? default_out_dir() : a.out_dir;
  fs::create_directories(dir);

  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["command"] = "cluster";
  manifest["seed"] = a.seed;
  manifest["input"] = {{"path", a.in}, {"fnv1a64", file_hash(a.in)},
                       {"n", ds.size()}, {"d", ds.dim()}};
  json config = {{"algo", a.algo}, {"k", a.k}, {"seed", a.seed}};
  json outputs;
  json warnings = json::array();
  json timings;

  hkc::Dendrogram tree;
  std::vector<int> assignment;
  std::optional<hkc::PartitioningModel> model;

  if (a.algo == "bisect-kmeans") {
    hkc::BisectConfig cfg;
    cfg.k = a.k;
    cfg.restarts = a.restarts;
    cfg.seed = a.seed;
    config["restarts"] = a.restarts;
    std::vector<std::string> warn;
    const auto start = std::chrono::steady_clock::now();
    tree = hkc::bisect_kmeans(ds.points, cfg, &warn);
    timings["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& w : warn) warnings.push_back(w);
    std::vector<int> leaf_cluster(tree.num_points());
    for (std::size_t c = 0; c < tree.num_clusters(); ++c) {
      for (auto p : tree.cluster_points(static_cast<int>(c))) {
        leaf_cluster[p] = static_cast<int>(c);
      }
    }
    assignment = std::move(leaf_cluster);
  } else if (a.algo == "hkc" || a.algo == "ahc") {
    hkc::HkcConfig cfg;
    cfg.s = a.subset;
    cfg.k = a.k;
    cfg.psi = a.psi;
    cfg.t = a.t;
    cfg.tau = a.tau;
    cfg.rho = a.rho;
    cfg.seed = a.seed;
    cfg.kernel = hkc::parse_kernel(a.kernel);
    cfg.clusterer = hkc::parse_clusterer(a.clusterer);
    cfg.refine = !a.no_refine;
    cfg.agglomerative = a.algo == "ahc";
    cfg.gdk_bandwidth = a.bandwidth;
    cfg.dbscan_eps = a.eps_sim;
    cfg.dbscan_min_pts = a.min_pts;
    cfg.kmeans_restarts = a.restarts;
    config.update({{"subset_size", a.subset == 0 ? ds.size() : a.subset},
                   {"psi", a.psi}, {"t", a.t}, {"tau", a.tau}, {"rho", a.rho},
                   {"kernel", a.kernel}, {"clusterer", a.clusterer},
                   {"refine", !a.no_refine}, {"restarts", a.restarts},
                   {"eps_sim", a.eps_sim}, {"min_pts", a.min_pts}});
    auto result = hkc::run_hkc(ds.points, cfg);
    if (cfg.kernel == hkc::KernelKind::kGdk) config["bandwidth"] = result.bandwidth;
    for (auto& w : result.warnings) warnings.push_back(w);
    timings = {{"fit", result.timings.fit}, {"cores", result.timings.cores},
               {"tree", result.timings.tree}, {"assign", result.timings.assign},
               {"refine", result.timings.refine}, {"total", result.timings.total()}};
    manifest["k_effective"] = result.k_effective;
    manifest["refine_iterations"] = result.iterations;
    manifest["orphans"] = result.orphans;
    manifest["metrics"]["tsc_local_before_refine"] = result.tsc_before_refine;
    manifest["metrics"]["tsc_local"] = result.tsc_after_refine;
    write_text(dir / "cores.json", hkc::cores_to_json(result.cores) + "\n");
    outputs["cores"] = (dir / "cores.json").string();
    model = std::move(result.model);
    tree = std::move(result.tree);
    assignment = std::move(result.assignments);
  } else {
    throw UsageError("unknown --algo '" + a.algo + "'");
  }

  write_text(dir / "tree.nwk", tree.to_newick() + "\n");
  write_text(dir / "tree.json", tree.to_json() + "\n");
  hkc::save_assignments((dir / "assignments.csv").string(), assignment);
  outputs["newick"] = (dir / "tree.nwk").string();
  outputs["tree"] = (dir / "tree.json").string();
  outputs["assignments"] = (dir / "assignments.csv").string();
  if (model) {
    hkc::save_model((dir / "model.json").string(), *model);
    outputs["model"] = (dir / "model.json").string();
  }

  if (ds.labels) {
    manifest["metrics"]["purity"] = hkc::dendrogram_purity(tree, *ds.labels);
    manifest["metrics"]["nmi"] = hkc::nmi(assignment, *ds.labels);
    manifest["metrics"]["ari"] = hkc::ari(assignment, *ds.labels);
  }
  manifest["config"] = config;
  manifest["outputs"] = outputs;
  manifest["timings"] = timings;
  manifest["warnings"] = warnings;
  manifest["leaves"] = tree.num_leaves();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << a.algo << ": " << tree.num_leaves() << " leaves";
  if (ds.labels) {
    std::cout << ", purity " << manifest["metrics"]["purity"].get<double>();
  }
  std::cout << "\nmanifest: " << (dir / "manifest.json").string() << "\n";
  for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string tree;
  std::string labels;
  std::string label_column = "label";
  std::string metrics = "purity,nmi,ari";
  std::string data;
  std::string model;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const auto tree = hkc::Dendrogram::from_json(read_text(a.tree));
  if (!tree.finalized()) throw UsageError("tree file has no point assignment");
  std::vector<std::string> wanted;
  std::stringstream ss(a.metrics);
  for (std::string m; std::getline(ss, m, ',');) {
    if (m != "purity" && m != "nmi" && m != "ari" && m != "tsc") {
      throw UsageError("unknown metric '" + m + "'");
    }
    wanted.push_back(m);
  }

  const auto labelled = hkc::load_csv(a.labels, a.label_column);
  const auto& labels = *labelled.labels;
  if (labels.size() != tree.num_points()) {
    throw UsageError("label count " + std::to_string(labels.size()) +
                     " does not match tree point count " +
                     std::to_string(tree.num_points()));
  }
  std::vector<int> assignment(tree.num_points());
  {
    const auto leaf = tree.leaf_of_points();
    const auto leaves = tree.leaves();
    for (std::size_t p = 0; p < leaf.size(); ++p) {
      assignment[p] = static_cast<int>(
          std::find(leaves.begin(), leaves.end(), leaf[p]) - leaves.begin());
    }
  }

  json report;
  for (const auto& m : wanted) {
    if (m == "purity") report["purity"] = hkc::dendrogram_purity(tree, labels);
    if (m == "nmi") report["nmi"] = hkc::nmi(assignment, labels);
    if (m == "ari") report["ari"] = hkc::ari(assignment, labels);
    if (m == "tsc") {
      if (a.model.empty()) throw UsageError("tsc needs --model");
      const auto data = a.data.empty() ? labelled.points
                                       : load_dataset(a.data, a.label_column).points;
      if (data.rows() != tree.num_points()) {
        throw UsageError("data row count does not match the tree");
      }
      hkc::IdkSpace space(hkc::load_model(a.model), data);
      report["tsc"] = hkc::tsc(tree, space);
      report["tsc_local"] = hkc::tsc_local(tree, space);
    }
  }
  for (const auto& [key, value] : report.items()) {
    std::printf("%-10s %.6f\n", key.c_str(), value.get<double>());
  }
  if (!a.out.empty()) write_text(a.out, report.dump(2) + "\n");
  std::cout << report.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string sizes = "1x,2x,4x,8x";
  std::string vary = "n";
  std::size_t repeats = 3;
  std::size_t k = 6;
  std::size_t subset = 1000;
  std::size_t psi = 16;
  std::size_t t = 200;
  double tau = 0.01;
  std::size_t restarts = 10;
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    if (tok.back() == 'x') tok.pop_back();
    std::size_t pos = 0;
    std::size_t v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || v == 0) throw UsageError("bad size '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--sizes must list at least one size");
  return out;
}

template <class F>
double median_seconds(std::size_t repeats, F&& run) {
  std::vector<double> times;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    run();
    times.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

int cmd_bench(const BenchArgs& a) {
  const auto sizes = parse_sizes(a.sizes);
  if (a.vary != "n" && a.vary != "s") throw UsageError("--vary must be n or s");
  if (a.repeats < 1) throw UsageError("--repeats must be >= 1");
  std::string csv = "ratio,n,s,hkc_seconds,bisect_seconds\n";
  std::printf("%6s %8s %8s %12s %14s\n", "ratio", "n", "s", "hkc[s]", "bisect[s]");
  for (std::size_t m : sizes) {
    const auto ds = hkc::paper_analog(a.seed, a.vary == "n" ? m : 1);
    hkc::HkcConfig cfg;
    cfg.k = a.k;
    cfg.psi = a.psi;
    cfg.t = a.t;
    cfg.tau = a.tau;
    cfg.seed = a.seed;
    cfg.s = std::min(ds.size(), a.vary == "n" ? a.subset : a.subset * m);
    const double hkc_time =
        median_seconds(a.repeats, [&] { (void)hkc::run_hkc(ds.points, cfg); });
    double bisect_time = 0.0;
    if (a.vary == "n") {
      hkc::BisectConfig bc;
      bc.k = a.k;
      bc.restarts = a.restarts;
      bc.seed = a.seed;
      bisect_time =
          median_seconds(a.repeats, [&] { (void)hkc::bisect_kmeans(ds.points, bc); });
    }
    std::printf("%5zux %8zu %8zu %12.4f %14.4f\n", m, ds.size(), cfg.s, hkc_time,
                bisect_time);
    csv += std::to_string(m) + "," + std::to_string(ds.size()) + "," +
           std::to_string(cfg.s) + "," + std::to_string(hkc_time) + "," +
           std::to_string(bisect_time) + "\n";
  }
  if (!a.out.empty()) write_text(a.out, csv);
  return 0;
}

// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string in;
  std::string assignments;
  std::string out;
  std::string label_column = "label";
};

int cmd_plot(const PlotArgs& a) {
  const auto ds = load_dataset(a.in, a.label_column);
  if (ds.dim() != 2) {
    throw UsageError("plot needs 2-D data, got " + std::to_string(ds.dim()) + "-D");
  }
  const auto assignment = hkc::load_assignments(a.assignments);
  if (assignment.size() != ds.size()) {
    throw UsageError("assignment count does not match the dataset");
  }
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf",
                                   "#bcbd22", "#393b79", "#637939", "#843c39"};
  constexpr double kSize = 600.0;
  constexpr double kMargin = 20.0;
  double lo[2] = {INFINITY, INFINITY};
  double hi[2] = {-INFINITY, -INFINITY};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < 2; ++j) {
      lo[j] = std::min(lo[j], ds.points(i, j));
      hi[j] = std::max(hi[j], ds.points(i, j));
    }
  }
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-12});
  const double scale = (kSize - 2 * kMargin) / span;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
      << "\" height=\"" << kSize << "\" viewBox=\"0 0 " << kSize << ' ' << kSize
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x = kMargin + (ds.points(i, 0) - lo[0]) * scale;
    const double y = kSize - kMargin - (ds.points(i, 1) - lo[1]) * scale;
    const int c = assignment[i];
    const char* color = c < 0 ? "#999999" : kPalette[c % 12];
    svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"" << color
        << "\" data-cluster=\"" << c << "\"/>\n";
  }
  svg << "</svg>\n";
  write_text(a.out, svg.str());
  std::cout << "wrote " << ds.size() << " markers to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct WlArgs {
  std::string edges;
  std::string attributes;
  std::size_t h = 7;
  std::string out;
};

int cmd_wl(const WlArgs& a) {
  const auto graph = hkc::load_graph(a.edges, a.attributes);
  const auto emb = hkc::wl_embed(graph, a.h);
  hkc::LabeledDataset out;
  out.points = emb.vertices;
  hkc::save_csv(a.out, out);
  std::cout << "graph embedding:";
  for (double v : emb.graph) std::cout << ' ' << v;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-driven divisive hierarchical clustering"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic labelled dataset");
  g->add_option("--preset", gen.preset, "Named dataset (paper-analog)");
  g->add_option("--spec", gen.spec, "JSON mixture specification");
  g->add_option("--seed", gen.seed);
  g->add_option("--scale", gen.scale, "Multiply every component size")
      ->check(CLI::PositiveNumber);
  g->add_option("--out", gen.out)->required();

  ClusterArgs cl;
  auto* c = app.add_subcommand("cluster", "Build a dendrogram");
  c->add_option("--algo", cl.algo)->check(CLI::IsMember({"hkc", "bisect-kmeans", "ahc"}));
  c->add_option("--in", cl.in)->required()->check(CLI::ExistingFile);
  c->add_option("--label-column", cl.label_column);
  c->add_option("--out-dir", cl.out_dir, "Output directory (default $HKC_OUTPUT_DIR or hkc_out)");
  c->add_option("--k", cl.k)->check(CLI::Range(2, 1 << 20));
  c->add_option("--psi", cl.psi)->check(CLI::Range(2, 1 << 20));
  c->add_option("--t", cl.t)->check(CLI::Range(1, 1 << 20));
  c->add_option("--tau", cl.tau)->check(CLI::PositiveNumber);
  c->add_option("--rho", cl.rho)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  c->add_option("--subset-size", cl.subset, "0 = whole dataset");
  c->add_option("--kernel", cl.kernel)->check(CLI::IsMember({"idk", "gdk"}));
  c->add_option("--clusterer", cl.clusterer)
      ->check(CLI::IsMember({"kpskc", "kmeans", "ik-dbscan"}));
  c->add_flag("--no-refine", cl.no_refine);
  c->add_option("--seed", cl.seed);
  c->add_option("--restarts", cl.restarts)->check(CLI::Range(1, 1 << 20));
  c->add_option("--bandwidth", cl.bandwidth, "GDK bandwidth (0 = median heuristic)");
  c->add_option("--eps-sim", cl.eps_sim)->check(CLI::Range(1e-12, 1.0));
  c->add_option("--min-pts", cl.min_pts)->check(CLI::Range(1, 1 << 20));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a dendrogram");
  e->add_option("--tree", ev.tree)->required()->check(CLI::ExistingFile);
  e->add_option("--labels", ev.labels)->required()->check(CLI::ExistingFile);
  e->add_option("--label-column", ev.label_column);
  e->add_option("--metrics", ev.metrics, "Comma list of purity,nmi,ari,tsc");
  e->add_option("--data", ev.data, "Points for tsc (default: the labels file)");
  e->add_option("--model", ev.model, "Isolation model JSON for tsc");
  e->add_option("--out", ev.out, "Write the report as JSON");

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Scaleup timing on the paper-analog family");
  b->add_option("--sizes", be.sizes, "Comma list of multipliers, e.g. 1x,2x,4x,8x");
  b->add_option("--vary", be.vary, "Scale n (dataset) or s (subset)");
  b->add_option("--repeats", be.repeats);
  b->add_option("--k", be.k);
  b->add_option("--subset-size", be.subset);
  b->add_option("--psi", be.psi);
  b->add_option("--t", be.t);
  b->add_option("--tau", be.tau);
  b->add_option("--restarts", be.restarts);
  b->add_option("--seed", be.seed);
  b->add_option("--out", be.out, "CSV output");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Render a 2-D clustering as SVG");
  p->add_option("--in", pl.in)->required()->check(CLI::ExistingFile);
  p->add_option("--assignments", pl.assignments)->required()->check(CLI::ExistingFile);
  p->add_option("--out", pl.out)->required();
  p->add_option("--label-column", pl.label_column);

  WlArgs wl;
  auto* w = app.add_subcommand("wl-embed", "Weisfeiler-Lehman embedding of an attributed graph");
  w->add_option("--edges", wl.edges)->required()->check(CLI::ExistingFile);
  w->add_option("--attributes", wl.attributes)->required()->check(CLI::ExistingFile);
  w->add_option("--iterations", wl.h, "WL iterations h");
  w->add_option("--out", wl.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    hkc::set_num_threads(threads);
    if (*g) return cmd_generate(gen);
    if (*c) return cmd_cluster(cl);
    if (*e) return cmd_eval(ev);
    if (*b) return cmd_bench(be);
    if (*p) return cmd_plot(pl);
    if (*w) return cmd_wl(wl);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const hkc::InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const hkc::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const hkc::InvalidData& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}

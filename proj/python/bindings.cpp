#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hkc/baseline.hpp"
#include "hkc/data.hpp"
#include "hkc/dendrogram.hpp"
#include "hkc/error.hpp"
#include "hkc/graph.hpp"
#include "hkc/hkc.hpp"
#include "hkc/ikernel.hpp"
#include "hkc/parallel.hpp"

namespace py = pybind11;
using namespace hkc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

py::array_t<int> to_int_array(const std::vector<int>& v) {
  return py::array_t<int>(static_cast<py::ssize_t>(v.size()), v.data());
}

}  // namespace

PYBIND11_MODULE(_hkc, m) {
  m.doc() = "Hierarchical clustering with a distributional kernel";

  py::register_exception<InvalidData>(m, "InvalidData", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidState>(m, "InvalidState", PyExc_RuntimeError);

  m.def("set_num_threads", &set_num_threads, py::arg("n"));

  py::class_<PartitioningModel>(m, "IsolationModel")
      .def_readonly("psi", &PartitioningModel::psi)
      .def_readonly("t", &PartitioningModel::t)
      .def_property_readonly("feature_dim", &PartitioningModel::feature_dim)
      .def("to_json", [](const PartitioningModel& pm) { return model_to_json(pm); })
      .def_static("from_json", &model_from_json)
      .def("kernel", [](const PartitioningModel& pm, const Array& x, const Array& y) {
        return kernel_dist_dist(embed_distribution(pm, to_matrix(x)),
                                embed_distribution(pm, to_matrix(y)));
      }, py::arg("x"), py::arg("y"),
      "Isolation distributional kernel between two samples (rows are points).")
      .def("__eq__", [](const PartitioningModel& a, const PartitioningModel& b) { return a == b; });

  m.def("fit_isolation_model", [](const Array& data, std::size_t psi, std::size_t t,
                                  std::uint64_t seed) {
    return fit_isolation_model(to_matrix(data), psi, t, seed);
  }, py::arg("data"), py::arg("psi"), py::arg("t") = 200, py::arg("seed") = 1);

  py::class_<Dendrogram>(m, "Dendrogram")
      .def_property_readonly("num_leaves", &Dendrogram::num_leaves)
      .def_property_readonly("num_points", &Dendrogram::num_points)
      .def("leaves", &Dendrogram::leaves)
      .def("leaf_of_points", [](const Dendrogram& d) { return to_int_array(d.leaf_of_points()); })
      .def("topology", &Dendrogram::canonical_topology)
      .def("to_newick", &Dendrogram::to_newick)
      .def("to_json", &Dendrogram::to_json)
      .def_static("from_json", &Dendrogram::from_json)
      .def("same_topology", [](const Dendrogram& a, const Dendrogram& b) {
        return same_topology(a, b);
      });

  py::class_<HkcResult>(m, "HkcResult")
      .def_readonly("tree", &HkcResult::tree)
      .def_property_readonly("assignments",
                             [](const HkcResult& r) { return to_int_array(r.assignments); })
      .def_readonly("k_effective", &HkcResult::k_effective)
      .def_readonly("iterations", &HkcResult::iterations)
      .def_readonly("orphans", &HkcResult::orphans)
      .def_readonly("tsc_before_refine", &HkcResult::tsc_before_refine)
      .def_readonly("tsc_after_refine", &HkcResult::tsc_after_refine)
      .def_readonly("warnings", &HkcResult::warnings)
      .def_readonly("model", &HkcResult::model)
      .def_readonly("bandwidth", &HkcResult::bandwidth);

  m.def("run_hkc",
        [](const Array& data, std::size_t k, std::size_t psi, std::size_t t, double tau,
           double rho, std::size_t subset_size, std::uint64_t seed, const std::string& kernel,
           const std::string& clusterer, bool refine, bool agglomerative, double bandwidth) {
          HkcConfig c;
          c.k = k;
          c.psi = psi;
          c.t = t;
          c.tau = tau;
          c.rho = rho;
          c.s = subset_size;
          c.seed = seed;
          c.kernel = parse_kernel(kernel);
          c.clusterer = parse_clusterer(clusterer);
          c.refine = refine;
          c.agglomerative = agglomerative;
          c.gdk_bandwidth = bandwidth;
          const auto x = to_matrix(data);
          py::gil_scoped_release release;
          return run_hkc(x, c);
        },
        py::arg("data"), py::arg("k"), py::arg("psi") = 16, py::arg("t") = 200,
        py::arg("tau") = 0.01, py::arg("rho") = 0.1, py::arg("subset_size") = 0,
        py::arg("seed") = 1, py::arg("kernel") = "idk", py::arg("clusterer") = "kpskc",
        py::arg("refine") = true, py::arg("agglomerative") = false,
        py::arg("bandwidth") = 0.0);

  m.def("bisect_kmeans",
        [](const Array& data, std::size_t k, std::size_t restarts, std::uint64_t seed) {
          BisectConfig c;
          c.k = k;
          c.restarts = restarts;
          c.seed = seed;
          return bisect_kmeans(to_matrix(data), c);
        },
        py::arg("data"), py::arg("k"), py::arg("restarts") = 10, py::arg("seed") = 1);

  m.def("dendrogram_purity", [](const Dendrogram& tree, const std::vector<int>& labels) {
    return dendrogram_purity(tree, labels);
  }, py::arg("tree"), py::arg("labels"));
  m.def("nmi", [](const std::vector<int>& a, const std::vector<int>& b) { return nmi(a, b); },
        py::arg("assignment"), py::arg("labels"));
  m.def("ari", [](const std::vector<int>& a, const std::vector<int>& b) { return ari(a, b); },
        py::arg("assignment"), py::arg("labels"));

  m.def("paper_analog", [](std::uint64_t seed, std::size_t scale) {
    const auto ds = paper_analog(seed, scale);
    return py::make_tuple(to_array(ds.points), to_int_array(*ds.labels));
  }, py::arg("seed") = 7, py::arg("scale") = 1,
  "The six-cluster 2-D benchmark as (points, labels).");

  m.def("wl_embed",
        [](const Array& attributes, const std::vector<std::tuple<Index, Index, double>>& edges,
           std::size_t h) {
          std::vector<WeightedEdge> list;
          for (const auto& [u, v, w] : edges) list.push_back({u, v, w});
          const auto emb = wl_embed(AttributedGraph(to_matrix(attributes), list), h);
          return py::make_tuple(to_array(emb.vertices),
                                py::array_t<double>(static_cast<py::ssize_t>(emb.graph.size()),
                                                    emb.graph.data()));
        },
        py::arg("attributes"), py::arg("edges"), py::arg("h"),
        "Vertex and mean graph embeddings; edges are (u, v, weight).");
}

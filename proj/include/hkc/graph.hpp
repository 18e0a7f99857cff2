#pragma once

#include <string>
#include <vector>

#include "hkc/matrix.hpp"

namespace hkc {

struct WeightedEdge {
  Index u = 0;
  Index v = 0;
  double weight = 1.0;
};

/// Undirected graph with real vertex attributes (one row per vertex).
class AttributedGraph {
 public:
  AttributedGraph(Matrix attributes, const std::vector<WeightedEdge>& edges);

  std::size_t num_vertices() const { return attributes_.rows(); }
  std::size_t attribute_dim() const { return attributes_.cols(); }
  const Matrix& attributes() const { return attributes_; }
  // (neighbor, weight) pairs.
  const std::vector<std::pair<Index, double>>& neighbors(Index v) const {
    return adjacency_[v];
  }
  std::size_t degree(Index v) const { return adjacency_[v].size(); }

 private:
  Matrix attributes_;
  std::vector<std::vector<std::pair<Index, double>>> adjacency_;
};

struct WlEmbedding {
  Matrix vertices;  // |V| x m(h+1), row v = [a^0(v), ..., a^h(v)]
  std::vector<double> graph;  // vertex mean
};

/// Weisfeiler-Lehman continuous embedding with h iterations of
/// a^{h+1}(v) = (a^h(v) + (1/deg v) sum_u w(v,u) a^h(u)) / 2.
/// An isolated vertex uses its own attribute as the neighbor term.
WlEmbedding wl_embed(const AttributedGraph& graph, std::size_t h);

/// Edge list text: one "u v [weight]" per line, '#' comments, comma or
/// whitespace separated.
std::vector<WeightedEdge> parse_edge_list(const std::string& text);
AttributedGraph load_graph(const std::string& edge_path,
                           const std::string& attribute_csv_path);

}  // namespace hkc

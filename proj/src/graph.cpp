#include "hkc/graph.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hkc/data.hpp"
#include "hkc/error.hpp"

namespace hkc {

AttributedGraph::AttributedGraph(Matrix attributes,
                                 const std::vector<WeightedEdge>& edges)
    : attributes_(std::move(attributes)), adjacency_(attributes_.rows()) {
  if (!attributes_.all_finite()) throw InvalidData("non-finite vertex attribute");
  for (const auto& e : edges) {
    if (e.u >= adjacency_.size() || e.v >= adjacency_.size()) {
      throw InvalidArgument("edge endpoint out of range");
    }
    if (!std::isfinite(e.weight)) throw InvalidData("non-finite edge weight");
    adjacency_[e.u].emplace_back(e.v, e.weight);
    if (e.u != e.v) adjacency_[e.v].emplace_back(e.u, e.weight);
  }
}

WlEmbedding wl_embed(const AttributedGraph& graph, std::size_t h) {
  const std::size_t nv = graph.num_vertices();
  const std::size_t m = graph.attribute_dim();
  if (nv == 0) throw InvalidArgument("wl_embed: empty graph");

  WlEmbedding out;
  out.vertices = Matrix(nv, m * (h + 1));
  Matrix current = graph.attributes();
  Matrix next(nv, m);
  for (std::size_t level = 0; level <= h; ++level) {
    for (std::size_t v = 0; v < nv; ++v) {
      auto dst = out.vertices.row(v).subspan(level * m, m);
      auto src = current.row(v);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    if (level == h) break;
    for (std::size_t v = 0; v < nv; ++v) {
      auto own = current.row(v);
      auto dst = next.row(v);
      const auto& nbrs = graph.neighbors(v);
      if (nbrs.empty()) {
        // Isolated vertex: the neighbor term is its own attribute.
        for (std::size_t j = 0; j < m; ++j) dst[j] = own[j];
        continue;
      }
      std::vector<double> acc(m, 0.0);
      for (const auto& [u, w] : nbrs) {
        auto au = current.row(u);
        for (std::size_t j = 0; j < m; ++j) acc[j] += w * au[j];
      }
      const double deg = static_cast<double>(nbrs.size());
      for (std::size_t j = 0; j < m; ++j) dst[j] = 0.5 * (own[j] + acc[j] / deg);
    }
    std::swap(current, next);
  }

  out.graph.assign(m * (h + 1), 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    auto r = out.vertices.row(v);
    for (std::size_t j = 0; j < r.size(); ++j) out.graph[j] += r[j];
  }
  for (double& g : out.graph) g /= static_cast<double>(nv);
  return out;
}

std::vector<WeightedEdge> parse_edge_list(const std::string& text) {
  std::vector<WeightedEdge> edges;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) {
      throw ParseError("edge line needs 'u v [weight]'", row, 1);
    }
    WeightedEdge e;
    auto parse_index = [&](const std::string& s, std::size_t col) {
      Index v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("bad vertex index '" + s + "'", row, col);
      }
      return v;
    };
    e.u = parse_index(tok[0], 1);
    e.v = parse_index(tok[1], 2);
    if (tok.size() == 3) {
      const auto [ptr, ec] =
          std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.weight);
      if (ec != std::errc() || ptr != tok[2].data() + tok[2].size()) {
        throw ParseError("bad edge weight '" + tok[2] + "'", row, 3);
      }
    }
    edges.push_back(e);
  }
  return edges;
}

AttributedGraph load_graph(const std::string& edge_path,
                           const std::string& attribute_csv_path) {
  std::ifstream in(edge_path);
  if (!in) throw InvalidArgument("cannot read " + edge_path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto attrs = load_csv(attribute_csv_path);
  return AttributedGraph(std::move(attrs.points), parse_edge_list(ss.str()));
}

}  // namespace hkc

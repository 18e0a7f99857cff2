#include "hkc/ikernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hkc/error.hpp"
#include "hkc/parallel.hpp"
#include "hkc/random.hpp"

namespace hkc {

namespace {

constexpr int kModelFormatVersion = 1;

void require_finite(const Matrix& data) {
  if (!data.all_finite()) {
    throw InvalidData("dataset contains non-finite values");
  }
}

// Nearest center of one partitioning, ties to the lower index.
std::pair<std::size_t, double> nearest_center(
    const std::vector<Hypersphere>& part, std::span<const double> x) {
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < part.size(); ++j) {
    const double sq = squared_distance(part[j].center, x);
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  return {best, std::sqrt(best_sq)};
}

void require_same_dim(const DistributionEmbedding& a,
                      const DistributionEmbedding& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("embedding dimensions differ");
  }
}

}  // namespace

PartitioningModel fit_isolation_model(const Matrix& data, std::size_t psi,
                                      std::size_t t, std::uint64_t seed) {
  if (psi < 2) throw InvalidArgument("psi must be at least 2");
  if (t < 1) throw InvalidArgument("t must be at least 1");
  if (data.rows() < psi) {
    throw InvalidArgument("psi (" + std::to_string(psi) +
                          ") exceeds the number of points (" +
                          std::to_string(data.rows()) + ")");
  }
  require_finite(data);

  PartitioningModel model;
  model.t = t;
  model.psi = psi;
  model.dim = data.cols();
  model.seed = seed;
  model.partitions.resize(t);

  parallel_for(0, t, [&](std::size_t i) {
    Rng rng(mix_seed(seed, i));
    const auto rows = sample_without_replacement(data.rows(), psi, rng);
    auto& part = model.partitions[i];
    part.resize(psi);
    for (std::size_t j = 0; j < psi; ++j) {
      auto r = data.row(rows[j]);
      part[j].center.assign(r.begin(), r.end());
      part[j].sample_row = rows[j];
    }
    for (std::size_t j = 0; j < psi; ++j) {
      double best_sq = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < psi; ++l) {
        if (l == j) continue;
        best_sq = std::min(best_sq,
                           squared_distance(part[j].center, part[l].center));
      }
      part[j].radius = std::sqrt(best_sq);
    }
  });
  return model;
}

std::size_t FeatureVector::covered() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(),
                    [](std::int32_t c) { return c != kUncovered; }));
}

double FeatureVector::value() const {
  return 1.0 / std::sqrt(static_cast<double>(t));
}

double FeatureVector::squared_norm() const {
  return static_cast<double>(covered()) / static_cast<double>(t);
}

std::vector<Index> FeatureVector::nonzeros() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] != kUncovered) out.push_back(i * psi + cells[i]);
  }
  return out;
}

FeatureVector embed_point(const PartitioningModel& model,
                          std::span<const double> x) {
  if (x.size() != model.dim) {
    throw InvalidArgument("point dimension " + std::to_string(x.size()) +
                          " does not match model dimension " +
                          std::to_string(model.dim));
  }
  FeatureVector phi;
  phi.t = model.t;
  phi.psi = model.psi;
  phi.cells.assign(model.t, FeatureVector::kUncovered);
  for (std::size_t i = 0; i < model.t; ++i) {
    const auto& part = model.partitions[i];
    const auto [j, dist] = nearest_center(part, x);
    if (dist <= part[j].radius) phi.cells[i] = static_cast<std::int32_t>(j);
  }
  return phi;
}

std::vector<FeatureVector> embed_points(const PartitioningModel& model,
                                        const Matrix& data) {
  if (data.cols() != model.dim && data.rows() > 0) {
    throw InvalidArgument("data dimension does not match model dimension");
  }
  std::vector<FeatureVector> out(data.rows());
  parallel_for(0, data.rows(),
               [&](std::size_t i) { out[i] = embed_point(model, data.row(i)); });
  return out;
}

double DistributionEmbedding::squared_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

DistributionEmbedding embed_distribution(
    std::span<const FeatureVector> features, std::span<const Index> members) {
  if (members.empty()) throw InvalidArgument("cannot embed an empty point set");
  const auto& first = features[members.front()];
  const std::size_t t = first.t;
  const std::size_t psi = first.psi;
  std::vector<std::uint32_t> counts(t * psi, 0);
  for (Index m : members) {
    const auto& phi = features[m];
    for (std::size_t i = 0; i < t; ++i) {
      if (phi.cells[i] != FeatureVector::kUncovered) ++counts[i * psi + phi.cells[i]];
    }
  }
  DistributionEmbedding emb;
  emb.support_size = members.size();
  emb.values.resize(counts.size());
  const double scale = first.value() / static_cast<double>(members.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    emb.values[c] = static_cast<double>(counts[c]) * scale;
  }
  return emb;
}

DistributionEmbedding embed_distribution(
    std::span<const FeatureVector> features) {
  std::vector<Index> all(features.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return embed_distribution(features, all);
}

DistributionEmbedding embed_distribution(const PartitioningModel& model,
                                         const Matrix& points) {
  if (points.rows() == 0) {
    throw InvalidArgument("cannot embed an empty point set");
  }
  return embed_distribution(embed_points(model, points));
}

DistributionEmbedding dirac_embedding(const FeatureVector& phi) {
  DistributionEmbedding emb;
  emb.support_size = 1;
  emb.values.assign(phi.dim(), 0.0);
  for (Index c : phi.nonzeros()) emb.values[c] = phi.value();
  return emb;
}

DistributionEmbedding merge_embeddings(const DistributionEmbedding& a,
                                       const DistributionEmbedding& b) {
  require_same_dim(a, b);
  const double na = static_cast<double>(a.support_size);
  const double nb = static_cast<double>(b.support_size);
  DistributionEmbedding out;
  out.support_size = a.support_size + b.support_size;
  out.values.resize(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out.values[i] = (na * a.values[i] + nb * b.values[i]) / (na + nb);
  }
  return out;
}

double kernel_dist_dist(const DistributionEmbedding& a,
                        const DistributionEmbedding& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double kernel_point_dist(const FeatureVector& phi,
                         const DistributionEmbedding& emb) {
  if (phi.dim() != emb.dim()) {
    throw InvalidArgument("feature and embedding dimensions differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < phi.cells.size(); ++i) {
    if (phi.cells[i] != FeatureVector::kUncovered) {
      s += emb.values[i * phi.psi + phi.cells[i]];
    }
  }
  return s * phi.value();
}

double kernel_point_dist(const PartitioningModel& model,
                         std::span<const double> x,
                         const DistributionEmbedding& emb) {
  return kernel_point_dist(embed_point(model, x), emb);
}

double embedding_distance(const DistributionEmbedding& a,
                          const DistributionEmbedding& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double isolation_kernel(const FeatureVector& a, const FeatureVector& b) {
  if (a.t != b.t || a.psi != b.psi) {
    throw InvalidArgument("feature vectors come from different models");
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (a.cells[i] != FeatureVector::kUncovered && a.cells[i] == b.cells[i]) {
      ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(a.t);
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  return std::exp(-squared_distance(x, y) / (2.0 * bandwidth * bandwidth));
}

double gdk_kernel(const Matrix& x, const Matrix& y, double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (x.rows() == 0 || y.rows() == 0) {
    throw InvalidArgument("point sets must be nonempty");
  }
  if (x.cols() != y.cols()) throw InvalidArgument("dimension mismatch");
  if (!x.all_finite() || !y.all_finite()) {
    throw InvalidData("point sets contain non-finite values");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) {
      s += gaussian_kernel(x.row(i), y.row(j), bandwidth);
    }
  }
  return s / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
}

double median_bandwidth(const Matrix& data, std::uint64_t seed,
                        std::size_t max_points) {
  if (data.rows() < 2) throw InvalidArgument("need at least two points");
  Rng rng(mix_seed(seed, 0xb4d));
  const auto rows = sample_without_replacement(
      data.rows(), std::min(max_points, data.rows()), rng);
  std::vector<double> d;
  d.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      d.push_back(distance(data.row(rows[i]), data.row(rows[j])));
    }
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

std::string model_to_json(const PartitioningModel& model) {
  nlohmann::json j;
  j["format"] = "hkc.isolation_model";
  j["version"] = kModelFormatVersion;
  j["t"] = model.t;
  j["psi"] = model.psi;
  j["dim"] = model.dim;
  j["seed"] = model.seed;
  auto& parts = j["partitions"] = nlohmann::json::array();
  for (const auto& part : model.partitions) {
    auto jp = nlohmann::json::array();
    for (const auto& h : part) {
      jp.push_back({{"center", h.center}, {"radius", h.radius},
                    {"row", h.sample_row}});
    }
    parts.push_back(std::move(jp));
  }
  return j.dump();
}

PartitioningModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidData(std::string("malformed model JSON: ") + e.what());
  }
  if (j.value("format", "") != "hkc.isolation_model") {
    throw InvalidData("not an isolation model file");
  }
  if (j.value("version", 0) != kModelFormatVersion) {
    throw InvalidData("unsupported model version");
  }
  PartitioningModel m;
  m.t = j.at("t").get<std::size_t>();
  m.psi = j.at("psi").get<std::size_t>();
  m.dim = j.at("dim").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jp : j.at("partitions")) {
    std::vector<Hypersphere> part;
    for (const auto& h : jp) {
      part.push_back({h.at("center").get<std::vector<double>>(),
                      h.at("radius").get<double>(), h.at("row").get<Index>()});
    }
    if (part.size() != m.psi) throw InvalidData("partition size != psi");
    m.partitions.push_back(std::move(part));
  }
  if (m.partitions.size() != m.t) throw InvalidData("partition count != t");
  return m;
}

void save_model(const std::string& path, const PartitioningModel& model) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << model_to_json(model) << '\n';
}

PartitioningModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace hkc

#pragma once

// Isolation Kernel built from random hypersphere partitionings, its finite
// feature map, and the Isolation Distributional Kernel (IDK) on top of it.
// A Gaussian distributional kernel (GDK) is provided for comparison.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hkc/matrix.hpp"

namespace hkc {

/// One hypersphere of a partitioning. `sample_row` is the dataset row the
/// center was drawn from.
struct Hypersphere {
  std::vector<double> center;
  double radius = 0.0;
  Index sample_row = 0;

  friend bool operator==(const Hypersphere&, const Hypersphere&) = default;
};

/// t random partitionings of psi hyperspheres each.
///
/// Every radius is the distance from the center to its nearest other center
/// in the same partitioning. A point is covered by a partitioning when it lies
/// inside the hypersphere of its nearest center (ties to the lower index).
struct PartitioningModel {
  std::size_t t = 0;
  std::size_t psi = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<Hypersphere>> partitions;

  std::size_t feature_dim() const { return t * psi; }

  friend bool operator==(const PartitioningModel&,
                         const PartitioningModel&) = default;
};

PartitioningModel fit_isolation_model(const Matrix& data, std::size_t psi,
                                      std::size_t t, std::uint64_t seed);

/// Sparse point feature map. `cells[i]` is the activated hypersphere of
/// partitioning i, or kUncovered. Each active cell contributes 1/sqrt(t) at
/// coordinate i*psi + cells[i].
struct FeatureVector {
  static constexpr std::int32_t kUncovered = -1;

  std::size_t t = 0;
  std::size_t psi = 0;
  std::vector<std::int32_t> cells;

  std::size_t dim() const { return t * psi; }
  std::size_t covered() const;
  double squared_norm() const;
  // Global coordinates of the nonzeros, ascending.
  std::vector<Index> nonzeros() const;
  double value() const;  // the common nonzero value 1/sqrt(t)
};

FeatureVector embed_point(const PartitioningModel& model,
                          std::span<const double> x);

/// Batch version over all rows; parallel over points.
std::vector<FeatureVector> embed_points(const PartitioningModel& model,
                                        const Matrix& data);

/// Kernel mean map of a finite point set.
struct DistributionEmbedding {
  std::vector<double> values;
  std::size_t support_size = 0;

  std::size_t dim() const { return values.size(); }
  double squared_norm() const;
};

DistributionEmbedding embed_distribution(const PartitioningModel& model,
                                         const Matrix& points);
DistributionEmbedding embed_distribution(
    std::span<const FeatureVector> features);
DistributionEmbedding embed_distribution(
    std::span<const FeatureVector> features, std::span<const Index> members);

// Dirac embedding of a single point as a dense vector.
DistributionEmbedding dirac_embedding(const FeatureVector& phi);

/// Weighted-mean identity for the union of two disjoint point sets.
DistributionEmbedding merge_embeddings(const DistributionEmbedding& a,
                                       const DistributionEmbedding& b);

double kernel_dist_dist(const DistributionEmbedding& a,
                        const DistributionEmbedding& b);
double kernel_point_dist(const FeatureVector& phi,
                         const DistributionEmbedding& emb);
double kernel_point_dist(const PartitioningModel& model,
                         std::span<const double> x,
                         const DistributionEmbedding& emb);
double embedding_distance(const DistributionEmbedding& a,
                          const DistributionEmbedding& b);

/// Isolation Kernel between two points: fraction of partitionings in which
/// both fall into the same hypersphere.
double isolation_kernel(const FeatureVector& a, const FeatureVector& b);

// Gaussian RBF point kernel exp(-|x-y|^2 / (2 bandwidth^2)).
double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double bandwidth);

/// Exact Gaussian distributional kernel: mean pairwise RBF value.
double gdk_kernel(const Matrix& x, const Matrix& y, double bandwidth);

/// Median pairwise distance over at most `max_points` rows drawn with `seed`.
double median_bandwidth(const Matrix& data, std::uint64_t seed,
                        std::size_t max_points = 1000);

// Versioned JSON form of the model.
std::string model_to_json(const PartitioningModel& model);
PartitioningModel model_from_json(const std::string& text);
void save_model(const std::string& path, const PartitioningModel& model);
PartitioningModel load_model(const std::string& path);

}  // namespace hkc

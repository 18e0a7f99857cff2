#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hkc/ikernel.hpp"
#include "hkc/matrix.hpp"

namespace hkc {

/// Summary of a point set under some distributional kernel. IDK fills
/// `embedding`; kernels without a finite feature map keep `members`.
struct SetSummary {
  DistributionEmbedding embedding;
  std::vector<Index> members;
  std::size_t size = 0;
};

/// Distributional kernel over the rows of one fixed dataset. All indices are
/// dataset rows. Implementations are immutable and thread-safe.
class KernelSpace {
 public:
  virtual ~KernelSpace() = default;

  virtual std::size_t num_points() const = 0;

  virtual SetSummary summarize(std::span<const Index> members) const = 0;
  virtual SetSummary merge(const SetSummary& a, const SetSummary& b) const = 0;

  // K(delta(x), delta(y))
  virtual double point_point(Index x, Index y) const = 0;
  // K(delta(x), P_S)
  virtual double point_set(Index x, const SetSummary& s) const = 0;
  // K(P_A, P_B)
  virtual double set_set(const SetSummary& a, const SetSummary& b) const = 0;

  // |Phi(P_A) - Phi(P_B)| in the kernel's feature space.
  virtual double set_distance(const SetSummary& a, const SetSummary& b) const;
};

/// Isolation distributional kernel: caches the sparse feature map of every
/// dataset row.
class IdkSpace final : public KernelSpace {
 public:
  IdkSpace(PartitioningModel model, const Matrix& data);

  std::size_t num_points() const override { return features_.size(); }
  SetSummary summarize(std::span<const Index> members) const override;
  SetSummary merge(const SetSummary& a, const SetSummary& b) const override;
  double point_point(Index x, Index y) const override;
  double point_set(Index x, const SetSummary& s) const override;
  double set_set(const SetSummary& a, const SetSummary& b) const override;
  double set_distance(const SetSummary& a, const SetSummary& b) const override;

  const PartitioningModel& model() const { return model_; }
  const std::vector<FeatureVector>& features() const { return features_; }

 private:
  PartitioningModel model_;
  std::vector<FeatureVector> features_;
};

/// Gaussian distributional kernel evaluated by exact double sums.
class GdkSpace final : public KernelSpace {
 public:
  GdkSpace(const Matrix& data, double bandwidth);

  std::size_t num_points() const override { return data_.rows(); }
  SetSummary summarize(std::span<const Index> members) const override;
  SetSummary merge(const SetSummary& a, const SetSummary& b) const override;
  double point_point(Index x, Index y) const override;
  double point_set(Index x, const SetSummary& s) const override;
  double set_set(const SetSummary& a, const SetSummary& b) const override;

  double bandwidth() const { return bandwidth_; }

 private:
  Matrix data_;
  double bandwidth_;
  double inv_two_sigma_sq_;
};

}  // namespace hkc

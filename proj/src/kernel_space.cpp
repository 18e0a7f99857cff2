#include "hkc/kernel_space.hpp"

#include <algorithm>
#include <cmath>

#include "hkc/error.hpp"

namespace hkc {

double KernelSpace::set_distance(const SetSummary& a,
                                 const SetSummary& b) const {
  const double sq = set_set(a, a) + set_set(b, b) - 2.0 * set_set(a, b);
  return std::sqrt(std::max(0.0, sq));
}

IdkSpace::IdkSpace(PartitioningModel model, const Matrix& data)
    : model_(std::move(model)), features_(embed_points(model_, data)) {}

SetSummary IdkSpace::summarize(std::span<const Index> members) const {
  SetSummary s;
  s.embedding = embed_distribution(features_, members);
  s.size = members.size();
  return s;
}

SetSummary IdkSpace::merge(const SetSummary& a, const SetSummary& b) const {
  SetSummary s;
  s.embedding = merge_embeddings(a.embedding, b.embedding);
  s.size = a.size + b.size;
  return s;
}

double IdkSpace::point_point(Index x, Index y) const {
  return isolation_kernel(features_[x], features_[y]);
}

double IdkSpace::point_set(Index x, const SetSummary& s) const {
  return kernel_point_dist(features_[x], s.embedding);
}

double IdkSpace::set_set(const SetSummary& a, const SetSummary& b) const {
  return kernel_dist_dist(a.embedding, b.embedding);
}

double IdkSpace::set_distance(const SetSummary& a, const SetSummary& b) const {
  return embedding_distance(a.embedding, b.embedding);
}

GdkSpace::GdkSpace(const Matrix& data, double bandwidth)
    : data_(data), bandwidth_(bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (!data.all_finite()) throw InvalidData("dataset contains non-finite values");
  inv_two_sigma_sq_ = 1.0 / (2.0 * bandwidth * bandwidth);
}

SetSummary GdkSpace::summarize(std::span<const Index> members) const {
  if (members.empty()) throw InvalidArgument("cannot embed an empty point set");
  SetSummary s;
  s.members.assign(members.begin(), members.end());
  s.size = members.size();
  return s;
}

SetSummary GdkSpace::merge(const SetSummary& a, const SetSummary& b) const {
  SetSummary s;
  s.members = a.members;
  s.members.insert(s.members.end(), b.members.begin(), b.members.end());
  s.size = s.members.size();
  return s;
}

double GdkSpace::point_point(Index x, Index y) const {
  return std::exp(-squared_distance(data_.row(x), data_.row(y)) *
                  inv_two_sigma_sq_);
}

double GdkSpace::point_set(Index x, const SetSummary& s) const {
  double sum = 0.0;
  for (Index y : s.members) sum += point_point(x, y);
  return sum / static_cast<double>(s.members.size());
}

double GdkSpace::set_set(const SetSummary& a, const SetSummary& b) const {
  double sum = 0.0;
  for (Index x : a.members) {
    for (Index y : b.members) sum += point_point(x, y);
  }
  return sum / (static_cast<double>(a.members.size()) *
                static_cast<double>(b.members.size()));
}

}  // namespace hkc

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkc/matrix.hpp"

namespace hkc {

struct LabeledDataset {
  Matrix points;
  std::optional<std::vector<int>> labels;
  std::string name;

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
  void validate() const;
};

enum class ComponentKind { kGaussian, kBox, kDisk, kLShape };

/// One mixture component. Field use depends on kind:
///   gaussian: center, sd (isotropic)
///   box:      lower, upper corners
///   disk:     center, radius (2-D)
///   lshape:   lower corner, arm lengths (length_x, length_y), thickness (2-D)
struct MixtureComponent {
  ComponentKind kind = ComponentKind::kGaussian;
  std::size_t n = 0;
  std::vector<double> center;
  double sd = 1.0;
  std::vector<double> lower;
  std::vector<double> upper;
  double radius = 1.0;
  double length_x = 1.0;
  double length_y = 1.0;
  double thickness = 0.1;
};

LabeledDataset generate_mixture(std::span<const MixtureComponent> components,
                                 std::uint64_t seed, std::string name = "mixture");

/// Fixed 2-D analog of a six-cluster benchmark: three Gaussians of varied
/// density, an L-shaped band and two uniform blobs. `scale` multiplies every
/// component size.
std::vector<MixtureComponent> paper_analog_components(std::size_t scale = 1);
LabeledDataset paper_analog(std::uint64_t seed = 7, std::size_t scale = 1);
inline constexpr const char* kPaperAnalogVersion = "paper-analog/1";

std::vector<MixtureComponent> mixture_from_json(const std::string& text);

/// Reads a numeric CSV with a header row. If `label_column` names a column it
/// becomes integer labels and is removed from the points.
LabeledDataset load_csv(const std::string& path,
                        const std::optional<std::string>& label_column = {});
LabeledDataset parse_csv(const std::string& text,
                         const std::optional<std::string>& label_column = {});
void save_csv(const std::string& path, const LabeledDataset& data);
std::string format_csv(const LabeledDataset& data);

void save_assignments(const std::string& path, std::span<const int> assignment);
std::vector<int> load_assignments(const std::string& path);

// Clustering agreement. NMI uses arithmetic-mean normalization.
double nmi(std::span<const int> assignment, std::span<const int> labels);
double ari(std::span<const int> assignment, std::span<const int> labels);

}  // namespace hkc

#include "hkc/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hkc/error.hpp"
#include "hkc/random.hpp"

namespace hkc {

void LabeledDataset::validate() const {
  if (!points.all_finite()) throw InvalidData("dataset contains non-finite values");
  if (labels && labels->size() != points.rows()) {
    throw InvalidData("label count does not match row count");
  }
}

// ---------------------------------------------------------------------------
// Mixtures

namespace {

std::size_t component_dim(const MixtureComponent& c) {
  switch (c.kind) {
    case ComponentKind::kGaussian: return c.center.size();
    case ComponentKind::kBox: return c.lower.size();
    case ComponentKind::kDisk:
    case ComponentKind::kLShape: return 2;
  }
  return 0;
}

void check_component(const MixtureComponent& c) {
  if (c.n < 1) throw InvalidArgument("mixture component needs at least one point");
  switch (c.kind) {
    case ComponentKind::kGaussian:
      if (c.center.empty()) throw InvalidArgument("gaussian needs a center");
      if (!(c.sd > 0.0) || !std::isfinite(c.sd)) {
        throw InvalidArgument("gaussian sd must be positive and finite");
      }
      break;
    case ComponentKind::kBox:
      if (c.lower.empty() || c.lower.size() != c.upper.size()) {
        throw InvalidArgument("box needs lower and upper corners of equal size");
      }
      for (std::size_t i = 0; i < c.lower.size(); ++i) {
        if (!(c.lower[i] < c.upper[i])) throw InvalidArgument("box corners out of order");
      }
      break;
    case ComponentKind::kDisk:
      if (c.center.size() != 2) throw InvalidArgument("disk needs a 2-D center");
      if (!(c.radius > 0.0)) throw InvalidArgument("disk radius must be positive");
      break;
    case ComponentKind::kLShape:
      if (c.lower.size() != 2) throw InvalidArgument("lshape needs a 2-D corner");
      if (!(c.thickness > 0.0 && c.length_x >= c.thickness &&
            c.length_y >= c.thickness)) {
        throw InvalidArgument("lshape arms must be at least as long as thick");
      }
      break;
  }
}

void sample_component(const MixtureComponent& c, Rng& rng, Matrix& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(component_dim(c));
  for (std::size_t i = 0; i < c.n; ++i) {
    switch (c.kind) {
      case ComponentKind::kGaussian: {
        std::normal_distribution<double> g(0.0, c.sd);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = c.center[j] + g(rng);
        break;
      }
      case ComponentKind::kBox:
        for (std::size_t j = 0; j < x.size(); ++j) {
          x[j] = c.lower[j] + (c.upper[j] - c.lower[j]) * unit(rng);
        }
        break;
      case ComponentKind::kDisk: {
        const double r = c.radius * std::sqrt(unit(rng));
        const double theta = 2.0 * M_PI * unit(rng);
        x[0] = c.center[0] + r * std::cos(theta);
        x[1] = c.center[1] + r * std::sin(theta);
        break;
      }
      case ComponentKind::kLShape:
        // Rejection from the bounding box keeps the density uniform.
        for (;;) {
          const double u = c.length_x * unit(rng);
          const double v = c.length_y * unit(rng);
          if (u <= c.thickness || v <= c.thickness) {
            x[0] = c.lower[0] + u;
            x[1] = c.lower[1] + v;
            break;
          }
        }
        break;
    }
    out.append_row(x);
  }
}

ComponentKind parse_kind(const std::string& s) {
  if (s == "gaussian") return ComponentKind::kGaussian;
  if (s == "box") return ComponentKind::kBox;
  if (s == "disk") return ComponentKind::kDisk;
  if (s == "lshape") return ComponentKind::kLShape;
  throw InvalidArgument("unknown mixture component kind '" + s + "'");
}

}  // namespace

LabeledDataset generate_mixture(std::span<const MixtureComponent> components,
                                 std::uint64_t seed, std::string name) {
  if (components.empty()) throw InvalidArgument("mixture needs components");
  for (const auto& c : components) check_component(c);
  const std::size_t d = component_dim(components.front());
  for (const auto& c : components) {
    if (component_dim(c) != d) throw InvalidArgument("components differ in dimension");
  }
  LabeledDataset out;
  out.name = std::move(name);
  out.points = Matrix(0, d);
  out.labels.emplace();
  for (std::size_t i = 0; i < components.size(); ++i) {
    Rng rng(mix_seed(seed, i));
    sample_component(components[i], rng, out.points);
    out.labels->insert(out.labels->end(), components[i].n, static_cast<int>(i));
  }
  return out;
}

std::vector<MixtureComponent> paper_analog_components(std::size_t scale) {
  if (scale < 1) throw InvalidArgument("scale must be >= 1");
  std::vector<MixtureComponent> c(6);
  // Top row: three Gaussians, variance ratio 1:4:16.
  c[0].kind = ComponentKind::kGaussian;
  c[0].n = 350;
  c[0].center = {1.2, 8.2};
  c[0].sd = 0.25;
  c[1].kind = ComponentKind::kGaussian;
  c[1].n = 600;
  c[1].center = {3.15, 8.2};
  c[1].sd = 0.5;
  c[2].kind = ComponentKind::kGaussian;
  c[2].n = 450;
  c[2].center = {7.6, 8.2};
  c[2].sd = 1.0;
  // Bottom left: L-shaped band.
  c[3].kind = ComponentKind::kLShape;
  c[3].n = 900;
  c[3].lower = {0.5, 0.5};
  c[3].length_x = 4.5;
  c[3].length_y = 4.0;
  c[3].thickness = 0.9;
  // Bottom right: two uniform blobs, the larger one close to the L.
  c[4].kind = ComponentKind::kDisk;
  c[4].n = 450;
  c[4].center = {6.5, 2.15};
  c[4].radius = 0.9;
  c[5].kind = ComponentKind::kDisk;
  c[5].n = 350;
  c[5].center = {7.75, 1.0};
  c[5].radius = 0.55;
  for (auto& comp : c) comp.n *= scale;
  return c;
}

LabeledDataset paper_analog(std::uint64_t seed, std::size_t scale) {
  const auto c = paper_analog_components(scale);
  return generate_mixture(c, seed, kPaperAnalogVersion);
}

std::vector<MixtureComponent> mixture_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed mixture spec: ") + e.what());
  }
  const auto& list = j.is_array() ? j : j.at("components");
  std::vector<MixtureComponent> out;
  try {
    for (const auto& jc : list) {
      MixtureComponent c;
      c.kind = parse_kind(jc.at("kind").get<std::string>());
      c.n = jc.at("n").get<std::size_t>();
      c.center = jc.value("center", std::vector<double>{});
      c.sd = jc.value("sd", 1.0);
      c.lower = jc.value("lower", std::vector<double>{});
      c.upper = jc.value("upper", std::vector<double>{});
      c.radius = jc.value("radius", 1.0);
      c.length_x = jc.value("length_x", 1.0);
      c.length_y = jc.value("length_y", 1.0);
      c.thickness = jc.value("thickness", 0.1);
      check_component(c);
      out.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed mixture spec: ") + e.what());
  }
  if (out.empty()) throw InvalidArgument("mixture spec has no components");
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
}

}  // namespace

LabeledDataset parse_csv(const std::string& text,
                         const std::optional<std::string>& label_column) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw ParseError("empty CSV input", 1, 1);
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::optional<std::size_t> label_idx;
  if (label_column) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == *label_column) label_idx = i;
    }
    if (!label_idx) {
      throw InvalidArgument("label column '" + *label_column + "' not found");
    }
  }

  LabeledDataset out;
  out.points = Matrix(0, header.size() - (label_idx ? 1 : 0));
  if (label_idx) out.labels.emplace();
  std::vector<double> row;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row_no, std::min(cells.size(), header.size()) + 1);
    }
    row.clear();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (label_idx && c == *label_idx) {
        int label = 0;
        const auto [ptr, ec] =
            std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
          throw ParseError("non-integer label '" + cell + "'", row_no, c + 1);
        }
        out.labels->push_back(label);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw ParseError("non-numeric cell '" + cell + "'", row_no, c + 1);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite cell", row_no, c + 1);
      row.push_back(v);
    }
    out.points.append_row(row);
  }
  if (out.points.rows() == 0) throw ParseError("CSV has no data rows", 2, 1);
  return out;
}

LabeledDataset load_csv(const std::string& path,
                        const std::optional<std::string>& label_column) {
  auto ds = parse_csv(read_file(path), label_column);
  ds.name = path;
  return ds;
}

std::string format_csv(const LabeledDataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    if (j) out += ',';
    out += "x" + std::to_string(j);
  }
  if (data.labels) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto r = data.points.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out += ',';
      out += format_double(r[j]);
    }
    if (data.labels) out += "," + std::to_string((*data.labels)[i]);
    out += '\n';
  }
  return out;
}

void save_csv(const std::string& path, const LabeledDataset& data) {
  data.validate();
  write_file(path, format_csv(data));
}

void save_assignments(const std::string& path, std::span<const int> assignment) {
  std::string out = "index,cluster\n";
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(assignment[i]) + "\n";
  }
  write_file(path, out);
}

std::vector<int> load_assignments(const std::string& path) {
  const auto ds = parse_csv(read_file(path), std::string("cluster"));
  return *ds.labels;
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

struct Contingency {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows;
  std::map<int, double> cols;
  double n = 0.0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("assignment and labels differ in length");
  }
  if (a.empty()) throw InvalidArgument("empty assignment");
  Contingency c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.cells[{a[i], b[i]}] += 1.0;
    c.rows[a[i]] += 1.0;
    c.cols[b[i]] += 1.0;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, v] : counts) h -= (v / n) * std::log(v / n);
  return h;
}

double choose2(double v) { return v * (v - 1.0) / 2.0; }

}  // namespace

double nmi(std::span<const int> assignment, std::span<const int> labels) {
  const auto c = contingency(assignment, labels);
  const double hu = entropy(c.rows, c.n);
  const double hv = entropy(c.cols, c.n);
  if (hu + hv == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, v] : c.cells) {
    mi += (v / c.n) * std::log(c.n * v / (c.rows.at(key.first) * c.cols.at(key.second)));
  }
  return std::clamp(mi / ((hu + hv) / 2.0), 0.0, 1.0);
}

double ari(std::span<const int> assignment, std::span<const int> labels) {
  const auto c = contingency(assignment, labels);
  double index = 0.0;
  for (const auto& [_, v] : c.cells) index += choose2(v);
  double a = 0.0;
  for (const auto& [_, v] : c.rows) a += choose2(v);
  double b = 0.0;
  for (const auto& [_, v] : c.cols) b += choose2(v);
  const double expected = a * b / choose2(c.n);
  const double max_index = (a + b) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace hkc

#include "sliced/harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

namespace sliced::harness {

namespace {

Dataset split(const MatrixXd& points, double test_fraction)
{
  const Eigen::Index n = points.rows();
  Eigen::Index train = static_cast<Eigen::Index>(std::llround((1.0 - test_fraction) * static_cast<double>(n)));
  train = std::clamp<Eigen::Index>(train, 1, n - 1);
  Dataset data;
  data.train = points.topRows(train);
  data.test = points.bottomRows(n - train);
  return data;
}

std::uint32_t big_endian_u32(const unsigned char* p)
{
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxError::Kind::Io, "idx: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

SyntheticKind parse_synthetic_kind(const std::string& name)
{
  if (name == "gaussian_mixture") return SyntheticKind::GaussianMixture;
  if (name == "ring") return SyntheticKind::Ring;
  if (name == "checker") return SyntheticKind::Checker;
  throw std::invalid_argument("unknown synthetic dataset kind: " + name);
}

Dataset gen_synthetic(const SyntheticSpec& spec)
{
  if (spec.points < 10) throw std::invalid_argument("gen_synthetic: need at least 10 points");
  if (spec.components < 1) throw std::invalid_argument("gen_synthetic: need at least one component");
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  constexpr double two_pi = 2 * std::numbers::pi;

  MatrixXd points(spec.points, 2);
  for (Eigen::Index i = 0; i < spec.points; ++i) {
    switch (spec.kind) {
      case SyntheticKind::GaussianMixture: {
        std::uniform_int_distribution<Eigen::Index> pick(0, spec.components - 1);
        const Eigen::Index c = pick(rng);
        double cx = 0;
        double cy = 0;
        if (spec.components > 1) {
          const double angle = two_pi * static_cast<double>(c) / static_cast<double>(spec.components);
          cx = spec.radius * std::cos(angle);
          cy = spec.radius * std::sin(angle);
        }
        points(i, 0) = cx + spec.stddev * normal(rng);
        points(i, 1) = cy + spec.stddev * normal(rng);
        break;
      }
      case SyntheticKind::Ring: {
        const double angle = two_pi * uniform(rng);
        const double r = spec.radius - spec.band + 2 * spec.band * uniform(rng);
        points(i, 0) = r * std::cos(angle);
        points(i, 1) = r * std::sin(angle);
        break;
      }
      case SyntheticKind::Checker: {
        std::uniform_int_distribution<int> cell(0, 7);
        const int k = cell(rng);  // one of the 8 even cells of the 4x4 board
        const int row = k / 2;
        const int col = 2 * (k % 2) + (row % 2);
        points(i, 0) = -2.0 + col + uniform(rng);
        points(i, 1) = -2.0 + row + uniform(rng);
        break;
      }
    }
  }
  return split(points, spec.test_fraction);
}

IdxImages read_idx_images(const std::filesystem::path& path)
{
  const auto bytes = read_bytes(path);
  if (bytes.size() < 4) throw IdxError(IdxError::Kind::Truncated, "idx: file shorter than its header");
  if (big_endian_u32(bytes.data()) != 0x00000803u)
    throw IdxError(IdxError::Kind::BadMagic, "idx: bad magic number for an image file");
  if (bytes.size() < 16) throw IdxError(IdxError::Kind::Truncated, "idx: file shorter than its header");
  const std::uint64_t count = big_endian_u32(bytes.data() + 4);
  const std::uint64_t rows = big_endian_u32(bytes.data() + 8);
  const std::uint64_t cols = big_endian_u32(bytes.data() + 12);
  if (count == 0 || rows == 0 || cols == 0)
    throw IdxError(IdxError::Kind::DimensionMismatch, "idx: zero image count or size");
  const std::uint64_t pixels = rows * cols;
  if (bytes.size() - 16 < count * pixels)
    throw IdxError(IdxError::Kind::Truncated, "idx: declared image count exceeds file contents");

  IdxImages images;
  images.shape = {static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
  images.pixels.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  const unsigned char* data = bytes.data() + 16;
  for (std::uint64_t i = 0; i < count; ++i)
    for (std::uint64_t p = 0; p < pixels; ++p)
      images.pixels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = data[i * pixels + p] / 255.0;
  return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path)
{
  const auto bytes = read_bytes(path);
  if (bytes.size() < 4) throw IdxError(IdxError::Kind::Truncated, "idx: file shorter than its header");
  if (big_endian_u32(bytes.data()) != 0x00000801u)
    throw IdxError(IdxError::Kind::BadMagic, "idx: bad magic number for a label file");
  if (bytes.size() < 8) throw IdxError(IdxError::Kind::Truncated, "idx: file shorter than its header");
  const std::uint64_t count = big_endian_u32(bytes.data() + 4);
  if (bytes.size() - 8 < count) throw IdxError(IdxError::Kind::Truncated, "idx: declared label count exceeds file contents");
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

Dataset load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels,
                 double test_fraction)
{
  auto loaded = read_idx_images(images);
  std::vector<std::uint8_t> label_values;
  if (labels) {
    label_values = read_idx_labels(*labels);
    if (static_cast<Eigen::Index>(label_values.size()) != loaded.pixels.rows())
      throw IdxError(IdxError::Kind::DimensionMismatch, "idx: label count differs from image count");
  }
  if (loaded.pixels.rows() < 2)
    throw IdxError(IdxError::Kind::DimensionMismatch, "idx: need at least two images to form train and test splits");

  Dataset data = split(loaded.pixels, test_fraction);
  data.image = loaded.shape;
  if (!label_values.empty()) {
    const auto train = static_cast<std::ptrdiff_t>(data.train.rows());
    data.train_labels.assign(label_values.begin(), label_values.begin() + train);
    data.test_labels.assign(label_values.begin() + train, label_values.end());
  }
  return data;
}

MatrixXd read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error("csv: non-numeric cell on line " + std::to_string(line_no));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("csv: ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data in " + path.string());

  MatrixXd points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return points;
}

void write_csv(const std::filesystem::path& path, const MatrixXd& points)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
  char buffer[64];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", points(i, j));
      out << (j ? "," : "") << buffer;
    }
    out << '\n';
  }
}

}  // namespace sliced::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sliced/types.hpp"

namespace sliced::harness {

struct ImageShape
{
  Eigen::Index height = 0;
  Eigen::Index width = 0;
};

/// Disjoint train and test splits, one point per row.
struct Dataset
{
  MatrixXd train;
  MatrixXd test;
  std::optional<ImageShape> image;
  std::vector<std::uint8_t> train_labels;
  std::vector<std::uint8_t> test_labels;

  Eigen::Index dimension() const { return train.cols(); }
};

enum class SyntheticKind { GaussianMixture, Ring, Checker };

SyntheticKind parse_synthetic_kind(const std::string& name);

/// Parameters of the two-dimensional toy distributions.
///
///   gaussian_mixture: `components` isotropic Gaussians with standard
///     deviation `stddev`, centred at radius `radius` on equally spaced
///     angles (a single component sits at the origin).
///   ring: angle uniform, radius uniform in [radius - band, radius + band].
///   checker: uniform on the cells (i + j even) of a 4x4 board over [-2, 2]^2.
struct SyntheticSpec
{
  SyntheticKind kind = SyntheticKind::GaussianMixture;
  Eigen::Index points = 2000;
  Eigen::Index components = 4;
  double radius = 3.0;
  double stddev = 0.5;
  double band = 0.25;
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
};

/// Deterministic given spec.seed. The first round((1 - test_fraction) n)
/// points form the train split, the rest the test split.
Dataset gen_synthetic(const SyntheticSpec& spec);

class IdxError : public std::runtime_error
{
public:
  enum class Kind { Io, BadMagic, Truncated, DimensionMismatch };
  IdxError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

struct IdxImages
{
  MatrixXd pixels;  ///< one image per row, scaled to [0, 1]
  ImageShape shape;
};

/// Reads an IDX ubyte image file (magic 0x00000803).
IdxImages read_idx_images(const std::filesystem::path& path);
/// Reads an IDX ubyte label file (magic 0x00000801).
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// Loads an image file (and optional label file) and splits off the last
/// `test_fraction` of the images as the test split.
Dataset load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels,
                 double test_fraction = 0.2);

/// Plain decimal CSV, one point per row, no header. Ragged rows, empty
/// files and non-numeric cells are rejected.
MatrixXd read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const MatrixXd& points);

}  // namespace sliced::harness

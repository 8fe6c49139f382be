#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sliced/harness/dataset.hpp"
#include "sliced/types.hpp"

namespace sliced::harness {

/// 8-bit grayscale raster, row-major.
struct GrayImage
{
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t& at(Eigen::Index row, Eigen::Index col) { return pixels[static_cast<std::size_t>(row * width + col)]; }
};

/// Binary P5 with maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
/// Parses a P5 file; throws std::runtime_error if it is not a valid 8-bit PGM.
GrayImage read_pgm(const std::filesystem::path& path);

/// Tiles flattened images (one per row, values in [0, 1], clamped) row-major
/// into a grid `columns` wide with 1-pixel separators.
GrayImage image_grid(const MatrixXd& images, const ImageShape& shape, Eigen::Index columns);

/// Scatter plot of the first two coordinates over the square [-extent, extent]^2:
/// white background, darker where more points land.
GrayImage scatter_image(const MatrixXd& points, Eigen::Index size, double extent);

}  // namespace sliced::harness

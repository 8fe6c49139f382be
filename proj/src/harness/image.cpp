#include "sliced/harness/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sliced::harness {

void write_pgm(const std::filesystem::path& path, const GrayImage& image)
{
  if (image.pixels.size() != static_cast<std::size_t>(image.width * image.height))
    throw std::invalid_argument("write_pgm: pixel buffer does not match dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("pgm: cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("pgm: write failed for " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open " + path.string());
  std::string magic;
  GrayImage image;
  int maxval = 0;
  in >> magic >> image.width >> image.height >> maxval;
  if (!in || magic != "P5") throw std::runtime_error("pgm: not a binary P5 file");
  if (maxval != 255) throw std::runtime_error("pgm: maxval is not 255");
  if (image.width < 1 || image.height < 1) throw std::runtime_error("pgm: empty raster");
  in.get();  // single whitespace before the raster
  image.pixels.resize(static_cast<std::size_t>(image.width * image.height));
  in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) throw std::runtime_error("pgm: truncated raster");
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("pgm: trailing bytes after raster");
  return image;
}

GrayImage image_grid(const MatrixXd& images, const ImageShape& shape, Eigen::Index columns)
{
  if (shape.height * shape.width != images.cols()) throw std::invalid_argument("image_grid: shape does not match image size");
  if (images.rows() < 1 || columns < 1) throw std::invalid_argument("image_grid: nothing to tile");
  columns = std::min(columns, images.rows());
  const Eigen::Index rows = (images.rows() + columns - 1) / columns;

  GrayImage grid;
  grid.width = columns * shape.width + (columns - 1);
  grid.height = rows * shape.height + (rows - 1);
  grid.pixels.assign(static_cast<std::size_t>(grid.width * grid.height), 128);
  for (Eigen::Index k = 0; k < images.rows(); ++k) {
    const Eigen::Index top = (k / columns) * (shape.height + 1);
    const Eigen::Index left = (k % columns) * (shape.width + 1);
    for (Eigen::Index r = 0; r < shape.height; ++r)
      for (Eigen::Index c = 0; c < shape.width; ++c) {
        const double v = std::clamp(images(k, r * shape.width + c), 0.0, 1.0);
        grid.at(top + r, left + c) = static_cast<std::uint8_t>(std::lround(255.0 * v));
      }
  }
  return grid;
}

GrayImage scatter_image(const MatrixXd& points, Eigen::Index size, double extent)
{
  if (size < 2 || !(extent > 0)) throw std::invalid_argument("scatter_image: bad raster size or extent");
  GrayImage image;
  image.width = size;
  image.height = size;
  std::vector<int> counts(static_cast<std::size_t>(size * size), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0);
    const double y = points.cols() > 1 ? points(i, 1) : 0.0;
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    const auto col = static_cast<Eigen::Index>(std::floor((x + extent) / (2 * extent) * static_cast<double>(size)));
    const auto row = static_cast<Eigen::Index>(std::floor((extent - y) / (2 * extent) * static_cast<double>(size)));
    if (col < 0 || col >= size || row < 0 || row >= size) continue;
    ++counts[static_cast<std::size_t>(row * size + col)];
  }
  image.pixels.resize(counts.size());
  for (std::size_t p = 0; p < counts.size(); ++p)
    image.pixels[p] = static_cast<std::uint8_t>(std::max(0, 255 - 64 * counts[p]));
  return image;
}

}  // namespace sliced::harness

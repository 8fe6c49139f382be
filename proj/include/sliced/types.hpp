#pragma once

#include <cctype>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sliced {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

// All randomness in the library flows through this engine so that a run is a
// pure function of its seed.
using Rng = std::mt19937_64;

// Derives an independent engine from a base value and a stream index.
inline Rng substream(std::uint64_t base, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// The one-dimensional dissimilarity used per projection.
enum class DistanceKind {
  SW,    ///< squared W2 between the projection and a normal sample
  SCFW,  ///< closed-form squared W2 to N(0,1)
  SCW,   ///< Cramer-Wold (smoothed L2) distance to N(0,1)
  SCvM,  ///< Cramer-von Mises statistic
  SKS,   ///< Kolmogorov-Smirnov statistic
};

inline constexpr DistanceKind kAllDistanceKinds[] = {DistanceKind::SW, DistanceKind::SCFW,
                                                     DistanceKind::SCW, DistanceKind::SCvM,
                                                     DistanceKind::SKS};

inline std::string_view to_string(DistanceKind kind)
{
  switch (kind) {
    case DistanceKind::SW: return "SW";
    case DistanceKind::SCFW: return "SCFW";
    case DistanceKind::SCW: return "SCW";
    case DistanceKind::SCvM: return "SCvM";
    case DistanceKind::SKS: return "SKS";
  }
  return "?";
}

inline DistanceKind parse_distance_kind(std::string_view name)
{
  for (auto kind : kAllDistanceKinds) {
    auto canonical = to_string(kind);
    if (canonical.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(canonical[i])) !=
          std::tolower(static_cast<unsigned char>(name[i]))) {
        same = false;
        break;
      }
    }
    if (same) return kind;
  }
  throw std::invalid_argument("unknown distance kind: " + std::string(name));
}

}  // namespace sliced

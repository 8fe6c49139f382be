#pragma once

// Random slicing directions, the sliced average of a one-dimensional kernel
// over a latent batch, and the composite autoencoder cost.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "sliced/slice_kernels.hpp"
#include "sliced/types.hpp"

namespace sliced {

/// n x D matrix, one encoded point per row.
template <typename Scalar>
using LatentBatch = Matrix<Scalar>;

/// k unit vectors in R^D, stored as the columns of a D x k matrix.
template <typename Scalar>
class DirectionSet
{
public:
  explicit DirectionSet(Matrix<Scalar> vectors) : vectors_(std::move(vectors))
  {
    if (vectors_.rows() < 1 || vectors_.cols() < 1) throw std::invalid_argument("DirectionSet: empty");
    for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
      if (std::abs(vectors_.col(j).norm() - Scalar(1)) > Scalar(1e-9))
        throw std::invalid_argument("DirectionSet: direction is not unit length");
    }
  }

  Eigen::Index dimension() const { return vectors_.rows(); }
  Eigen::Index count() const { return vectors_.cols(); }
  const Matrix<Scalar>& vectors() const { return vectors_; }
  auto direction(Eigen::Index j) const { return vectors_.col(j); }

private:
  Matrix<Scalar> vectors_;
};

/// Directions uniform on the sphere: normalized standard normal draws.
template <typename Scalar>
DirectionSet<Scalar> sample_directions(Eigen::Index k, Eigen::Index dim, Rng& rng)
{
  if (k < 1 || dim < 1) throw std::invalid_argument("sample_directions: k and D must be positive");
  std::normal_distribution<Scalar> normal;
  Matrix<Scalar> v(dim, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Scalar norm = 0;
    do {
      for (Eigen::Index d = 0; d < dim; ++d) v(d, j) = normal(rng);
      norm = v.col(j).norm();
    } while (!(norm > Scalar(0)));
    v.col(j) /= norm;
  }
  return DirectionSet<Scalar>(std::move(v));
}

struct SlicedOptions
{
  DistanceKind kind = DistanceKind::SCFW;
  KsVariant ks_variant = KsVariant::OneSided;
  /// SW only: reuse one normal comparison sample for every projection.
  bool share_sw_sample = false;
  bool want_gradient = true;
};

template <typename Scalar>
struct SlicedResult
{
  Scalar distance{0};
  /// d distance / d batch, same shape as the batch. Empty unless requested.
  Matrix<Scalar> gradient;
};

/// Sorted sample of n standard normal draws.
template <typename Scalar>
SortedSample1D<Scalar> sorted_normal_sample(Eigen::Index n, Rng& rng)
{
  std::normal_distribution<Scalar> normal;
  Vector<Scalar> z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  std::sort(z.data(), z.data() + n);
  return SortedSample1D<Scalar>(std::move(z));
}

/// Kernel on one sorted projection. `reference` is only read for SW.
template <typename Scalar>
KernelResult<Scalar> apply_kernel(const SortedSample1D<Scalar>& y, const SlicedOptions& options,
                                  const SortedSample1D<Scalar>* reference = nullptr)
{
  switch (options.kind) {
    case DistanceKind::SW:
      if (reference == nullptr) throw std::invalid_argument("apply_kernel: SW needs a comparison sample");
      return sw_pairwise(y, *reference);
    case DistanceKind::SCFW: return w2_closed(y);
    case DistanceKind::SCW: return cw_closed(y);
    case DistanceKind::SCvM: return cvm_closed(y);
    case DistanceKind::SKS: return ks_closed(y, options.ks_variant);
  }
  throw std::invalid_argument("apply_kernel: unknown kind");
}

/// Mean of the kernel over the projections of `batch` onto every direction.
///
/// For SW the comparison samples come from `rng`: one value is drawn to seed
/// index-derived substreams, so projection j always sees the same draw for a
/// given rng state regardless of evaluation order.
template <typename Scalar>
SlicedResult<Scalar> sliced_distance(const LatentBatch<Scalar>& batch, const DirectionSet<Scalar>& dirs,
                                     const SlicedOptions& options, Rng& rng)
{
  if (batch.rows() < 1) throw std::invalid_argument("sliced_distance: empty batch");
  if (batch.cols() != dirs.dimension())
    throw std::invalid_argument("sliced_distance: batch and direction dimensions differ");
  if (!batch.allFinite()) throw std::invalid_argument("sliced_distance: non-finite batch entry");

  const Eigen::Index n = batch.rows();
  const Eigen::Index k = dirs.count();
  const Matrix<Scalar> projections = batch * dirs.vectors();

  const std::uint64_t stream_base = options.kind == DistanceKind::SW ? rng() : 0;

  SlicedResult<Scalar> result;
  if (options.want_gradient) result.gradient = Matrix<Scalar>::Zero(n, batch.cols());
  Vector<Scalar> unsorted_gradient(n);

  for (Eigen::Index j = 0; j < k; ++j) {
    auto sorted = sort_with_permutation(projections.col(j));
    KernelResult<Scalar> kernel;
    if (options.kind == DistanceKind::SW) {
      Rng stream = substream(stream_base, options.share_sw_sample ? 0 : static_cast<std::uint64_t>(j));
      const auto reference = sorted_normal_sample<Scalar>(n, stream);
      kernel = apply_kernel(sorted.sample, options, &reference);
    } else {
      kernel = apply_kernel(sorted.sample, options);
    }
    result.distance += kernel.distance;
    if (options.want_gradient) {
      for (Eigen::Index s = 0; s < n; ++s) unsorted_gradient[sorted.permutation[static_cast<std::size_t>(s)]] = kernel.gradient[s];
      result.gradient.noalias() += unsorted_gradient * dirs.direction(j).transpose();
    }
  }
  result.distance /= Scalar(k);
  if (options.want_gradient) result.gradient /= Scalar(k);
  return result;
}

/// Sliced SW between two samples of equal size: mean over directions of the
/// squared W2 distance between their sorted projections.
template <typename Scalar>
Scalar sliced_pairwise_distance(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const DirectionSet<Scalar>& dirs)
{
  if (a.rows() != b.rows()) throw std::invalid_argument("sliced_pairwise_distance: sample sizes differ");
  if (a.cols() != dirs.dimension() || b.cols() != dirs.dimension())
    throw std::invalid_argument("sliced_pairwise_distance: dimension mismatch");
  const Matrix<Scalar> pa = a * dirs.vectors();
  const Matrix<Scalar> pb = b * dirs.vectors();
  Scalar total = 0;
  for (Eigen::Index j = 0; j < dirs.count(); ++j)
    total += sw_pairwise(sort_with_permutation(pa.col(j)).sample, sort_with_permutation(pb.col(j)).sample).distance;
  return total / Scalar(dirs.count());
}

/// MSE + lambda * penalty.
struct LambdaWeighted
{
  double lambda = 1.0;
};

/// MSE + log(max(penalty, floor)).
struct LogComposite
{
  double floor = 1e-12;
};

using CostMode = std::variant<LambdaWeighted, LogComposite>;

template <typename Scalar>
struct CompositeCost
{
  Scalar value{0};
  /// d value / d sliced penalty.
  Scalar penalty_slope{0};
};

template <typename Scalar>
CompositeCost<Scalar> composite_cost(Scalar mse, Scalar sliced, const CostMode& mode)
{
  if (!(mse >= Scalar(0)) || !(sliced >= Scalar(0)))
    throw std::invalid_argument("composite_cost: negative or non-finite input");
  if (const auto* weighted = std::get_if<LambdaWeighted>(&mode)) {
    if (!(weighted->lambda >= 0)) throw std::invalid_argument("composite_cost: lambda must be nonnegative");
    const Scalar lambda = Scalar(weighted->lambda);
    return {mse + lambda * sliced, lambda};
  }
  const auto& log_mode = std::get<LogComposite>(mode);
  if (!(log_mode.floor > 0)) throw std::invalid_argument("composite_cost: floor must be positive");
  const Scalar clamped = std::max(sliced, Scalar(log_mode.floor));
  return {mse + std::log(clamped), Scalar(1) / clamped};
}

}  // namespace sliced

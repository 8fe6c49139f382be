#pragma once

// Normality diagnostics tracked during training.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "sliced/slicer.hpp"
#include "sliced/types.hpp"

namespace sliced {

namespace detail {

// sum_{j,k} (x_j . x_k)^3 equals the squared Frobenius norm of the third
// moment tensor sum_j x_j (x) x_j (x) x_j, which costs O(n D^3).
template <typename Scalar>
Scalar cubed_gram_sum_tensor(const Matrix<Scalar>& x)
{
  const Eigen::Index dim = x.cols();
  Matrix<Scalar> tensor = Matrix<Scalar>::Zero(dim * dim, dim);
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const RowVector<Scalar> row = x.row(j);
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b)
        tensor.row(a * dim + b).noalias() += (row[a] * row[b]) * row;
  }
  return tensor.squaredNorm();
}

// Blocked Gram route for wide batches.
template <typename Scalar>
Scalar cubed_gram_sum_blocked(const Matrix<Scalar>& x)
{
  constexpr Eigen::Index block = 256;
  Scalar total = 0;
  for (Eigen::Index start = 0; start < x.rows(); start += block) {
    const Eigen::Index rows = std::min(block, x.rows() - start);
    const Matrix<Scalar> gram = x.middleRows(start, rows) * x.transpose();
    total += gram.array().cube().sum();
  }
  return total;
}

}  // namespace detail

/// Mardia's skewness (1/n^2) sum_{j,k} (x_j . x_k)^3 of the uncentred batch.
template <typename Scalar>
Scalar mardia_skewness(const Matrix<Scalar>& x)
{
  if (x.rows() < 1) throw std::invalid_argument("mardia_skewness: empty batch");
  const Scalar n = Scalar(x.rows());
  const Scalar sum = x.cols() <= 32 ? detail::cubed_gram_sum_tensor(x) : detail::cubed_gram_sum_blocked(x);
  return std::max(sum / (n * n), Scalar(0));
}

/// Mardia's kurtosis (1/n) sum_j |x_j|^4; with `normalize` the N(0, I_D)
/// expectation D(D+2) is subtracted.
template <typename Scalar>
Scalar mardia_kurtosis(const Matrix<Scalar>& x, bool normalize)
{
  if (x.rows() < 1) throw std::invalid_argument("mardia_kurtosis: empty batch");
  const Scalar raw = x.rowwise().squaredNorm().array().square().mean();
  if (!normalize) return raw;
  const Scalar dim = Scalar(x.cols());
  return raw - dim * (dim + 2);
}

namespace detail {

template <typename Scalar>
Matrix<Scalar> covariance(const Matrix<Scalar>& x, const RowVector<Scalar>& mean)
{
  const Matrix<Scalar> centred = x.rowwise() - mean;
  return (centred.transpose() * centred) / Scalar(x.rows() - 1);
}

template <typename Scalar>
Matrix<Scalar> psd_sqrt(const Matrix<Scalar>& m)
{
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(m);
  const Vector<Scalar> roots = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace detail

/// Frechet distance between Gaussians fitted to two point clouds:
/// |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2}).
template <typename Scalar>
Scalar gaussian_frechet_proxy(const Matrix<Scalar>& a, const Matrix<Scalar>& b)
{
  if (a.cols() != b.cols()) throw std::invalid_argument("gaussian_frechet_proxy: dimension mismatch");
  if (a.rows() < 2 || b.rows() < 2) throw std::invalid_argument("gaussian_frechet_proxy: need at least two points");

  const RowVector<Scalar> mean_a = a.colwise().mean();
  const RowVector<Scalar> mean_b = b.colwise().mean();
  const Matrix<Scalar> cov_a = detail::covariance(a, mean_a);
  const Matrix<Scalar> cov_b = detail::covariance(b, mean_b);

  const Matrix<Scalar> root_a = detail::psd_sqrt(cov_a);
  Matrix<Scalar> middle = root_a * cov_b * root_a;
  middle = (middle + middle.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(middle, Eigen::EigenvaluesOnly);
  const Scalar trace_root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt().sum();

  const Scalar value = (mean_a - mean_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2 * trace_root;
  return std::max(value, Scalar(0));
}

/// Sliced SW distance to fresh normal draws, for evaluation only.
template <typename Scalar>
Scalar sw_monitor(const LatentBatch<Scalar>& batch, Eigen::Index k, Rng& rng)
{
  if (k < 1) throw std::invalid_argument("sw_monitor: k must be positive");
  const auto dirs = sample_directions<Scalar>(k, batch.cols(), rng);
  SlicedOptions options;
  options.kind = DistanceKind::SW;
  options.want_gradient = false;
  return sliced_distance(batch, dirs, options, rng).distance;
}

}  // namespace sliced

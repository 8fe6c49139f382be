#pragma once

// One-dimensional dissimilarities between a sorted sample and N(0, 1), each
// returned together with its gradient with respect to the sorted values.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sliced/normal_math.hpp"
#include "sliced/types.hpp"

namespace sliced {

/// Ascending, finite, non-empty sample.
template <typename Scalar>
class SortedSample1D
{
public:
  explicit SortedSample1D(Vector<Scalar> values) : values_(std::move(values))
  {
    if (values_.size() < 1) throw std::invalid_argument("SortedSample1D: empty sample");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) throw std::invalid_argument("SortedSample1D: non-finite value");
      if (i > 0 && values_[i - 1] > values_[i])
        throw std::invalid_argument("SortedSample1D: values not ascending");
    }
  }

  Eigen::Index size() const { return values_.size(); }
  const Vector<Scalar>& values() const { return values_; }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

private:
  Vector<Scalar> values_;
};

template <typename Scalar>
struct SortedWithPermutation
{
  SortedSample1D<Scalar> sample;
  /// permutation[s] is the original index of the s-th smallest value.
  std::vector<Eigen::Index> permutation;
};

/// Stable ascending sort; ties keep their original order.
template <typename Derived>
SortedWithPermutation<typename Derived::Scalar> sort_with_permutation(const Eigen::MatrixBase<Derived>& raw)
{
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = raw.size();
  if (n < 1) throw std::invalid_argument("sort_with_permutation: empty input");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return raw(a) < raw(b); });
  Vector<Scalar> sorted(n);
  for (Eigen::Index s = 0; s < n; ++s) sorted[s] = raw(perm[static_cast<std::size_t>(s)]);
  return {SortedSample1D<Scalar>(std::move(sorted)), std::move(perm)};
}

template <typename Scalar>
struct KernelResult
{
  Scalar distance{0};
  /// d distance / d values[i], in sorted order.
  Vector<Scalar> gradient;
};

/// Silverman's rule-of-thumb variance for the Cramer-Wold smoothing kernel.
template <typename Scalar>
class Bandwidth
{
public:
  explicit Bandwidth(Scalar gamma) : gamma_(gamma)
  {
    if (!(gamma > Scalar(0))) throw std::domain_error("Bandwidth: gamma must be positive");
  }
  static Bandwidth silverman(Eigen::Index n)
  {
    return Bandwidth(std::pow(Scalar(4) / (Scalar(3) * Scalar(n)), Scalar(0.4)));
  }
  Scalar gamma() const { return gamma_; }

private:
  Scalar gamma_;
};

enum class KsVariant {
  OneSided,   ///< max_i |i/n - Phi(y_i)|
  TwoSided,   ///< max_i max(i/n - Phi(y_i), Phi(y_i) - (i-1)/n)
};

/// Mean squared gap between matched order statistics. z is held constant.
template <typename Scalar>
KernelResult<Scalar> sw_pairwise(const SortedSample1D<Scalar>& y, const SortedSample1D<Scalar>& z)
{
  if (y.size() != z.size()) throw std::invalid_argument("sw_pairwise: sample sizes differ");
  const Scalar n = Scalar(y.size());
  const Vector<Scalar> diff = y.values() - z.values();
  return {diff.squaredNorm() / n, (Scalar(2) / n) * diff};
}

namespace detail {

// exp(-Q_{i/n}^2 / 2) for i = 0..n, with the infinite endpoints mapped to 0.
template <typename Scalar>
Vector<Scalar> quantile_gauss_weights(Eigen::Index n)
{
  Vector<Scalar> e(n + 1);
  e[0] = 0;
  e[n] = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const Scalar q = std_normal_quantile(Probability<Scalar>(Scalar(i) / Scalar(n)));
    e[i] = std::exp(-q * q / 2);
  }
  return e;
}

}  // namespace detail

/// Closed-form squared W2 between the empirical distribution of y and N(0,1).
template <typename Scalar>
KernelResult<Scalar> w2_closed(const SortedSample1D<Scalar>& y)
{
  const Eigen::Index n = y.size();
  const Vector<Scalar> e = detail::quantile_gauss_weights<Scalar>(n);
  const Scalar sqrt_2_over_pi = std::numbers::sqrt2_v<Scalar> * std::numbers::inv_sqrtpi_v<Scalar>;
  const Vector<Scalar> slope = sqrt_2_over_pi * (e.tail(n) - e.head(n));

  const Scalar inv_n = Scalar(1) / Scalar(n);
  const Scalar distance = 1 + inv_n * y.values().squaredNorm() + slope.dot(y.values());
  return {std::max(distance, Scalar(0)), Scalar(2) * inv_n * y.values() + slope};
}

/// Squared L2 distance between the Gaussian-smoothed sample density and the
/// equally smoothed N(0,1), with Silverman's bandwidth.
template <typename Scalar>
KernelResult<Scalar> cw_closed(const SortedSample1D<Scalar>& y)
{
  const Eigen::Index n = y.size();
  const Scalar gamma = Bandwidth<Scalar>::silverman(n).gamma();
  const Scalar inv_n = Scalar(1) / Scalar(n);
  const auto& v = y.values();

  Scalar pair_sum = 0;
  Scalar cross_sum = 0;
  Vector<Scalar> gradient = Vector<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Diagonal terms are constant; each unordered pair counts twice.
    pair_sum += gaussian_pdf_at_zero(GaussianParams<Scalar>{0, 2 * gamma});
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar diff = v[i] - v[j];
      const Scalar p = gaussian_pdf_at_zero(GaussianParams<Scalar>{diff, 2 * gamma});
      pair_sum += 2 * p;
      const Scalar dp = -diff / (2 * gamma) * p;
      gradient[i] += 2 * inv_n * inv_n * dp;
      gradient[j] -= 2 * inv_n * inv_n * dp;
    }
    const Scalar c = gaussian_pdf_at_zero(GaussianParams<Scalar>{v[i], 1 + 2 * gamma});
    cross_sum += c;
    gradient[i] += 2 * inv_n * v[i] / (1 + 2 * gamma) * c;
  }

  const Scalar distance = inv_n * inv_n * pair_sum +
                          gaussian_pdf_at_zero(GaussianParams<Scalar>{0, 2 + 2 * gamma}) -
                          2 * inv_n * cross_sum;
  return {std::max(distance, Scalar(0)), std::move(gradient)};
}

/// Cramer-von Mises statistic (divided by n) of the probability-integral
/// transformed sample against U(0,1).
template <typename Scalar>
KernelResult<Scalar> cvm_closed(const SortedSample1D<Scalar>& y)
{
  const Eigen::Index n = y.size();
  const Scalar inv_n = Scalar(1) / Scalar(n);
  Scalar squares = 0;
  Scalar weighted = 0;
  Vector<Scalar> gradient(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar z = std_normal_cdf(y[i]);
    const Scalar rank_weight = Scalar(2 * i + 1);  // 2i - 1 with one-based i
    squares += z * z;
    weighted += z * rank_weight;
    gradient[i] = (2 * inv_n * z - inv_n * inv_n * rank_weight) * std_normal_pdf(y[i]);
  }
  const Scalar distance = inv_n * squares - inv_n * inv_n * weighted + Scalar(1) / Scalar(3);
  const Scalar floor = inv_n * inv_n / Scalar(12);
  return {std::max(distance, floor), std::move(gradient)};
}

/// Kolmogorov-Smirnov statistic against Phi. The gradient is a subgradient
/// placed on the first index attaining the maximum.
template <typename Scalar>
KernelResult<Scalar> ks_closed(const SortedSample1D<Scalar>& y, KsVariant variant = KsVariant::OneSided)
{
  const Eigen::Index n = y.size();
  Scalar best = -1;
  Eigen::Index best_index = 0;
  Scalar best_sign = 0;  // d distance / d Phi(y_best)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar f = std_normal_cdf(y[i]);
    const Scalar upper = Scalar(i + 1) / Scalar(n);
    Scalar value;
    Scalar sign;
    if (variant == KsVariant::OneSided) {
      value = std::abs(upper - f);
      sign = upper - f >= 0 ? Scalar(-1) : Scalar(1);
    } else {
      const Scalar above = upper - f;
      const Scalar below = f - Scalar(i) / Scalar(n);
      value = above >= below ? above : below;
      sign = above >= below ? Scalar(-1) : Scalar(1);
    }
    if (value > best) {
      best = value;
      best_index = i;
      best_sign = sign;
    }
  }
  Vector<Scalar> gradient = Vector<Scalar>::Zero(n);
  gradient[best_index] = best_sign * std_normal_pdf(y[best_index]);
  return {std::max(best, Scalar(0)), std::move(gradient)};
}

}  // namespace sliced

#pragma once

// Standard normal special functions and the variance-parameterized Gaussian
// density used by the Cramer-Wold kernel.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sliced {

/// A probability level in [0, 1].
template <typename Scalar>
class Probability
{
public:
  explicit Probability(Scalar value) : value_(value)
  {
    if (!(value >= Scalar(0) && value <= Scalar(1)))
      throw std::domain_error("probability outside [0, 1]");
  }
  Scalar value() const { return value_; }
  operator Scalar() const { return value_; }

private:
  Scalar value_;
};

/// N(mean, variance). The second parameter is a variance, never a standard
/// deviation: the smoothing constants of the Cramer-Wold kernel add as
/// variances under convolution.
template <typename Scalar>
struct GaussianParams
{
  Scalar mean{0};
  Scalar variance{1};
};

namespace detail {

template <typename Scalar>
void require_finite(Scalar x, const char* what)
{
  if (!std::isfinite(x)) throw std::domain_error(what);
}

}  // namespace detail

template <typename Scalar>
Scalar std_normal_pdf(Scalar x)
{
  detail::require_finite(x, "std_normal_pdf: non-finite argument");
  constexpr Scalar inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<Scalar> / std::numbers::sqrt2_v<Scalar>;
  return inv_sqrt_2pi * std::exp(-x * x / Scalar(2));
}

/// Phi(x), evaluated through erfc so that both tails keep full relative
/// accuracy.
template <typename Scalar>
Scalar std_normal_cdf(Scalar x)
{
  detail::require_finite(x, "std_normal_cdf: non-finite argument");
  return std::erfc(-x / std::numbers::sqrt2_v<Scalar>) / Scalar(2);
}

/// Inverse of Phi. Returns -inf at 0 and +inf at 1.
///
/// A rational approximation (relative error about 1e-9) gives the starting
/// point, then Halley steps on the erfc-based cdf bring it to machine
/// precision.
template <typename Scalar>
Scalar std_normal_quantile(Probability<Scalar> probability)
{
  const Scalar r = probability.value();
  if (r == Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
  if (r == Scalar(1)) return std::numeric_limits<Scalar>::infinity();

  static constexpr Scalar a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr Scalar b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr Scalar c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr Scalar d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr Scalar low = 0.02425;

  Scalar x;
  if (r < low) {
    const Scalar q = std::sqrt(-2 * std::log(r));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (r <= 1 - low) {
    const Scalar q = r - Scalar(0.5);
    const Scalar s = q * q;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * q /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1);
  } else {
    const Scalar q = std::sqrt(-2 * std::log1p(-r));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  const Scalar sqrt_2pi = std::numbers::sqrt2_v<Scalar> / std::numbers::inv_sqrtpi_v<Scalar>;
  for (int step = 0; step < 2; ++step) {
    // Work on the tail nearer to x so the residual is not swamped by 1 - r.
    Scalar e;
    if (x <= 0) {
      e = std_normal_cdf(x) - r;
    } else {
      e = (1 - r) - std_normal_cdf(-x);
    }
    const Scalar u = e * sqrt_2pi * std::exp(x * x / 2);
    if (!std::isfinite(u)) break;
    x = x - u / (1 + x * u / 2);
  }
  return x;
}

/// Density of N(mean, variance) evaluated at 0.
template <typename Scalar>
Scalar gaussian_pdf_at_zero(const GaussianParams<Scalar>& p)
{
  if (!(p.variance > Scalar(0))) throw std::domain_error("gaussian_pdf_at_zero: variance must be positive");
  detail::require_finite(p.mean, "gaussian_pdf_at_zero: non-finite mean");
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  return std::exp(-p.mean * p.mean / (2 * p.variance)) / std::sqrt(two_pi * p.variance);
}

}  // namespace sliced

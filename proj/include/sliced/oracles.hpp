#pragma once

// Slow reference evaluations of the one-dimensional distances by direct
// numerical integration. Test support only: nothing in the library or the
// CLI links against these.

#include <cstddef>

#include "sliced/slice_kernels.hpp"

namespace sliced::oracles {

enum class QuadratureVariable {
  /// Integrate over the normal score u = Q(t); removes the quantile
  /// singularities at t = 0 and t = 1.
  NormalScore,
  /// Integrate directly over t in (0, 1).
  Uniform,
};

struct QuadratureSpec
{
  std::size_t panels = 1'000'000;
  QuadratureVariable variable = QuadratureVariable::NormalScore;
};

/// int_0^1 (F_y^{-1}(t) - Q(t))^2 dt by the midpoint rule.
double w2_numeric(const SortedSample1D<double>& y, const QuadratureSpec& q = {});

/// int (mean_i N(y_i, g)(x) - N(0, 1+g)(x))^2 dx over [-(max|y|+10), max|y|+10].
double cw_numeric(const SortedSample1D<double>& y, const QuadratureSpec& q = {});

/// int_0^1 (G^{-1}(t) - t)^2 dt, G the empirical cdf of Phi(y); panels are
/// split evenly across the n steps of G^{-1}.
double cvm_numeric(const SortedSample1D<double>& y, const QuadratureSpec& q = {});

/// sup_x |F_n(x) - Phi(x)|, exact from the 2n one-sided limits at the sample.
double ks_numeric(const SortedSample1D<double>& y);

/// Value of x with Phi(x) = r, found by bisection on the cdf.
double quantile_by_bisection(double r);

}  // namespace sliced::oracles

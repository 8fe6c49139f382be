#include "sliced/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sliced/normal_math.hpp"

namespace sliced::oracles {

namespace {

constexpr double kPi = std::numbers::pi;

double normal_density(double x, double mean, double variance)
{
  const double d = x - mean;
  return std::exp(-d * d / (2 * variance)) / std::sqrt(2 * kPi * variance);
}

template <typename F>
double midpoint(F&& f, double lo, double hi, std::size_t panels)
{
  const double h = (hi - lo) / static_cast<double>(panels);
  double sum = 0;
  for (std::size_t p = 0; p < panels; ++p) sum += f(lo + (static_cast<double>(p) + 0.5) * h);
  return sum * h;
}

void require_panels(const QuadratureSpec& q)
{
  if (q.panels < 1000) throw std::invalid_argument("quadrature needs at least 1000 panels");
}

}  // namespace

double quantile_by_bisection(double r)
{
  double lo = -40;
  double hi = 40;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (std_normal_cdf(mid) < r ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double w2_numeric(const SortedSample1D<double>& y, const QuadratureSpec& q)
{
  require_panels(q);
  const auto n = static_cast<std::size_t>(y.size());
  if (q.variable == QuadratureVariable::Uniform) {
    const auto f = [&](double t) {
      const auto idx = std::min(n - 1, static_cast<std::size_t>(t * static_cast<double>(n)));
      const double gap = y[static_cast<Eigen::Index>(idx)] - std_normal_quantile(Probability<double>(t));
      return gap * gap;
    };
    return midpoint(f, 0.0, 1.0, q.panels);
  }

  // t = Phi(u): dt = phi(u) du, and the empirical quantile is y_(i) on
  // [Q((i-1)/n), Q(i/n)]. Beyond |u| = 14 the integrand is below 1e-40.
  constexpr double limit = 14;
  std::vector<double> breaks(n + 1);
  breaks[0] = -limit;
  breaks[n] = limit;
  for (std::size_t i = 1; i < n; ++i)
    breaks[i] = std::clamp(quantile_by_bisection(static_cast<double>(i) / static_cast<double>(n)), -limit, limit);

  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = breaks[i];
    const double hi = breaks[i + 1];
    if (!(hi > lo)) continue;
    const auto panels = std::max<std::size_t>(
        16, static_cast<std::size_t>(static_cast<double>(q.panels) * (hi - lo) / (2 * limit)));
    const double value = y[static_cast<Eigen::Index>(i)];
    total += midpoint([&](double u) { return (value - u) * (value - u) * normal_density(u, 0, 1); }, lo, hi, panels);
  }
  return total;
}

double cw_numeric(const SortedSample1D<double>& y, const QuadratureSpec& q)
{
  require_panels(q);
  const auto n = y.size();
  const double gamma = std::pow(4.0 / (3.0 * static_cast<double>(n)), 0.4);
  const double range = y.values().cwiseAbs().maxCoeff() + 10;
  const auto f = [&](double x) {
    double mixture = 0;
    for (Eigen::Index i = 0; i < n; ++i) mixture += normal_density(x, y[i], gamma);
    mixture /= static_cast<double>(n);
    const double diff = mixture - normal_density(x, 0, 1 + gamma);
    return diff * diff;
  };
  return midpoint(f, -range, range, q.panels);
}

double cvm_numeric(const SortedSample1D<double>& y, const QuadratureSpec& q)
{
  require_panels(q);
  const auto n = static_cast<std::size_t>(y.size());
  const std::size_t per_step = std::max<std::size_t>(1, q.panels / n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std_normal_cdf(y[static_cast<Eigen::Index>(i)]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    total += midpoint([&](double t) { return (z - t) * (z - t); }, lo, hi, per_step);
  }
  return total;
}

double ks_numeric(const SortedSample1D<double>& y)
{
  const auto n = y.size();
  double sup = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = std_normal_cdf(y[i]);
    const double right = static_cast<double>(i + 1) / static_cast<double>(n);
    const double left = static_cast<double>(i) / static_cast<double>(n);
    sup = std::max({sup, std::abs(right - f), std::abs(left - f)});
  }
  return sup;
}

}  // namespace sliced::oracles

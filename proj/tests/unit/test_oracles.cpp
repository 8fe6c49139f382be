#include <doctest.h>

#include <cmath>

#include "sliced/oracles.hpp"
#include "test_support.hpp"

using namespace sliced;
using namespace sliced::oracles;
using sliced::testing::random_sorted_sample;

namespace {

SortedSample1D<double> constant(Eigen::Index n, double v) { return SortedSample1D<double>(VectorXd::Constant(n, v)); }

}  // namespace

TEST_CASE("w2_numeric point masses")
{
  const QuadratureSpec q{1'000'000, QuadratureVariable::NormalScore};
  CHECK(std::abs(w2_numeric(constant(1, 0.0), q) - 1.0) <= 1e-6);
  CHECK(std::abs(w2_numeric(constant(7, 0.0), q) - 1.0) <= 1e-6);
  CHECK(std::abs(w2_numeric(constant(1, 3.0), q) - 10.0) <= 1e-6);

  // The direct t-space rule converges more slowly because of the quantile
  // singularities at the ends, but still agrees to its own accuracy.
  const QuadratureSpec direct{1'000'000, QuadratureVariable::Uniform};
  CHECK(std::abs(w2_numeric(constant(1, 0.0), direct) - 1.0) <= 1e-5);
  CHECK(std::abs(w2_numeric(constant(1, 3.0), direct) - 10.0) <= 1e-5);
}

TEST_CASE("cw_numeric is a nonnegative integral and converges")
{
  Rng rng(3);
  for (Eigen::Index n : {1, 4, 16}) {
    const auto y = random_sorted_sample(n, rng, 1.5, 0.5);
    const double coarse = cw_numeric(y, {20'000});
    const double fine = cw_numeric(y, {40'000});
    CHECK(coarse >= 0);
    CHECK(std::abs(coarse - fine) <= 1e-10 * std::max(fine, 1e-9));
  }
}

TEST_CASE("cvm_numeric certifying values")
{
  for (Eigen::Index n : {1, 2, 3, 5, 8, 16, 64}) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = quantile_by_bisection((2.0 * i + 1) / (2.0 * n));
    CHECK(std::abs(cvm_numeric(SortedSample1D<double>(v), {1'000'000}) - 1.0 / (12.0 * n * n)) <= 1e-8);
  }
  CHECK(cvm_numeric(constant(4, -40.0), {10'000}) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("ks_numeric")
{
  CHECK(ks_numeric(constant(1, 0.0)) == 0.5);

  for (Eigen::Index n : {2, 5, 16}) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) v[i] = quantile_by_bisection(double(i + 1) / n);
    v[n - 1] = 40.0;
    CHECK(ks_numeric(SortedSample1D<double>(v)) == doctest::Approx(1.0 / n).epsilon(1e-12));
  }

  // Brute force: the supremum over a dense grid never exceeds the exact value.
  Rng rng(8);
  const auto y = random_sorted_sample(6, rng);
  double dense = 0;
  for (int g = 0; g <= 200000; ++g) {
    const double x = -8.0 + 16.0 * g / 200000.0;
    Eigen::Index count = 0;
    while (count < y.size() && y[count] <= x) ++count;
    dense = std::max(dense, std::abs(double(count) / y.size() - std_normal_cdf(x)));
  }
  CHECK(dense <= ks_numeric(y) + 1e-15);
  CHECK(dense >= ks_numeric(y) - 1e-4);
}

TEST_CASE("oracles are deterministic")
{
  Rng rng(21);
  const auto y = random_sorted_sample(5, rng);
  CHECK(w2_numeric(y, {10'000}) == w2_numeric(y, {10'000}));
  CHECK(cw_numeric(y, {10'000}) == cw_numeric(y, {10'000}));
  CHECK(cvm_numeric(y, {10'000}) == cvm_numeric(y, {10'000}));
}

TEST_CASE("doubling the panel count changes the quadratures by less than the certification tolerance")
{
  Rng rng(99);
  for (Eigen::Index n : {1, 3, 8, 64}) {
    const auto y = random_sorted_sample(n, rng, 1.2, -0.3);
    CAPTURE(n);
    const double w_a = w2_numeric(y, {500'000});
    const double w_b = w2_numeric(y, {1'000'000});
    CHECK(std::abs(w_a - w_b) <= 1e-7 * w_b);
    const double c_a = cvm_numeric(y, {500'000});
    const double c_b = cvm_numeric(y, {1'000'000});
    CHECK(std::abs(c_a - c_b) <= 1e-7 * c_b);
  }
}

TEST_CASE("ks_numeric dominates the one-sided statistic")
{
  Rng rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const auto y = random_sorted_sample(1 + trial % 20, rng, 1.5, 0.4);
    CHECK(ks_numeric(y) >= ks_closed(y).distance);
    CHECK(ks_numeric(y) == doctest::Approx(ks_closed(y, KsVariant::TwoSided).distance).epsilon(1e-15));
  }
}

TEST_CASE("cw_numeric at a single point at the origin")
{
  CHECK(cw_numeric(constant(1, 0.0), {200'000}) == doctest::Approx(0.016974435262452967).epsilon(1e-12));
}

TEST_CASE("closed forms agree with the oracles on a few samples")
{
  Rng rng(4242);
  for (Eigen::Index n : {1, 2, 5, 16, 64}) {
    const auto y = random_sorted_sample(n, rng, 1.3, -0.2);
    CAPTURE(n);
    CHECK(w2_closed(y).distance == doctest::Approx(w2_numeric(y, {200'000})).epsilon(1e-6));
    CHECK(cw_closed(y).distance == doctest::Approx(cw_numeric(y, {50'000})).epsilon(1e-6));
    CHECK(cvm_closed(y).distance == doctest::Approx(cvm_numeric(y, {200'000})).epsilon(1e-6));
  }
}

TEST_CASE("quadratures reject too few panels")
{
  CHECK_THROWS_AS(w2_numeric(constant(1, 0.0), {999}), std::invalid_argument);
  CHECK_THROWS_AS(cw_numeric(constant(1, 0.0), {10}), std::invalid_argument);
  CHECK_THROWS_AS(cvm_numeric(constant(1, 0.0), {0}), std::invalid_argument);
}

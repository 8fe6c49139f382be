#include <doctest.h>

#include <cmath>

#include "sliced/metrics.hpp"

using namespace sliced;

namespace {

MatrixXd normal_batch(Eigen::Index n, Eigen::Index dim, Rng& rng)
{
  std::normal_distribution<double> normal;
  MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = normal(rng);
  return x;
}

double skewness_brute_force(const MatrixXd& x)
{
  double sum = 0;
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    for (Eigen::Index k = 0; k < x.rows(); ++k) sum += std::pow(x.row(j).dot(x.row(k)), 3);
  return sum / double(x.rows() * x.rows());
}

MatrixXd random_rotation(Eigen::Index dim, Rng& rng)
{
  const Eigen::HouseholderQR<MatrixXd> qr(normal_batch(dim, dim, rng));
  return qr.householderQ();
}

}  // namespace

TEST_CASE("mardia_skewness examples")
{
  MatrixXd pm(2, 3);
  pm << 1, 0, 0, -1, 0, 0;
  CHECK(mardia_skewness(pm) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

  const Eigen::RowVector3d v(0.5, -1.0, 2.0);
  CHECK(mardia_skewness(MatrixXd(v)) == doctest::Approx(std::pow(v.squaredNorm(), 3)).epsilon(1e-14));
  CHECK_THROWS_AS(mardia_skewness(MatrixXd(0, 3)), std::invalid_argument);
}

TEST_CASE("both skewness routes agree with the double sum")
{
  Rng rng(10);
  for (Eigen::Index dim : {1, 2, 5, 20, 40}) {
    const MatrixXd x = normal_batch(37, dim, rng).array() + 0.3;
    CAPTURE(dim);
    const double brute = skewness_brute_force(x);
    CHECK(mardia_skewness(x) == doctest::Approx(brute).epsilon(1e-11));
    CHECK(detail::cubed_gram_sum_tensor(x) / (37.0 * 37.0) == doctest::Approx(brute).epsilon(1e-11));
    CHECK(detail::cubed_gram_sum_blocked(x) / (37.0 * 37.0) == doctest::Approx(brute).epsilon(1e-11));
  }
  // Blocked route across several row blocks.
  const MatrixXd wide = normal_batch(600, 3, rng);
  CHECK(detail::cubed_gram_sum_blocked(wide) == doctest::Approx(detail::cubed_gram_sum_tensor(wide)).epsilon(1e-10));
}

TEST_CASE("skewness and kurtosis are rotation invariant")
{
  Rng rng(11);
  const MatrixXd x = normal_batch(50, 6, rng).array().square();
  const MatrixXd r = random_rotation(6, rng);
  const MatrixXd rotated = x * r.transpose();
  CHECK(mardia_skewness(rotated) == doctest::Approx(mardia_skewness(x)).epsilon(1e-11));
  CHECK(mardia_kurtosis(rotated, false) == doctest::Approx(mardia_kurtosis(x, false)).epsilon(1e-12));
}

TEST_CASE("mardia_kurtosis examples")
{
  CHECK(mardia_kurtosis(MatrixXd::Zero(5, 20).eval(), true) == -440.0);
  CHECK(mardia_kurtosis(MatrixXd::Zero(5, 20).eval(), false) == 0.0);
  MatrixXd x(2, 2);
  x << 1, 1, 2, 0;
  // |x_1|^4 = 4, |x_2|^4 = 16.
  CHECK(mardia_kurtosis(x, false) == 10.0);
  CHECK(mardia_kurtosis(x, true) == 2.0);
}

TEST_CASE("gaussian_frechet_proxy")
{
  Rng rng(12);
  const MatrixXd a = normal_batch(200, 4, rng);
  CHECK(gaussian_frechet_proxy(a, a) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

  const Eigen::RowVector4d shift(1.0, -2.0, 0.5, 0.0);
  const MatrixXd shifted = a.rowwise() + shift;
  CHECK(gaussian_frechet_proxy(a, shifted) == doctest::Approx(shift.squaredNorm()).epsilon(1e-10));

  // Identical covariance structure, scaled by 2: tr(S + 4S - 2 * 2S) = tr(S).
  const MatrixXd scaled = 2.0 * a;
  const RowVector<double> mean = a.colwise().mean();
  const double trace = detail::covariance<double>(a, mean).trace();
  CHECK(gaussian_frechet_proxy(a, scaled) == doctest::Approx(trace + mean.squaredNorm()).epsilon(1e-9));

  const MatrixXd b = normal_batch(150, 4, rng).array().square();
  CHECK(gaussian_frechet_proxy(a, b) == doctest::Approx(gaussian_frechet_proxy(b, a)).epsilon(1e-9));
  CHECK(gaussian_frechet_proxy(a, b) >= 0);

  CHECK_THROWS_AS(gaussian_frechet_proxy(a, MatrixXd::Zero(3, 2).eval()), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_frechet_proxy(a, MatrixXd::Zero(1, 4).eval()), std::invalid_argument);
}

TEST_CASE("frechet proxy of unit and 4I covariance gives D")
{
  // Exact N(0, I) and N(0, 4I) sample moments: rows +-e_i scaled.
  const Eigen::Index dim = 3;
  MatrixXd a(2 * dim, dim);
  a.setZero();
  for (Eigen::Index i = 0; i < dim; ++i) {
    a(2 * i, i) = 1;
    a(2 * i + 1, i) = -1;
  }
  a *= std::sqrt((2.0 * dim - 1) / 2.0);
  CHECK(detail::covariance<double>(a, a.colwise().mean()).isApprox(MatrixXd::Identity(dim, dim), 1e-12));
  CHECK(gaussian_frechet_proxy(a, (2.0 * a).eval()) == doctest::Approx(double(dim)).epsilon(1e-12));
}

TEST_CASE("sw_monitor")
{
  Rng rng(13);
  const MatrixXd batch = normal_batch(100, 3, rng);
  Rng a(5);
  Rng b(5);
  CHECK(sw_monitor(batch, 20, a) == sw_monitor(batch, 20, b));

  // Against an all-zero batch the mean squared comparison draw is about 1.
  Rng c(6);
  CHECK(sw_monitor(MatrixXd::Zero(2000, 3).eval(), 50, c) == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(sw_monitor(batch, 0, c), std::invalid_argument);
}

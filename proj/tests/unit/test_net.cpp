#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "sliced/net.hpp"
#include "test_support.hpp"

using namespace sliced;
using namespace sliced::net;
using sliced::testing::relative_error;

namespace {

MlpSpec small_spec(Eigen::Index input, Eigen::Index latent, std::vector<Eigen::Index> enc, std::vector<Eigen::Index> dec)
{
  MlpSpec spec;
  spec.input_dim = input;
  spec.latent_dim = latent;
  spec.encoder_hidden = std::move(enc);
  spec.decoder_hidden = std::move(dec);
  return spec;
}

MatrixXd normal_batch(Eigen::Index n, Eigen::Index dim, Rng& rng)
{
  std::normal_distribution<double> normal;
  MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = normal(rng);
  return x;
}

StepSettings settings_for(DistanceKind kind, CostMode cost = LogComposite{})
{
  StepSettings s;
  s.sliced.kind = kind;
  s.cost = cost;
  return s;
}

std::filesystem::path temp_path(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / "sliced_unit_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("MlpSpec validation and shapes")
{
  CHECK_NOTHROW(MlpSpec{}.validate());
  CHECK_THROWS_AS(small_spec(0, 2, {}, {}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(small_spec(3, 2, {0}, {}).validate(), std::invalid_argument);

  const auto net = zeros_like(small_spec(4, 2, {5}, {6, 7}));
  REQUIRE(net.encoder.layers.size() == 2);
  REQUIRE(net.decoder.layers.size() == 3);
  CHECK(net.encoder.input_dim() == 4);
  CHECK(net.encoder.output_dim() == 2);
  CHECK(net.decoder.input_dim() == 2);
  CHECK(net.decoder.output_dim() == 4);
  CHECK(net.decoder.layers[1].weight.rows() == 7);
  CHECK(net.decoder.layers[1].weight.cols() == 6);
  CHECK(parameter_count(net) == (4 * 5 + 5) + (5 * 2 + 2) + (2 * 6 + 6) + (6 * 7 + 7) + (7 * 4 + 4));
}

TEST_CASE("initialization limits and flatten round trip")
{
  Rng rng(1);
  const auto net = initialize(small_spec(50, 3, {40}, {30}), rng);
  CHECK(net.encoder.layers[0].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 50));
  CHECK(net.encoder.layers[1].weight.cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 40));
  CHECK(net.decoder.layers[1].weight.cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 30));
  CHECK(net.encoder.layers[0].bias.isZero(0));

  const VectorXd flat = flatten(net);
  CHECK(static_cast<std::size_t>(flat.size()) == parameter_count(net));
  CHECK(flatten(unflatten(flat, net)) == flat);
}

TEST_CASE("encode and decode")
{
  Rng rng(2);
  TrainState state = make_train_state(small_spec(3, 2, {4}, {4}), {}, 7);
  state.params = zeros_like(state.spec);
  const MatrixXd x = normal_batch(5, 3, rng);
  CHECK(encode(state, x).isZero(0));
  CHECK(decode(state, MatrixXd::Ones(5, 2)).isZero(0));

  TrainState identity = make_train_state(small_spec(3, 3, {}, {}), {}, 7);
  identity.params.encoder.layers[0].weight.setIdentity();
  identity.params.encoder.layers[0].bias.setZero();
  CHECK(encode(identity, x) == x);

  const TrainState again = make_train_state(small_spec(3, 2, {4}, {4}), {}, 7);
  const TrainState fresh = make_train_state(small_spec(3, 2, {4}, {4}), {}, 7);
  CHECK(encode(again, x) == encode(fresh, x));
  CHECK(encode(again, x).rows() == 5);
  CHECK(encode(again, x).cols() == 2);
}

TEST_CASE("mse")
{
  MatrixXd x(1, 2);
  x << 3, 4;
  CHECK(mse(x, MatrixXd::Zero(1, 2)) == 25.0);
  MatrixXd a(2, 3);
  a << 1, 1, 1, 0, 0, 0;
  // Row errors 3 and 3, mean 3 over the two points.
  MatrixXd b(2, 3);
  b << 0, 0, 0, 1, 1, 1;
  CHECK(mse(a, b) == 3.0);
  CHECK(mse(a, a) == 0.0);
  CHECK_THROWS_AS(mse(a, x), std::invalid_argument);
}

TEST_CASE("full parameter gradient matches central differences")
{
  Rng rng(3);
  const MlpSpec spec = small_spec(4, 2, {5}, {5});
  for (auto kind : {DistanceKind::SCFW, DistanceKind::SCW, DistanceKind::SCvM, DistanceKind::SW}) {
    for (CostMode cost : {CostMode{LogComposite{}}, CostMode{LambdaWeighted{0.7}}}) {
      CAPTURE(to_string(kind));
      // Zero biases put dead units exactly on the rectifier kink; jitter them off it.
      const Autoencoder init = initialize(spec, rng);
      const Autoencoder params = unflatten(flatten(init) + 0.1 * normal_batch(flatten(init).size(), 1, rng).col(0), init);
      const MatrixXd x = normal_batch(3, 4, rng);
      const auto dirs = sample_directions<double>(4, 2, rng);
      const auto settings = settings_for(kind, cost);
      const std::uint64_t draw_seed = rng();

      Rng analytic_rng(draw_seed);
      const GradientResult analytic = compute_gradients(params, x, settings, dirs, analytic_rng);
      Rng value_rng(draw_seed);
      CHECK(evaluate_cost(params, x, settings, dirs, value_rng).cost == doctest::Approx(analytic.cost.cost).epsilon(1e-14));

      const VectorXd theta = flatten(params);
      const VectorXd fd = sliced::testing::central_difference(
          [&](const VectorXd& v) {
            Rng frozen(draw_seed);
            return evaluate_cost(unflatten(v, params), x, settings, dirs, frozen).cost;
          },
          theta, 1e-6);
      CHECK(relative_error(flatten(analytic.gradient), fd) <= 1e-4);
    }
  }
}

TEST_CASE("pure reconstruction descent does not increase the cost")
{
  Rng rng(4);
  const MatrixXd x = normal_batch(40, 5, rng);
  OptimizerSettings sgd;
  sgd.kind = OptimizerKind::Sgd;
  sgd.learning_rate = 1e-3;
  TrainState state = make_train_state(small_spec(5, 2, {}, {}), sgd, 11);
  const auto dirs = sample_directions<double>(3, 2, rng);
  const auto settings = settings_for(DistanceKind::SCFW, LambdaWeighted{0.0});
  double previous = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 100; ++step) {
    const double cost = backward_step(state, x, settings, dirs).cost;
    CHECK(cost <= previous + 1e-12);
    previous = cost;
  }
  CHECK(state.step == 100);
}

TEST_CASE("linear autoencoder recovers a two dimensional subspace")
{
  Rng rng(5);
  const MatrixXd basis = normal_batch(2, 6, rng);
  const MatrixXd x = normal_batch(200, 2, rng) * basis;
  OptimizerSettings adam;
  adam.learning_rate = 1e-2;
  TrainState state = make_train_state(small_spec(6, 2, {}, {}), adam, 12);
  const auto dirs = sample_directions<double>(2, 2, rng);
  const auto settings = settings_for(DistanceKind::SCFW, LambdaWeighted{0.0});
  for (int step = 0; step < 3000; ++step) backward_step(state, x, settings, dirs);
  CHECK(mse(x, decode(state, encode(state, x))) < 1e-3);
}

TEST_CASE("training is a pure function of the seed")
{
  Rng data_rng(6);
  const MatrixXd x = normal_batch(30, 4, data_rng);
  const MlpSpec spec = small_spec(4, 2, {8}, {8});
  TrainState a = make_train_state(spec, {}, 99);
  TrainState b = make_train_state(spec, {}, 99);
  CHECK(identical(a, b));
  for (auto kind : {DistanceKind::SW, DistanceKind::SCFW, DistanceKind::SKS}) {
    for (int step = 0; step < 10; ++step) {
      const auto da = sample_directions<double>(5, 2, a.rng);
      const auto db = sample_directions<double>(5, 2, b.rng);
      backward_step(a, x, settings_for(kind), da);
      backward_step(b, x, settings_for(kind), db);
    }
  }
  CHECK(identical(a, b));
  CHECK(!identical(a, make_train_state(spec, {}, 100)));

  // Shapes never change under updates.
  const auto shape = zeros_like(spec);
  for (std::size_t l = 0; l < shape.encoder.layers.size(); ++l) {
    CHECK(a.params.encoder.layers[l].weight.rows() == shape.encoder.layers[l].weight.rows());
    CHECK(a.params.encoder.layers[l].weight.cols() == shape.encoder.layers[l].weight.cols());
  }
  CHECK(flatten(a.params).size() == flatten(shape).size());
}

TEST_CASE("checkpoint round trip is exact")
{
  Rng data_rng(7);
  const MatrixXd x = normal_batch(25, 3, data_rng);
  TrainState state = make_train_state(small_spec(3, 2, {6}, {6}), {}, 5);
  for (int step = 0; step < 7; ++step)
    backward_step(state, x, settings_for(DistanceKind::SW), sample_directions<double>(4, 2, state.rng));
  state.epoch = 3;

  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(state, path);
  TrainState loaded = load_checkpoint(path);
  CHECK(identical(state, loaded));

  // Continuing from the copy matches continuing from the original.
  for (TrainState* s : {&state, &loaded})
    backward_step(*s, x, settings_for(DistanceKind::SW), sample_directions<double>(4, 2, s->rng));
  CHECK(identical(state, loaded));

  {
    std::ofstream bad(temp_path("bad.ckpt"));
    bad << "not a checkpoint\n";
  }
  CHECK_THROWS(load_checkpoint(temp_path("bad.ckpt")));
  CHECK_THROWS(load_checkpoint(temp_path("missing.ckpt")));
}

TEST_CASE("non-finite gradients abort the step and leave the state untouched")
{
  Rng rng(8);
  TrainState state = make_train_state(small_spec(3, 2, {4}, {4}), {}, 3);
  const TrainState before = state;
  MatrixXd x = normal_batch(6, 3, rng);
  x(0, 0) = std::numeric_limits<double>::infinity();
  const auto dirs = sample_directions<double>(3, 2, rng);
  CHECK_THROWS_AS(backward_step(state, x, settings_for(DistanceKind::SCFW), dirs), NonFiniteGradient);
  CHECK(identical(state, before));

  x(0, 0) = 1e300;
  CHECK_THROWS_AS(backward_step(state, x, settings_for(DistanceKind::SCFW), dirs), NonFiniteGradient);
  CHECK(identical(state, before));
}

#pragma once

// Fully connected autoencoder with hand-written reverse pass and an
// Adam/SGD optimizer. Points are stored as rows throughout.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sliced/slicer.hpp"
#include "sliced/types.hpp"

namespace sliced::net {

struct MlpSpec
{
  Eigen::Index input_dim = 784;
  Eigen::Index latent_dim = 20;
  std::vector<Eigen::Index> encoder_hidden{256, 128};
  std::vector<Eigen::Index> decoder_hidden{128, 256};

  /// Throws std::invalid_argument on non-positive widths.
  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

struct DenseLayer
{
  MatrixXd weight;  ///< out x in
  VectorXd bias;    ///< out
};

/// Rectifier on every layer but the last, identity on the last.
struct Mlp
{
  std::vector<DenseLayer> layers;

  Eigen::Index input_dim() const { return layers.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers.back().weight.rows(); }
};

struct Autoencoder
{
  Mlp encoder;
  Mlp decoder;
};

/// Zero-filled network with the layer shapes implied by `spec`.
Autoencoder zeros_like(const MlpSpec& spec);

/// Uniform fan-in initialization: limit sqrt(6/fan_in) ahead of a rectifier,
/// sqrt(3/fan_in) on output layers. Biases start at zero.
Autoencoder initialize(const MlpSpec& spec, Rng& rng);

std::size_t parameter_count(const Autoencoder& net);
VectorXd flatten(const Autoencoder& net);
/// Inverse of flatten; `shape` supplies the layer shapes.
Autoencoder unflatten(const VectorXd& flat, const Autoencoder& shape);

enum class OptimizerKind { Adam, Sgd };

struct OptimizerSettings
{
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const OptimizerSettings&) const = default;
};

struct TrainState
{
  MlpSpec spec;
  OptimizerSettings optimizer;
  Autoencoder params;
  Autoencoder first_moment;
  Autoencoder second_moment;
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  Rng rng;
};

TrainState make_train_state(const MlpSpec& spec, const OptimizerSettings& optimizer, std::uint64_t seed);

/// Activations of every layer; inputs[l] is the input to layer l and
/// inputs.back() the network output.
struct ForwardCache
{
  std::vector<MatrixXd> inputs;
};

MatrixXd forward(const Mlp& mlp, const MatrixXd& x, ForwardCache* cache = nullptr);

/// Reverse pass for one network. Accumulates parameter gradients into
/// `grads` and returns d loss / d input.
MatrixXd backward(const Mlp& mlp, const ForwardCache& cache, const MatrixXd& output_grad, Mlp& grads);

LatentBatch<double> encode(const TrainState& state, const MatrixXd& x);
MatrixXd decode(const TrainState& state, const LatentBatch<double>& z);

/// (1/n) sum_i |x_i - xhat_i|^2; not divided by the point dimension.
double mse(const MatrixXd& x, const MatrixXd& xhat);

struct CostBreakdown
{
  double mse = 0;
  double penalty = 0;
  double cost = 0;
};

struct StepSettings
{
  SlicedOptions sliced;
  CostMode cost = LogComposite{};
};

struct GradientResult
{
  Autoencoder gradient;
  CostBreakdown cost;
};

/// Full cost and its gradient with respect to every parameter. SW comparison
/// draws come from `rng`.
GradientResult compute_gradients(const Autoencoder& params, const MatrixXd& x, const StepSettings& settings,
                                 const DirectionSet<double>& dirs, Rng& rng);

/// Cost alone, for finite-difference checks.
CostBreakdown evaluate_cost(const Autoencoder& params, const MatrixXd& x, const StepSettings& settings,
                            const DirectionSet<double>& dirs, Rng& rng);

class NonFiniteGradient : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// One optimizer update on batch `x`. Throws NonFiniteGradient, leaving the
/// state untouched, if the cost or any gradient entry is not finite.
CostBreakdown backward_step(TrainState& state, const MatrixXd& x, const StepSettings& settings,
                            const DirectionSet<double>& dirs);

/// Versioned text checkpoint; floating-point values are written as hex
/// floats so that load(save(s)) reproduces s bit for bit.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

bool identical(const TrainState& a, const TrainState& b);

}  // namespace sliced::net

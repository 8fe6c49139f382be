#include "sliced/net.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sliced::net {

namespace {

using ArrayMap = Eigen::Map<Eigen::ArrayXd>;

std::vector<Eigen::Index> widths(Eigen::Index in, const std::vector<Eigen::Index>& hidden, Eigen::Index out)
{
  std::vector<Eigen::Index> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

Mlp zero_mlp(const std::vector<Eigen::Index>& w)
{
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < w.size(); ++l)
    mlp.layers.push_back({MatrixXd::Zero(w[l + 1], w[l]), VectorXd::Zero(w[l + 1])});
  return mlp;
}

// Calls f(map_0, map_1, ...) on matching tensors of several networks.
template <typename F, typename... Nets>
void for_each_tensor(F&& f, Nets&... nets)
{
  auto visit_mlp = [&](auto member) {
    const std::size_t layers = (std::get<0>(std::tie(nets...)).*member).layers.size();
    for (std::size_t l = 0; l < layers; ++l) {
      f(ArrayMap((nets.*member).layers[l].weight.data(), (nets.*member).layers[l].weight.size())...);
      f(ArrayMap((nets.*member).layers[l].bias.data(), (nets.*member).layers[l].bias.size())...);
    }
  };
  visit_mlp(&Autoencoder::encoder);
  visit_mlp(&Autoencoder::decoder);
}

bool all_finite(const Autoencoder& net)
{
  bool finite = true;
  Autoencoder copy = net;
  for_each_tensor([&](ArrayMap a) { finite = finite && a.isFinite().all(); }, copy);
  return finite;
}

}  // namespace

void MlpSpec::validate() const
{
  if (input_dim < 1 || latent_dim < 1) throw std::invalid_argument("MlpSpec: dimensions must be positive");
  for (auto w : encoder_hidden)
    if (w < 1) throw std::invalid_argument("MlpSpec: hidden widths must be positive");
  for (auto w : decoder_hidden)
    if (w < 1) throw std::invalid_argument("MlpSpec: hidden widths must be positive");
}

Autoencoder zeros_like(const MlpSpec& spec)
{
  spec.validate();
  return {zero_mlp(widths(spec.input_dim, spec.encoder_hidden, spec.latent_dim)),
          zero_mlp(widths(spec.latent_dim, spec.decoder_hidden, spec.input_dim))};
}

Autoencoder initialize(const MlpSpec& spec, Rng& rng)
{
  Autoencoder net = zeros_like(spec);
  auto fill = [&](Mlp& mlp) {
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      auto& w = mlp.layers[l].weight;
      const bool output_layer = l + 1 == mlp.layers.size();
      const double limit = std::sqrt((output_layer ? 3.0 : 6.0) / static_cast<double>(w.cols()));
      std::uniform_real_distribution<double> uniform(-limit, limit);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = uniform(rng);
    }
  };
  fill(net.encoder);
  fill(net.decoder);
  return net;
}

std::size_t parameter_count(const Autoencoder& net)
{
  std::size_t count = 0;
  for (const Mlp* mlp : {&net.encoder, &net.decoder})
    for (const auto& layer : mlp->layers) count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return count;
}

VectorXd flatten(const Autoencoder& net)
{
  VectorXd flat(static_cast<Eigen::Index>(parameter_count(net)));
  Eigen::Index offset = 0;
  Autoencoder copy = net;
  for_each_tensor(
      [&](ArrayMap a) {
        flat.segment(offset, a.size()) = a.matrix();
        offset += a.size();
      },
      copy);
  return flat;
}

Autoencoder unflatten(const VectorXd& flat, const Autoencoder& shape)
{
  if (static_cast<std::size_t>(flat.size()) != parameter_count(shape))
    throw std::invalid_argument("unflatten: size mismatch");
  Autoencoder net = shape;
  Eigen::Index offset = 0;
  for_each_tensor(
      [&](ArrayMap a) {
        a = flat.segment(offset, a.size()).array();
        offset += a.size();
      },
      net);
  return net;
}

TrainState make_train_state(const MlpSpec& spec, const OptimizerSettings& optimizer, std::uint64_t seed)
{
  TrainState state;
  state.spec = spec;
  state.optimizer = optimizer;
  state.rng.seed(seed);
  state.params = initialize(spec, state.rng);
  state.first_moment = zeros_like(spec);
  state.second_moment = zeros_like(spec);
  return state;
}

MatrixXd forward(const Mlp& mlp, const MatrixXd& x, ForwardCache* cache)
{
  if (x.cols() != mlp.input_dim()) throw std::invalid_argument("forward: input width does not match network");
  if (cache) {
    cache->inputs.clear();
    cache->inputs.push_back(x);
  }
  MatrixXd h = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    MatrixXd out = h * layer.weight.transpose();
    out.rowwise() += layer.bias.transpose();
    if (l + 1 < mlp.layers.size()) out = out.cwiseMax(0.0);
    h = std::move(out);
    if (cache) cache->inputs.push_back(h);
  }
  return h;
}

MatrixXd backward(const Mlp& mlp, const ForwardCache& cache, const MatrixXd& output_grad, Mlp& grads)
{
  MatrixXd g = output_grad;
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    if (l + 1 < mlp.layers.size()) {
      // Rectifier derivative, taken as 0 at exactly 0.
      g = (cache.inputs[l + 1].array() > 0).select(g, 0.0);
    }
    grads.layers[l].weight.noalias() += g.transpose() * cache.inputs[l];
    grads.layers[l].bias += g.colwise().sum().transpose();
    g = g * mlp.layers[l].weight;
  }
  return g;
}

LatentBatch<double> encode(const TrainState& state, const MatrixXd& x)
{
  return forward(state.params.encoder, x);
}

MatrixXd decode(const TrainState& state, const LatentBatch<double>& z)
{
  return forward(state.params.decoder, z);
}

double mse(const MatrixXd& x, const MatrixXd& xhat)
{
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols()) throw std::invalid_argument("mse: shape mismatch");
  if (x.rows() < 1) throw std::invalid_argument("mse: empty batch");
  return (x - xhat).squaredNorm() / static_cast<double>(x.rows());
}

GradientResult compute_gradients(const Autoencoder& params, const MatrixXd& x, const StepSettings& settings,
                                 const DirectionSet<double>& dirs, Rng& rng)
{
  ForwardCache enc_cache;
  ForwardCache dec_cache;
  const MatrixXd z = forward(params.encoder, x, &enc_cache);
  const MatrixXd xhat = forward(params.decoder, z, &dec_cache);
  if (!z.allFinite() || !xhat.allFinite()) throw NonFiniteGradient("non-finite activations in the forward pass");
  const double n = static_cast<double>(x.rows());

  GradientResult result;
  result.cost.mse = mse(x, xhat);
  SlicedOptions sliced_options = settings.sliced;
  sliced_options.want_gradient = true;
  const auto sliced = sliced_distance(z, dirs, sliced_options, rng);
  result.cost.penalty = sliced.distance;
  const auto composite = composite_cost(result.cost.mse, sliced.distance, settings.cost);
  result.cost.cost = composite.value;

  Autoencoder grads = params;
  for_each_tensor([](ArrayMap a) { a.setZero(); }, grads);

  const MatrixXd dxhat = (2.0 / n) * (xhat - x);
  MatrixXd dz = backward(params.decoder, dec_cache, dxhat, grads.decoder);
  dz += composite.penalty_slope * sliced.gradient;
  backward(params.encoder, enc_cache, dz, grads.encoder);
  result.gradient = std::move(grads);
  return result;
}

CostBreakdown evaluate_cost(const Autoencoder& params, const MatrixXd& x, const StepSettings& settings,
                            const DirectionSet<double>& dirs, Rng& rng)
{
  const MatrixXd z = forward(params.encoder, x);
  const MatrixXd xhat = forward(params.decoder, z);
  CostBreakdown cost;
  cost.mse = mse(x, xhat);
  SlicedOptions sliced_options = settings.sliced;
  sliced_options.want_gradient = false;
  cost.penalty = sliced_distance(z, dirs, sliced_options, rng).distance;
  cost.cost = composite_cost(cost.mse, cost.penalty, settings.cost).value;
  return cost;
}

CostBreakdown backward_step(TrainState& state, const MatrixXd& x, const StepSettings& settings,
                            const DirectionSet<double>& dirs)
{
  Rng rng_after = state.rng;
  auto result = compute_gradients(state.params, x, settings, dirs, rng_after);
  if (!std::isfinite(result.cost.cost) || !all_finite(result.gradient)) {
    std::ostringstream msg;
    msg << "non-finite cost or gradient at optimizer step " << state.step << " (mse=" << result.cost.mse
        << ", penalty=" << result.cost.penalty << ", cost=" << result.cost.cost << ")";
    throw NonFiniteGradient(msg.str());
  }
  state.rng = rng_after;
  ++state.step;

  const auto& opt = state.optimizer;
  if (opt.kind == OptimizerKind::Sgd) {
    for_each_tensor([&](ArrayMap p, ArrayMap g) { p -= opt.learning_rate * g; }, state.params, result.gradient);
    return result.cost;
  }
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(opt.beta1, t);
  const double correction2 = 1.0 - std::pow(opt.beta2, t);
  for_each_tensor(
      [&](ArrayMap p, ArrayMap g, ArrayMap m, ArrayMap v) {
        m = opt.beta1 * m + (1.0 - opt.beta1) * g;
        v = opt.beta2 * v + (1.0 - opt.beta2) * g.square();
        p -= opt.learning_rate * (m / correction1) / ((v / correction2).sqrt() + opt.epsilon);
      },
      state.params, result.gradient, state.first_moment, state.second_moment);
  return result.cost;
}

// Checkpoint ----------------------------------------------------------------

namespace {

constexpr const char* kCheckpointMagic = "sliced-checkpoint";
constexpr int kCheckpointVersion = 1;

void write_hex(std::ostream& out, double value)
{
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  out << buffer;
}

double read_hex(std::istream& in)
{
  std::string token;
  if (!(in >> token)) throw std::runtime_error("checkpoint: unexpected end of file");
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) throw std::runtime_error("checkpoint: bad number '" + token + "'");
  return value;
}

void expect(std::istream& in, const std::string& keyword)
{
  std::string token;
  if (!(in >> token) || token != keyword)
    throw std::runtime_error("checkpoint: expected '" + keyword + "', found '" + token + "'");
}

template <typename T>
T read_value(std::istream& in)
{
  T value{};
  if (!(in >> value)) throw std::runtime_error("checkpoint: malformed value");
  return value;
}

void write_widths(std::ostream& out, const char* name, const std::vector<Eigen::Index>& w)
{
  out << name << ' ' << w.size();
  for (auto v : w) out << ' ' << v;
  out << '\n';
}

std::vector<Eigen::Index> read_widths(std::istream& in, const char* name)
{
  expect(in, name);
  const auto count = read_value<std::size_t>(in);
  std::vector<Eigen::Index> w(count);
  for (auto& v : w) v = read_value<Eigen::Index>(in);
  return w;
}

void write_net(std::ostream& out, const char* name, const Autoencoder& net)
{
  out << name << '\n';
  Autoencoder copy = net;
  for_each_tensor(
      [&](ArrayMap a) {
        out << a.size();
        for (Eigen::Index i = 0; i < a.size(); ++i) {
          out << ' ';
          write_hex(out, a[i]);
        }
        out << '\n';
      },
      copy);
}

Autoencoder read_net(std::istream& in, const char* name, const MlpSpec& spec)
{
  expect(in, name);
  Autoencoder net = zeros_like(spec);
  for_each_tensor(
      [&](ArrayMap a) {
        if (read_value<Eigen::Index>(in) != a.size()) throw std::runtime_error("checkpoint: tensor size mismatch");
        for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = read_hex(in);
      },
      net);
  return net;
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::filesystem::path& path)
{
  std::ostringstream out;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "input_dim " << state.spec.input_dim << '\n';
  out << "latent_dim " << state.spec.latent_dim << '\n';
  write_widths(out, "encoder_hidden", state.spec.encoder_hidden);
  write_widths(out, "decoder_hidden", state.spec.decoder_hidden);
  out << "optimizer " << (state.optimizer.kind == OptimizerKind::Adam ? "adam" : "sgd");
  for (double v : {state.optimizer.learning_rate, state.optimizer.beta1, state.optimizer.beta2,
                   state.optimizer.epsilon}) {
    out << ' ';
    write_hex(out, v);
  }
  out << '\n';
  out << "step " << state.step << '\n';
  out << "epoch " << state.epoch << '\n';
  out << "rng " << state.rng << '\n';
  write_net(out, "params", state.params);
  write_net(out, "first_moment", state.first_moment);
  write_net(out, "second_moment", state.second_moment);
  out << "end\n";

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  file << out.str();
  if (!file) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  expect(in, kCheckpointMagic);
  if (read_value<int>(in) != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");

  TrainState state;
  expect(in, "input_dim");
  state.spec.input_dim = read_value<Eigen::Index>(in);
  expect(in, "latent_dim");
  state.spec.latent_dim = read_value<Eigen::Index>(in);
  state.spec.encoder_hidden = read_widths(in, "encoder_hidden");
  state.spec.decoder_hidden = read_widths(in, "decoder_hidden");
  state.spec.validate();

  expect(in, "optimizer");
  const auto kind = read_value<std::string>(in);
  if (kind != "adam" && kind != "sgd") throw std::runtime_error("checkpoint: unknown optimizer " + kind);
  state.optimizer.kind = kind == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
  state.optimizer.learning_rate = read_hex(in);
  state.optimizer.beta1 = read_hex(in);
  state.optimizer.beta2 = read_hex(in);
  state.optimizer.epsilon = read_hex(in);

  expect(in, "step");
  state.step = read_value<std::int64_t>(in);
  expect(in, "epoch");
  state.epoch = read_value<std::int64_t>(in);
  expect(in, "rng");
  if (!(in >> state.rng)) throw std::runtime_error("checkpoint: malformed rng state");

  state.params = read_net(in, "params", state.spec);
  state.first_moment = read_net(in, "first_moment", state.spec);
  state.second_moment = read_net(in, "second_moment", state.spec);
  expect(in, "end");
  return state;
}

bool identical(const TrainState& a, const TrainState& b)
{
  if (!(a.spec == b.spec) || !(a.optimizer == b.optimizer) || a.step != b.step || a.epoch != b.epoch ||
      a.rng != b.rng)
    return false;
  const auto same = [](const Autoencoder& x, const Autoencoder& y) {
    if (parameter_count(x) != parameter_count(y)) return false;
    const VectorXd fx = flatten(x);
    const VectorXd fy = flatten(y);
    return std::memcmp(fx.data(), fy.data(), static_cast<std::size_t>(fx.size()) * sizeof(double)) == 0;
  };
  return same(a.params, b.params) && same(a.first_moment, b.first_moment) && same(a.second_moment, b.second_moment);
}

}  // namespace sliced::net

#include "sliced/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sliced/harness/image.hpp"
#include "sliced/metrics.hpp"

namespace sliced::harness {

namespace {

// Substream indices derived from the run seed.
constexpr std::uint64_t kFixedDirectionsStream = 2;
constexpr std::uint64_t kEvaluationStream = 3;
constexpr std::uint64_t kImageStream = 4;
constexpr std::uint64_t kMonitorStream = 5;
constexpr std::uint64_t kPriorStream = 6;

std::string format_metric(double v)
{
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.10g", v);
  return buffer;
}

SlicedOptions sliced_options(const RunConfig& config)
{
  SlicedOptions options;
  options.kind = config.distance;
  options.ks_variant = config.ks_variant;
  options.share_sw_sample = config.share_sw_sample;
  return options;
}

bool finite(const MetricsRow& row)
{
  for (double v : {row.mse, row.sliced_penalty, row.cost, row.mardia_skewness, row.mardia_kurtosis_normalized,
                   row.sw_monitor, row.gfd_proxy})
    if (!std::isfinite(v)) return false;
  return true;
}

MatrixXd prior_samples(Eigen::Index n, Eigen::Index dim, Rng& rng)
{
  std::normal_distribution<double> normal;
  MatrixXd z(n, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = normal(rng);
  return z;
}

MatrixXd gather_rows(const MatrixXd& source, const std::vector<Eigen::Index>& order, Eigen::Index begin, Eigen::Index count)
{
  MatrixXd out(count, source.cols());
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = source.row(order[static_cast<std::size_t>(begin + i)]);
  return out;
}

std::filesystem::path checkpoint_name(const std::filesystem::path& dir, std::int64_t epoch)
{
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "checkpoint_epoch_%04lld.ckpt", static_cast<long long>(epoch));
  return dir / buffer;
}

}  // namespace

std::string to_csv_line(const MetricsRow& row)
{
  std::string line = std::to_string(row.epoch);
  for (double v : {row.mse, row.sliced_penalty, row.cost, row.mardia_skewness, row.mardia_kurtosis_normalized,
                   row.sw_monitor, row.gfd_proxy})
    line += "," + format_metric(v);
  return line;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("metrics: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw std::runtime_error("metrics: unexpected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow row;
    char comma;
    std::istringstream ss(line);
    ss >> row.epoch >> comma >> row.mse >> comma >> row.sliced_penalty >> comma >> row.cost >> comma >>
        row.mardia_skewness >> comma >> row.mardia_kurtosis_normalized >> comma >> row.sw_monitor >> comma >>
        row.gfd_proxy;
    if (!ss) throw std::runtime_error("metrics: malformed row '" + line + "'");
    rows.push_back(row);
  }
  return rows;
}

Dataset load_dataset(const RunConfig& config)
{
  if (config.data_source == "csv") {
    const MatrixXd train_points = read_csv(config.train_path);
    if (!config.test_path.empty()) {
      Dataset data;
      data.train = train_points;
      data.test = read_csv(config.test_path);
      if (data.test.cols() != data.train.cols()) throw std::runtime_error("csv: train and test dimensions differ");
      return data;
    }
    const Eigen::Index n = train_points.rows();
    const auto train = std::clamp<Eigen::Index>(
        static_cast<Eigen::Index>(std::llround((1.0 - config.test_fraction) * static_cast<double>(n))), 1, n - 1);
    if (n < 2) throw std::runtime_error("csv: need at least two points");
    Dataset data;
    data.train = train_points.topRows(train);
    data.test = train_points.bottomRows(n - train);
    return data;
  }
  if (config.data_source == "idx") {
    std::optional<std::filesystem::path> labels;
    if (!config.train_labels.empty()) labels = config.train_labels;
    if (!config.test_path.empty()) {
      Dataset data;
      auto train = read_idx_images(config.train_path);
      auto test = read_idx_images(config.test_path);
      if (train.pixels.cols() != test.pixels.cols())
        throw IdxError(IdxError::Kind::DimensionMismatch, "idx: train and test image sizes differ");
      data.train = std::move(train.pixels);
      data.test = std::move(test.pixels);
      data.image = train.shape;
      if (labels) data.train_labels = read_idx_labels(*labels);
      return data;
    }
    return load_idx(config.train_path, labels, config.test_fraction);
  }
  SyntheticSpec spec;
  spec.kind = parse_synthetic_kind(config.data_source);
  spec.points = config.data_points;
  spec.components = config.mixture_components;
  spec.test_fraction = config.test_fraction;
  spec.seed = config.seed;
  return gen_synthetic(spec);
}

MetricsRow evaluate(const net::TrainState& state, const Dataset& data, const RunConfig& config, std::int64_t epoch)
{
  Rng rng = substream(config.seed, kEvaluationStream);
  const MatrixXd& test = data.test;
  const MatrixXd z = net::encode(state, test);
  const MatrixXd xhat = net::decode(state, z);

  MetricsRow row;
  row.epoch = epoch;
  row.mse = net::mse(test, xhat);
  if (!z.allFinite() || !xhat.allFinite()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.sliced_penalty = row.cost = row.mardia_skewness = row.mardia_kurtosis_normalized = nan;
    row.sw_monitor = row.gfd_proxy = nan;
    return row;
  }

  const auto dirs = sample_directions<double>(config.projections, z.cols(), rng);
  auto options = sliced_options(config);
  options.want_gradient = false;
  row.sliced_penalty = sliced_distance(z, dirs, options, rng).distance;
  row.cost = composite_cost(row.mse, row.sliced_penalty, config.cost).value;
  row.mardia_skewness = mardia_skewness(z);
  row.mardia_kurtosis_normalized = mardia_kurtosis(z, true);
  // Separate streams keep the monitor and the prior draws independent of the penalty kind.
  Rng monitor_rng = substream(config.seed, kMonitorStream);
  row.sw_monitor = sw_monitor(z, config.monitor_projections, monitor_rng);

  Rng prior_rng = substream(config.seed, kPriorStream);
  const MatrixXd generated =
      net::decode(state, prior_samples(std::max<Eigen::Index>(test.rows(), 2), z.cols(), prior_rng));
  row.gfd_proxy = test.rows() >= 2 ? gaussian_frechet_proxy(test, generated) : 0.0;
  return row;
}

void write_image_dumps(const net::TrainState& state, const Dataset& data, const RunConfig& config,
                       const std::filesystem::path& dir)
{
  Rng rng = substream(config.seed, kImageStream);
  const MatrixXd& test = data.test;
  const Eigen::Index latent = state.spec.latent_dim;

  if (data.image) {
    // Reconstructions: odd rows are real test images, even rows their decodes.
    constexpr Eigen::Index columns = 8;
    const Eigen::Index shown = std::min<Eigen::Index>(test.rows(), 4 * columns);
    const MatrixXd real = test.topRows(shown);
    const MatrixXd recon = net::decode(state, net::encode(state, real));
    MatrixXd tiles(2 * shown, test.cols());
    Eigen::Index out = 0;
    for (Eigen::Index start = 0; start < shown; start += columns) {
      const Eigen::Index count = std::min(columns, shown - start);
      for (Eigen::Index i = 0; i < count; ++i) tiles.row(out + i) = real.row(start + i);
      for (Eigen::Index i = 0; i < count; ++i) tiles.row(out + count + i) = recon.row(start + i);
      out += 2 * count;
    }
    write_pgm(dir / "reconstructions.pgm", image_grid(tiles, *data.image, columns));
    write_pgm(dir / "samples.pgm", image_grid(net::decode(state, prior_samples(64, latent, rng)), *data.image, columns));

    if (test.rows() >= 2) {
      const MatrixXd ends = net::encode(state, test.topRows(2));
      constexpr Eigen::Index steps = 10;
      MatrixXd path(steps, latent);
      for (Eigen::Index s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        path.row(s) = (1 - t) * ends.row(0) + t * ends.row(1);
      }
      write_pgm(dir / "interpolation.pgm", image_grid(net::decode(state, path), *data.image, steps));
    }
    return;
  }

  constexpr Eigen::Index size = 256;
  const double extent = std::max(1.0, 1.1 * test.cwiseAbs().maxCoeff());
  const MatrixXd z = net::encode(state, test);
  write_pgm(dir / "test_points.pgm", scatter_image(test, size, extent));
  write_pgm(dir / "reconstructions.pgm", scatter_image(net::decode(state, z), size, extent));
  write_pgm(dir / "samples.pgm", scatter_image(net::decode(state, prior_samples(test.rows(), latent, rng)), size, extent));
  write_pgm(dir / "latent.pgm", scatter_image(z, size, 4.0));
}

TrainResult train(const RunConfig& config, std::ostream* log)
{
  config.validate();
  const Dataset data = load_dataset(config);

  net::MlpSpec spec;
  spec.input_dim = data.dimension();
  spec.latent_dim = config.latent_dim;
  spec.encoder_hidden = config.encoder_hidden;
  spec.decoder_hidden = config.decoder_hidden;

  TrainResult result;
  result.run_dir = config.output_dir;
  std::filesystem::create_directories(result.run_dir);
  {
    std::ofstream out(result.run_dir / "config.txt", std::ios::trunc);
    out << to_text(config);
  }
  std::ofstream metrics(result.run_dir / "metrics.csv", std::ios::trunc);
  if (!metrics) throw std::runtime_error("train: cannot write metrics.csv in " + result.run_dir.string());
  metrics << kMetricsHeader << '\n';

  net::TrainState state = net::make_train_state(spec, config.optimizer, config.seed);
  net::StepSettings settings;
  settings.sliced = sliced_options(config);
  settings.cost = config.cost;

  std::optional<DirectionSet<double>> fixed_dirs;
  if (config.directions == DirectionSchedule::Fixed) {
    Rng dir_rng = substream(config.seed, kFixedDirectionsStream);
    fixed_dirs = sample_directions<double>(config.projections, config.latent_dim, dir_rng);
  }

  auto fail = [&](std::int64_t epoch, const std::string& message) {
    std::ofstream err(result.run_dir / "error.txt", std::ios::trunc);
    err << "epoch " << epoch << ": " << message << '\n';
    return TrainingError(epoch, message);
  };

  auto record = [&](std::int64_t epoch) {
    const MetricsRow row = evaluate(state, data, config, epoch);
    metrics << to_csv_line(row) << '\n';
    metrics.flush();
    result.rows.push_back(row);
    if (log) *log << to_csv_line(row) << '\n';
    if (!finite(row)) throw fail(epoch, "non-finite evaluation metrics");
  };

  if (log) *log << kMetricsHeader << '\n';
  record(0);

  const Eigen::Index n = data.train.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), state.rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index count = std::min(config.batch_size, n - start);
      const MatrixXd batch = gather_rows(data.train, order, start, count);
      const auto dirs = fixed_dirs ? *fixed_dirs : sample_directions<double>(config.projections, config.latent_dim, state.rng);
      try {
        net::backward_step(state, batch, settings, dirs);
      } catch (const net::NonFiniteGradient& e) {
        throw fail(epoch, e.what());
      }
    }
    state.epoch = epoch;
    record(epoch);
    if (epoch % config.checkpoint_every == 0) net::save_checkpoint(state, checkpoint_name(result.run_dir, epoch));
  }

  net::save_checkpoint(state, result.run_dir / "checkpoint_final.ckpt");
  write_image_dumps(state, data, config, result.run_dir);
  result.state = std::move(state);
  return result;
}

}  // namespace sliced::harness

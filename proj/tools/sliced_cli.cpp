// Command-line front end: gen-data, train, eval, distance.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "sliced/harness/config.hpp"
#include "sliced/harness/dataset.hpp"
#include "sliced/harness/train.hpp"
#include "sliced/metrics.hpp"
#include "sliced/net.hpp"
#include "sliced/slicer.hpp"

namespace {

using namespace sliced;
using namespace sliced::harness;

std::string fmt(double v)
{
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.10g", v);
  return buffer;
}

// One --<key> option per config key; values given on the command line win
// over the config file.
struct ConfigOptions
{
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App& app)
  {
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) app.add_option("--" + key, overrides[key], "config override: " + key);
  }

  RunConfig resolve(const CLI::App& app) const
  {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& key : config_keys()) {
      if (app.count("--" + key) > 0) apply_setting(config, key, overrides.at(key));
    }
    config.validate();
    return config;
  }
};

int run_gen_data(const std::string& kind, Eigen::Index points, std::uint64_t seed, Eigen::Index components,
                 double test_fraction, const std::filesystem::path& out)
{
  SyntheticSpec spec;
  spec.kind = parse_synthetic_kind(kind);
  spec.points = points;
  spec.seed = seed;
  spec.components = components;
  spec.test_fraction = test_fraction;
  const Dataset data = gen_synthetic(spec);
  std::filesystem::create_directories(out);
  write_csv(out / "train.csv", data.train);
  write_csv(out / "test.csv", data.test);
  std::cout << "wrote " << data.train.rows() << " train and " << data.test.rows() << " test points to "
            << out.string() << '\n';
  return 0;
}

int run_train(const RunConfig& config, bool quiet)
{
  try {
    const auto result = train(config, quiet ? nullptr : &std::cout);
    const auto& first = result.rows.front();
    const auto& last = result.rows.back();
    std::cout << "run directory: " << result.run_dir.string() << '\n'
              << "final epoch " << last.epoch << ": cost " << fmt(last.cost) << " (epoch 0: " << fmt(first.cost)
              << "), mse " << fmt(last.mse) << ", sw_monitor " << fmt(last.sw_monitor) << " (epoch 0: "
              << fmt(first.sw_monitor) << "), skewness " << fmt(last.mardia_skewness) << ", kurtosis "
              << fmt(last.mardia_kurtosis_normalized) << ", gfd_proxy " << fmt(last.gfd_proxy) << '\n';
  } catch (const TrainingError& e) {
    std::cerr << "training aborted at " << e.what() << '\n';
    return 3;
  }
  return 0;
}

int run_eval(const RunConfig& config, const std::filesystem::path& checkpoint)
{
  const net::TrainState state = net::load_checkpoint(checkpoint);
  const Dataset data = load_dataset(config);
  if (data.dimension() != state.spec.input_dim)
    throw std::runtime_error("eval: dataset dimension does not match the checkpoint");
  std::cout << kMetricsHeader << '\n' << to_csv_line(evaluate(state, data, config, state.epoch)) << '\n';
  return 0;
}

int run_distance(const std::filesystem::path& file_a, const std::string& file_b, const std::string& kind_name,
                 Eigen::Index k, std::uint64_t seed, const std::string& ks_variant)
{
  const MatrixXd a = read_csv(file_a);
  Rng rng(seed);
  const auto dirs = sample_directions<double>(k, a.cols(), rng);
  double distance = 0;
  std::string label;
  if (!file_b.empty()) {
    const MatrixXd b = read_csv(file_b);
    distance = sliced_pairwise_distance(a, b, dirs);
    label = "SW(a, b)";
  } else {
    SlicedOptions options;
    options.kind = parse_distance_kind(kind_name);
    options.ks_variant = ks_variant == "two_sided" ? KsVariant::TwoSided : KsVariant::OneSided;
    options.want_gradient = false;
    distance = sliced_distance(a, dirs, options, rng).distance;
    label = std::string(to_string(options.kind)) + "(a, N(0,I))";
  }
  std::cout << "points " << a.rows() << ", dimension " << a.cols() << ", projections " << k << '\n'
            << "sliced distance " << label << ": " << fmt(distance) << '\n'
            << "mardia skewness: " << fmt(mardia_skewness(a)) << '\n'
            << "mardia kurtosis (raw): " << fmt(mardia_kurtosis(a, false)) << '\n'
            << "mardia kurtosis (normalized): " << fmt(mardia_kurtosis(a, true)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Sliced autoencoder distances, training and diagnostics"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset as train.csv / test.csv");
  std::string gen_kind = "gaussian_mixture";
  Eigen::Index gen_points = 2000;
  std::uint64_t gen_seed = 1;
  Eigen::Index gen_components = 4;
  double gen_test_fraction = 0.2;
  std::string gen_out = "data";
  gen->add_option("--kind", gen_kind, "gaussian_mixture | ring | checker")->capture_default_str();
  gen->add_option("--points", gen_points, "total number of points")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--components", gen_components, "mixture components")->capture_default_str();
  gen->add_option("--test-fraction", gen_test_fraction)->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train an autoencoder and log per-epoch metrics");
  ConfigOptions train_options;
  train_options.attach(*train_cmd);
  bool quiet = false;
  train_cmd->add_flag("--quiet", quiet, "only print the final summary");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the configured test split");
  ConfigOptions eval_options;
  eval_options.attach(*eval_cmd);
  std::string checkpoint;
  eval_cmd->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);

  auto* dist = app.add_subcommand("distance", "sliced distance of a CSV sample to N(0,I) or to a second sample");
  std::string file_a;
  std::string file_b;
  std::string kind = "SCFW";
  Eigen::Index projections = 50;
  std::uint64_t dist_seed = 1;
  std::string ks_variant = "one_sided";
  dist->add_option("file_a", file_a, "CSV points")->required()->check(CLI::ExistingFile);
  dist->add_option("file_b", file_b, "optional second CSV sample (pairwise SW)")->check(CLI::ExistingFile);
  dist->add_option("--kind", kind, "SW | SCFW | SCW | SCvM | SKS")->capture_default_str();
  dist->add_option("--projections,-k", projections)->capture_default_str();
  dist->add_option("--seed", dist_seed)->capture_default_str();
  dist->add_option("--ks-variant", ks_variant, "one_sided | two_sided")
      ->check(CLI::IsMember({"one_sided", "two_sided"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen_data(gen_kind, gen_points, gen_seed, gen_components, gen_test_fraction, gen_out);
    if (*train_cmd) return run_train(train_options.resolve(*train_cmd), quiet);
    if (*eval_cmd) return run_eval(eval_options.resolve(*eval_cmd), checkpoint);
    if (*dist) return run_distance(file_a, file_b, kind, projections, dist_seed, ks_variant);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

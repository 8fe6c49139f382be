#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sliced/net.hpp"
#include "sliced/slicer.hpp"

namespace sliced::harness {

enum class DirectionSchedule { PerBatch, Fixed };

/// Everything a training run depends on. A run is a pure function of this
/// struct.
struct RunConfig
{
  // penalty
  DistanceKind distance = DistanceKind::SCFW;
  CostMode cost = LogComposite{1e-12};
  Eigen::Index projections = 50;
  DirectionSchedule directions = DirectionSchedule::PerBatch;
  KsVariant ks_variant = KsVariant::OneSided;
  bool share_sw_sample = false;

  // architecture and optimizer
  Eigen::Index latent_dim = 20;
  std::vector<Eigen::Index> encoder_hidden{256, 128};
  std::vector<Eigen::Index> decoder_hidden{128, 256};
  net::OptimizerSettings optimizer;

  // schedule
  Eigen::Index batch_size = 100;
  std::int64_t epochs = 10;
  std::int64_t checkpoint_every = 10;
  Eigen::Index monitor_projections = 50;
  std::uint64_t seed = 1;

  // data: one of gaussian_mixture, ring, checker, csv, idx
  std::string data_source = "gaussian_mixture";
  Eigen::Index data_points = 2000;
  Eigen::Index mixture_components = 4;
  double test_fraction = 0.2;
  std::string train_path;
  std::string train_labels;
  std::string test_path;

  std::filesystem::path output_dir = "run";

  /// Throws std::invalid_argument when any field is out of range.
  void validate() const;
};

/// Every key accepted by the config parser, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual form. Throws std::invalid_argument on an
/// unknown key or a value that does not parse.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Parses flat `key = value` text. Blank lines and lines starting with '#'
/// are ignored. Unknown keys are rejected.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& config);

}  // namespace sliced::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sliced/harness/config.hpp"
#include "sliced/harness/dataset.hpp"
#include "sliced/net.hpp"

namespace sliced::harness {

/// Per-epoch diagnostics, computed on the test split.
struct MetricsRow
{
  std::int64_t epoch = 0;
  double mse = 0;
  double sliced_penalty = 0;
  double cost = 0;
  double mardia_skewness = 0;
  double mardia_kurtosis_normalized = 0;
  double sw_monitor = 0;
  double gfd_proxy = 0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,mse,sliced_penalty,cost,mardia_skewness,mardia_kurtosis_normalized,sw_monitor,gfd_proxy";

std::string to_csv_line(const MetricsRow& row);
/// Parses a metrics.csv file written by train().
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

class TrainingError : public std::runtime_error
{
public:
  TrainingError(std::int64_t epoch, const std::string& message)
      : std::runtime_error("epoch " + std::to_string(epoch) + ": " + message), epoch_(epoch)
  {
  }
  std::int64_t epoch() const { return epoch_; }

private:
  std::int64_t epoch_;
};

/// Builds the dataset named by the config's data_* keys.
Dataset load_dataset(const RunConfig& config);

/// Metrics of `state` on the test split. The evaluation randomness (slicing
/// directions, normal comparison draws, prior samples) is derived from the
/// config seed alone, so rows from different epochs are directly comparable.
MetricsRow evaluate(const net::TrainState& state, const Dataset& data, const RunConfig& config, std::int64_t epoch);

struct TrainResult
{
  std::filesystem::path run_dir;
  std::vector<MetricsRow> rows;
  net::TrainState state;
};

/// Runs the configured training and writes into config.output_dir:
///   config.txt, metrics.csv (epoch 0 is the initialization), periodic
///   checkpoint_epoch_NNNN.ckpt plus checkpoint_final.ckpt, and PGM dumps.
/// Throws TrainingError (after writing error.txt) on a non-finite loss.
TrainResult train(const RunConfig& config, std::ostream* log = nullptr);

/// Writes the final PGM dumps for a trained state.
void write_image_dumps(const net::TrainState& state, const Dataset& data, const RunConfig& config,
                       const std::filesystem::path& dir);

}  // namespace sliced::harness

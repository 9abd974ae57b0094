#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "games/dataset.hpp"
#include "games/graph.hpp"

namespace games {

struct GamesConfig {
  Eigen::Index k = 3;  ///< bottleneck width per node
  double alpha_g = 2.0;
  double alpha_w = 0.5;
  double alpha_s = 0.5;
  double learning_rate = 1e-3;
  int max_epochs = 2000;
  int patience = 50;
  /// Hidden widths shared by both reconstruction heads; unset means one
  /// hidden layer of width t.
  std::optional<std::vector<Eigen::Index>> hidden_sizes;
  std::uint64_t rng_seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

/// Fully connected layer followed by tanh; rows are samples (nodes).
struct DenseLayer {
  Eigen::MatrixXd weight;  ///< in x out
  Eigen::MatrixXd bias;    ///< 1 x out
};

/// Trainable tensors. Also used as the gradient record.
struct GamesParameters {
  Eigen::MatrixXd theta_enc;  ///< t x k
  Eigen::MatrixXd theta_dec;  ///< k x t
  std::vector<DenseLayer> head_power;
  std::vector<DenseLayer> head_gas;

  std::vector<Eigen::MatrixXd*> tensors();
  std::vector<const Eigen::MatrixXd*> tensors() const;
  /// Same shapes, all zeros.
  GamesParameters zeros_like() const;
  Eigen::Index size() const;
  bool all_finite() const;
};

struct GamesModel {
  SignalDims dims;
  GamesConfig config;
  RenormalizedLaplacian laplacian;
  Normalization normalization;
  GamesParameters params;

  /// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  static GamesModel initialize(const SignalDims& dims, const RenormalizedLaplacian& laplacian,
                               const GamesConfig& config);
};

struct Reconstruction {
  Eigen::MatrixXd electricity;
  Eigen::MatrixXd wind_cf;
  Eigen::MatrixXd solar_cf;
  Eigen::MatrixXd gas;
};

/// Block data matrix: power rows [E | W | S | 0], gas rows [0 | 0 | 0 | G].
Eigen::MatrixXd assemble_block(const DaySignal& day, const SignalDims& dims);

Eigen::MatrixXd encode(const GamesModel& model, const Eigen::MatrixXd& x);
Reconstruction decode(const GamesModel& model, const Eigen::MatrixXd& z);

/// Weighted reconstruction loss of one day inside a batch of `batch_days` days.
double day_loss(const GamesModel& model, const DaySignal& day, const GamesConfig& config,
                std::size_t batch_days);
/// Sum of day losses over the batch (so the mean over days of the per-day terms).
double batch_loss(const GamesModel& model, const std::vector<DaySignal>& batch,
                  const GamesConfig& config);

struct GradientResult {
  double loss = 0.0;
  GamesParameters grad;
};

/// Exact gradient of batch_loss with respect to every parameter.
GradientResult gradients(const GamesModel& model, const std::vector<DaySignal>& batch,
                         const GamesConfig& config);

struct DaySplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded shuffle of day positions, first `train_fraction` go to training.
DaySplit split_days(std::size_t day_count, double train_fraction, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  GamesModel model;  ///< parameters of the best validation epoch
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

/// Full-batch Adam with early stopping on validation loss. Row 0 of the log
/// holds the losses of the initial parameters.
TrainResult train(const MultiResolutionDataset& dataset, const GamesConfig& config,
                  const DaySplit& split);
TrainResult train(const MultiResolutionDataset& dataset, const GamesConfig& config,
                  const DaySplit& split, GamesModel initial);

struct EmbeddingSet {
  std::vector<int> day_indices;
  std::vector<Eigen::MatrixXd> embeddings;  ///< n x k each
};

EmbeddingSet embed_all(const GamesModel& model, const MultiResolutionDataset& dataset);

/// Normalizes raw data with the model's stored scaling; passes normalized
/// data through unchanged.
MultiResolutionDataset prepare_for_model(const GamesModel& model,
                                         const MultiResolutionDataset& dataset);

void save_model(const GamesModel& model, const std::filesystem::path& path);
GamesModel load_model(const std::filesystem::path& path);

void write_training_log(const std::vector<EpochRecord>& log, const std::filesystem::path& path);

}  // namespace games

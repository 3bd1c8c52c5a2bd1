#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nie/features.hpp"

namespace nie {

/// Feed-forward regressor: Linear -> ReLU -> ... -> Linear, with z-score
/// normalization of inputs and the scalar output stored alongside the
/// weights.
struct MlpModel {
  static constexpr int kFormatVersion = 1;

  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;  ///< layer l maps dims[l] -> dims[l+1]
  std::vector<Eigen::VectorXd> biases;
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  double label_mean = 0.0;
  double label_std = 1.0;
  std::uint32_t h_radius = 2;
  std::string graph_fingerprint;

  /// He-uniform hidden weights U(-sqrt(6/fan_in), sqrt(6/fan_in)) drawn
  /// from a seeded stream, a zero output layer, zero biases, identity
  /// normalization.
  static MlpModel initialized(std::vector<int> layer_dims, std::uint64_t seed);

  int input_dim() const { return layer_dims.front(); }

  /// Throws InvalidInput when shapes do not chain or stats are malformed.
  void validate() const;

  /// Network output on already-normalized inputs (one column per sample).
  Eigen::RowVectorXd forward_normalized(const Eigen::MatrixXd& inputs) const;

  /// De-normalized prediction for one raw input. Throws InvalidInput on a
  /// dimension mismatch.
  double forward(std::span<const double> raw) const;
  double forward(const FeatureVector& features) const;
};

/// Gradients of the normalized-space MSE, shaped like the model parameters.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean squared error of the network on normalized inputs (columns) and
/// normalized targets; fills `grads` when non-null.
double mse_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::RowVectorXd& targets, MlpGradients* grads);

struct TrainConfig {
  int batch_size = 512;
  double learning_rate = 0.05;
  int max_epochs = 200;
  int patience = 10;
  double val_fraction = 0.1;
  std::vector<int> hidden = {128, 128};
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;  ///< 1-based epoch whose weights were retained
  std::vector<double> train_mse;
  std::vector<double> validation_mse;
  bool stopped_early = false;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Mini-batch SGD on MSE with early stopping on a held-out split. `inputs`
/// holds one row per record. Deterministic in `seed`. Throws InvalidParameter
/// on bad configuration and TrainingDiverged on a non-finite loss.
TrainResult train_mlp(const Eigen::MatrixXd& inputs, std::span<const double> labels,
                      const TrainConfig& config, std::uint64_t seed);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const MlpModel& model);
/// Throws ParseError on malformed or truncated input, VersionMismatch on an
/// unknown format version.
MlpModel load_model(const std::filesystem::path& path);

/// Throws FingerprintMismatch when the model was trained for another graph.
void check_model_graph(const MlpModel& model, const Graph& graph);

}  // namespace nie

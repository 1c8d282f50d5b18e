// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "whisperconv/alignment.hpp"
#include "whisperconv/spectral.hpp"

namespace whisperconv {

struct DnnHyperparams {
  std::vector<int> hidden_sizes{128, 64, 64, 128};
  double learning_rate = 0.002;
  int batch_size = 2048;
  double l2_lambda = 1e-5;
  int epochs = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Feed-forward network: ReLU on every hidden layer, linear output layer.
struct Mlp {
  std::vector<DenseLayer> layers;

  /// He-style uniform init, U(-sqrt(6 / fan_in), sqrt(6 / fan_in)); zero biases.
  static Mlp initialize(const std::vector<int>& sizes, std::mt19937_64& rng);
  std::vector<int> sizes() const;
  int input_size() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers.back().weight.rows()); }
  /// Rows are samples.
  Matrix forward(const Matrix& x) const;
  bool all_finite() const;
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
  double mse = 0.0;      // mean over samples and outputs
  double penalty = 0.0;  // lambda * sum of squared weights (biases excluded)
  double loss() const { return mse + penalty; }
};

/// Analytic gradients of mse + l2_lambda * ||W||^2.
MlpGradients backprop_gradients(const Mlp& net, const Matrix& x, const Matrix& y, double l2_lambda);

class AdamOptimizer {
 public:
  AdamOptimizer(const Mlp& shape, double learning_rate, double beta1, double beta2, double eps);
  void step(Mlp& net, const MlpGradients& grads);
  int steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<DenseLayer> m_, v_;
};

struct DnnModel {
  Mlp net;
  Vector in_mean, in_std, out_mean, out_std;
  AnalysisConfig config;
  std::string trained_on;

  void validate() const;
};

struct DnnTrainReport {
  std::vector<double> train_loss;  // mean normalized MSE over each epoch's batches
  std::vector<double> val_loss;    // normalized MSE on the validation rows
  int best_epoch = -1;
};

/// Z-score statistics come from the training rows only. Mini-batch Adam on
/// normalized MSE plus L2 weight decay; returns the parameters of the epoch
/// with the lowest validation loss (the last epoch when x_val is empty).
DnnModel train_dnn(const Matrix& x, const Matrix& y, const DnnHyperparams& hp, const Matrix& x_val,
                   const Matrix& y_val, DnnTrainReport* report = nullptr);
DnnModel train_dnn(const AlignedPairSet& pairs, const DnnHyperparams& hp, const AlignedPairSet& val,
                   DnnTrainReport* report = nullptr);

/// Frame-wise mapping: normalize, forward, de-normalize.
Matrix convert_frames(const DnnModel& model, const Matrix& frames);
Cepstrogram convert_dnn(const DnnModel& model, const Cepstrogram& src);

/// DNNV file: "DNNV", u32 version, u32 layer count L, L+1 u32 sizes, per layer
/// weight (row-major) then bias as float32 LE, then in/out mean/std float32,
/// then the analysis config and trained_on descriptor.
inline constexpr std::uint32_t kDnnFormatVersion = 1;
void save_dnn(const DnnModel& m, const std::filesystem::path& path);
DnnModel load_dnn(const std::filesystem::path& path);

}  // namespace whisperconv

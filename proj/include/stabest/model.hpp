#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stabest/types.hpp"

// From-scratch 1D CNN regressor. Default head: three strided valid
// convolutions with ReLU, global average pooling over time, inverted dropout,
// one ReLU hidden layer, and a sigmoid output in (0, 1). All math runs in
// double; checkpoints store weights as little-endian float32 blobs.

namespace stabest {

struct ConvSpec {
  int in_channels = 0, out_channels = 0;
  int kernel = 0, stride = 1;
};

struct ArchitectureSpec {
  int input_channels = DataFrame::kRows;
  int input_length = DataFrame::kCols;
  std::vector<ConvSpec> convs{{8, 16, 5, 2}, {16, 32, 5, 2}, {32, 64, 3, 2}};
  std::vector<int> dense_hidden{32};  // widths between pooling and the scalar output
  double dropout_p = 0.5;

  void validate() const;            // throws ConfigError on inconsistent shapes
  int gap_features() const { return convs.back().out_channels; }
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::uint64_t init_seed = 1, shuffle_seed = 2, dropout_seed = 3;

  void validate() const;
};

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0, count = 0;
};

struct ParamTable {
  std::vector<ParamEntry> entries;
  std::size_t total = 0;
};

// Flat parameter layout: conv weights/biases in order, then dense layers.
ParamTable param_table(const ArchitectureSpec& spec);

struct TrainCurvePoint {
  int epoch = 0;
  double train_mse = 0.0, val_mse = 0.0;
};

struct ModelCheckpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  ArchitectureSpec spec;
  TrainConfig config;
  std::vector<double> params;
  std::vector<TrainCurvePoint> curve;
  std::string provenance_json = "{}";  // config hash, seeds, upstream hashes
};

// Kaiming-uniform fan-in weights (bound sqrt(6/fan_in)), zero biases,
// deterministic in the seed.
ModelCheckpoint init_weights(const ArchitectureSpec& spec, const TrainConfig& cfg,
                             std::uint64_t seed);

// batch holds batch_size samples, each input_channels x input_length
// row-major. Returns one prediction in (0, 1) per sample. In training mode
// dropout masks are drawn deterministically from dropout_seed; eval mode
// ignores the seed and applies no dropout.
std::vector<double> forward(const ModelCheckpoint& ckpt, std::span<const double> batch,
                            int batch_size, bool training, std::uint64_t dropout_seed);

struct Gradients {
  double loss = 0.0;  // batch-mean squared error
  std::vector<double> grads;
  std::vector<double> predictions;
};

// Analytic gradients of the batch-mean squared error, training-mode forward
// (dropout active) with the same mask stream forward() would draw.
Gradients backward(const ModelCheckpoint& ckpt, std::span<const double> batch, int batch_size,
                   std::span<const double> targets, std::uint64_t dropout_seed);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update; increments state.step.
void adam_step(std::span<double> weights, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg);

// Full training loop: seeded shuffling, mini-batches, Adam, per-epoch train
// and validation MSE in the returned curve. No early stopping.
ModelCheckpoint train(const std::vector<ScoredWindow>& train_set,
                      const std::vector<ScoredWindow>& val_set, const ArchitectureSpec& spec,
                      const TrainConfig& cfg);

// Eval-mode predictions for a set of windows.
std::vector<double> predict(const ModelCheckpoint& ckpt, const std::vector<ScoredWindow>& windows);

double mse(std::span<const double> predictions, std::span<const double> targets);

// Single-file container: magic + version, JSON descriptor (architecture,
// train config, tensor table, provenance), float32 weight blob, curve CSV.
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& file);
ModelCheckpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace stabest

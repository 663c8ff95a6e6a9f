#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "altmap/labelgen.hpp"
#include "altmap/nn.hpp"
#include "altmap/raster.hpp"

namespace altmap {

// Landsat variant: in=7 -> 5 SELU -> 3 softmax.
// ASTER variant:   in=9 -> 8 SELU -> 6 SELU -> 3 softmax.
struct MlpSpec {
  int input = 7;
  std::vector<int> hidden{5};
  int output = 3;
};

// conv(32,K) ReLU, dropout 0.25, conv(48,K) ReLU, dropout 0.25, flatten,
// dense 64 ReLU, dropout 0.5, dense 3 softmax. K=7 Landsat, K=5 ASTER.
struct CnnSpec {
  int patch = 15;
  int bands = 7;
  int kernel = 7;
  int filters1 = 32;
  int filters2 = 48;
  int dense = 64;
  int output = 3;
  double dropout_conv = 0.25;
  double dropout_dense = 0.5;
};

struct TrainConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 50;
  int batch_size = 32;
  // Linear learning-rate ramp over this many epochs. Adam's early steps move
  // every weight by ~lr regardless of gradient scale; without a ramp that
  // routinely kills the ReLU stacks at lr 0.01.
  double warmup_epochs = 1.0;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

// Sequential container over nn layers.
class Network {
 public:
  Network() = default;
  static Network make_mlp(const MlpSpec& spec, std::uint64_t seed);
  static Network make_cnn(const CnnSpec& spec, std::uint64_t seed);

  std::vector<double> logits(const nn::Tensor& x, bool train);
  nn::Tensor backward(const std::vector<double>& grad_logits);
  std::vector<nn::Param*> params();
  void zero_grad();
  const std::vector<std::unique_ptr<nn::Layer>>& layers() const { return layers_; }
  void add(std::unique_ptr<nn::Layer> layer) { layers_.push_back(std::move(layer)); }

 private:
  std::vector<std::unique_ptr<nn::Layer>> layers_;
};

struct TrainResult {
  Network net;
  std::vector<EpochStats> history;
  std::vector<double> first_epoch_batch_losses;
};

// Mini-batch Adam with a seeded shuffle per epoch; history records clean
// (dropout-off) train and held-out test accuracy each epoch.
TrainResult train_network(const MlpSpec& spec, const DatasetSplit& split,
                          const TrainConfig& config);
// CNN inputs are patches pulled from the scaled stack at each sample position.
TrainResult train_network(const CnnSpec& spec, const DatasetSplit& split,
                          const RasterStack& scaled_stack, const TrainConfig& config);

nn::Tensor feature_tensor(const std::vector<float>& features);
nn::Tensor patch_tensor(const RasterStack& scaled_stack, int col, int row, int size);

}  // namespace altmap

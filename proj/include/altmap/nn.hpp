#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "altmap/rng.hpp"

namespace altmap::nn {

// Row-major float64 buffer; training math runs in double, raster I/O in float.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<std::size_t>(
                 std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<int>())),
             0.0);
  }
  std::size_t size() const { return v.size(); }
};

// Learnable parameter with its gradient accumulator and Adam moments.
struct Param {
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor adam_v;

  explicit Param(Tensor init)
      : value(std::move(init)), grad(value.shape), m(value.shape), adam_v(value.shape) {}
  void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

// Single-sample forward/backward; backward accumulates into param grads.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  virtual std::string kind() const = 0;
};

class Dense : public Layer {
 public:
  // weights [in,out], bias [out]; y = xW + b
  Dense(int in, int out, Rng& rng, double init_stddev);
  Dense(Tensor weights, Tensor bias);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weights_, &bias_}; }
  std::string kind() const override { return "dense"; }
  int in_features() const { return weights_.value.shape[0]; }
  int out_features() const { return weights_.value.shape[1]; }

 private:
  Param weights_;
  Param bias_;
  Tensor cached_input_;
};

class Conv2d : public Layer {
 public:
  // input [H,W,Cin], weights [K,K,Cin,Cout], valid padding, cross-correlation:
  // y[i,j,o] = sum_{m,n,c} w[m,n,c,o] * x[i+m,j+n,c] + b[o]
  Conv2d(int kernel, int in_channels, int out_channels, Rng& rng, double init_stddev);
  Conv2d(Tensor weights, Tensor bias);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weights_, &bias_}; }
  std::string kind() const override { return "conv2d"; }
  int kernel() const { return weights_.value.shape[0]; }
  int in_channels() const { return weights_.value.shape[2]; }
  int out_channels() const { return weights_.value.shape[3]; }

 private:
  Param weights_;
  Param bias_;
  Tensor cached_input_;
  std::vector<double> cached_cols_;  // im2col of the cached input
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "relu"; }

 private:
  Tensor cached_input_;
};

// Standard published SELU constants.
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluLambda = 1.0507009873554805;

class Selu : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "selu"; }

 private:
  Tensor cached_input_;
};

// Inverted dropout: train mode scales kept activations by 1/(1-rate),
// inference is an exact identity.
class Dropout : public Layer {
 public:
  Dropout(double rate, std::uint64_t seed);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "dropout"; }
  double rate() const { return rate_; }

 private:
  double rate_;
  Rng rng_;
  std::vector<double> mask_;
};

class Flatten : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "flatten"; }

 private:
  std::vector<int> cached_shape_;
};

// 2x2 (or pool x pool) max pooling over [H,W,C], stride == pool.
class MaxPool2d : public Layer {
 public:
  explicit MaxPool2d(int pool);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "maxpool2d"; }

 private:
  int pool_;
  std::vector<int> cached_shape_;
  std::vector<std::size_t> argmax_;
};

std::vector<double> softmax(const std::vector<double>& logits);
double cross_entropy(const std::vector<double>& probs, int target);
// Gradient of cross_entropy(softmax(logits)) w.r.t. logits: softmax - onehot.
std::vector<double> softmax_cross_entropy_grad(const std::vector<double>& logits, int target);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update; t must already be incremented for this step.
void adam_step(std::vector<Param*>& params, const AdamConfig& config, long t);

}  // namespace altmap::nn

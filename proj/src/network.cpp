#include "altmap/network.hpp"

#include <algorithm>
#include <cmath>

#include "altmap/error.hpp"
#include "altmap/preprocess.hpp"

namespace altmap {

using nn::Tensor;

Network Network::make_mlp(const MlpSpec& spec, std::uint64_t seed) {
  require(spec.input >= 1 && spec.output >= 2, "bad MLP spec");
  Rng rng(derive_seed(seed, "mlp-init"));
  Network net;
  int in = spec.input;
  for (int h : spec.hidden) {
    // LeCun-normal init pairs with SELU.
    net.add(std::make_unique<nn::Dense>(in, h, rng, std::sqrt(1.0 / in)));
    net.add(std::make_unique<nn::Selu>());
    in = h;
  }
  net.add(std::make_unique<nn::Dense>(in, spec.output, rng, std::sqrt(1.0 / in)));
  return net;
}

Network Network::make_cnn(const CnnSpec& spec, std::uint64_t seed) {
  const int span = 2 * (spec.kernel - 1) + 1;
  require(spec.patch >= span, "CNN patch size " + std::to_string(spec.patch) +
                                  " too small for two valid convolutions of kernel " +
                                  std::to_string(spec.kernel));
  Rng rng(derive_seed(seed, "cnn-init"));
  Network net;
  const int k = spec.kernel;
  // He-normal init pairs with ReLU.
  const double s1 = std::sqrt(2.0 / (k * k * spec.bands));
  net.add(std::make_unique<nn::Conv2d>(k, spec.bands, spec.filters1, rng, s1));
  net.add(std::make_unique<nn::Relu>());
  net.add(std::make_unique<nn::Dropout>(spec.dropout_conv, derive_seed(seed, "cnn-drop1")));
  const double s2 = std::sqrt(2.0 / (k * k * spec.filters1));
  net.add(std::make_unique<nn::Conv2d>(k, spec.filters1, spec.filters2, rng, s2));
  net.add(std::make_unique<nn::Relu>());
  net.add(std::make_unique<nn::Dropout>(spec.dropout_conv, derive_seed(seed, "cnn-drop2")));
  net.add(std::make_unique<nn::Flatten>());
  const int side = spec.patch - 2 * (k - 1);
  const int flat = side * side * spec.filters2;
  net.add(std::make_unique<nn::Dense>(flat, spec.dense, rng, std::sqrt(2.0 / flat)));
  net.add(std::make_unique<nn::Relu>());
  net.add(std::make_unique<nn::Dropout>(spec.dropout_dense, derive_seed(seed, "cnn-drop3")));
  net.add(std::make_unique<nn::Dense>(spec.dense, spec.output, rng, std::sqrt(2.0 / spec.dense)));
  return net;
}

std::vector<double> Network::logits(const Tensor& x, bool train) {
  Tensor t = x;
  for (auto& layer : layers_) t = layer->forward(t, train);
  return t.v;
}

Tensor Network::backward(const std::vector<double>& grad_logits) {
  Tensor g;
  g.shape = {static_cast<int>(grad_logits.size())};
  g.v = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<nn::Param*> Network::params() {
  std::vector<nn::Param*> out;
  for (auto& layer : layers_)
    for (nn::Param* p : layer->params()) out.push_back(p);
  return out;
}

void Network::zero_grad() {
  for (nn::Param* p : params()) p->zero_grad();
}

Tensor feature_tensor(const std::vector<float>& features) {
  Tensor t({static_cast<int>(features.size())});
  for (std::size_t i = 0; i < features.size(); ++i) t.v[i] = features[i];
  return t;
}

Tensor patch_tensor(const RasterStack& scaled_stack, int col, int row, int size) {
  Patch p = extract_patch(scaled_stack, col, row, size);
  Tensor t({size, size, scaled_stack.bands});
  for (std::size_t i = 0; i < p.values.size(); ++i) t.v[i] = p.values[i];
  return t;
}

namespace {

// Builds the input tensor for sample i; abstracts MLP features vs CNN patches.
struct InputSource {
  const RasterStack* stack = nullptr;  // CNN only
  int patch_size = 0;

  Tensor operator()(const Sample& s) const {
    if (stack) return patch_tensor(*stack, s.col, s.row, patch_size);
    return feature_tensor(s.features);
  }
};

struct EvalStats {
  double loss = 0.0;
  double acc = 0.0;
};

EvalStats evaluate(Network& net, const SampleTable& table, const InputSource& input) {
  EvalStats st;
  if (table.rows.empty()) return st;
  std::size_t correct = 0;
  for (const auto& s : table.rows) {
    const std::vector<double> lg = net.logits(input(s), false);
    const std::vector<double> probs = nn::softmax(lg);
    st.loss += nn::cross_entropy(probs, s.class_label);
    const int pred = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (pred == s.class_label) ++correct;
  }
  st.loss /= static_cast<double>(table.rows.size());
  st.acc = static_cast<double>(correct) / static_cast<double>(table.rows.size());
  return st;
}

TrainResult run_training(Network net, const DatasetSplit& split, const TrainConfig& config,
                         const InputSource& input, int num_classes) {
  require(config.epochs > 0 && config.batch_size > 0, "bad training config");
  require(!split.train.rows.empty(), "empty training set");
  for (const auto& s : split.train.rows)
    require(s.class_label < num_classes, "training label exceeds network output width");

  nn::AdamConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
  std::vector<nn::Param*> params = net.params();
  TrainResult result;
  long t = 0;

  std::vector<std::size_t> order(split.train.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const long batches_per_epoch =
      static_cast<long>((order.size() + config.batch_size - 1) / config.batch_size);
  const long warmup_steps = std::lround(config.warmup_epochs * batches_per_epoch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, "epoch-" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      net.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = split.train.rows[order[i]];
        const std::vector<double> lg = net.logits(input(s), true);
        batch_loss += nn::cross_entropy(nn::softmax(lg), s.class_label);
        std::vector<double> g = nn::softmax_cross_entropy_grad(lg, s.class_label);
        const double scale = 1.0 / static_cast<double>(end - start);
        for (double& x : g) x *= scale;
        net.backward(g);
      }
      ++t;
      nn::AdamConfig step = adam;
      if (t <= warmup_steps)
        step.learning_rate = adam.learning_rate * static_cast<double>(t) /
                             static_cast<double>(warmup_steps);
      nn::adam_step(params, step, t);
      if (epoch == 0)
        result.first_epoch_batch_losses.push_back(batch_loss / static_cast<double>(end - start));
    }
    EpochStats st;
    const EvalStats tr = evaluate(net, split.train, input);
    const EvalStats te = evaluate(net, split.test, input);
    st.train_loss = tr.loss;
    st.train_acc = tr.acc;
    st.test_loss = te.loss;
    st.test_acc = te.acc;
    result.history.push_back(st);
  }
  result.net = std::move(net);
  return result;
}

}  // namespace

TrainResult train_network(const MlpSpec& spec, const DatasetSplit& split,
                          const TrainConfig& config) {
  require(split.train.feature_count() == spec.input,
          "MLP input width does not match feature count");
  return run_training(Network::make_mlp(spec, config.seed), split, config, InputSource{},
                      spec.output);
}

TrainResult train_network(const CnnSpec& spec, const DatasetSplit& split,
                          const RasterStack& scaled_stack, const TrainConfig& config) {
  require(scaled_stack.bands == spec.bands, "CNN band count does not match stack");
  InputSource input{&scaled_stack, spec.patch};
  return run_training(Network::make_cnn(spec, config.seed), split, config, input, spec.output);
}

}  // namespace altmap

#include "altmap/nn.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "altmap/error.hpp"

namespace altmap::nn {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

static Tensor normal_init(std::vector<int> shape, Rng& rng, double stddev) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& x : t.v) x = dist(rng);
  return t;
}

// ---------- Dense ----------

Dense::Dense(int in, int out, Rng& rng, double init_stddev)
    : weights_(normal_init({in, out}, rng, init_stddev)), bias_(Tensor({out})) {}

Dense::Dense(Tensor weights, Tensor bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {}

Tensor Dense::forward(const Tensor& x, bool) {
  const int in = in_features(), out = out_features();
  require(static_cast<int>(x.size()) == in, "dense input size mismatch");
  cached_input_ = x;
  Tensor y({out});
  ConstMatMap xm(x.v.data(), 1, in);
  ConstMatMap wm(weights_.value.v.data(), in, out);
  MatMap ym(y.v.data(), 1, out);
  ym.noalias() = xm * wm;
  for (int o = 0; o < out; ++o) y.v[o] += bias_.value.v[o];
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  const int in = in_features(), out = out_features();
  require(static_cast<int>(grad_out.size()) == out, "dense grad size mismatch");
  ConstMatMap gm(grad_out.v.data(), 1, out);
  ConstMatMap xm(cached_input_.v.data(), 1, in);
  MatMap gw(weights_.grad.v.data(), in, out);
  gw.noalias() += xm.transpose() * gm;
  for (int o = 0; o < out; ++o) bias_.grad.v[o] += grad_out.v[o];
  Tensor gx(cached_input_.shape);
  ConstMatMap wm(weights_.value.v.data(), in, out);
  MatMap gxm(gx.v.data(), 1, in);
  gxm.noalias() = gm * wm.transpose();
  return gx;
}

// ---------- Conv2d ----------

Conv2d::Conv2d(int kernel, int in_channels, int out_channels, Rng& rng, double init_stddev)
    : weights_(normal_init({kernel, kernel, in_channels, out_channels}, rng, init_stddev)),
      bias_(Tensor({out_channels})) {}

Conv2d::Conv2d(Tensor weights, Tensor bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {}

// im2col row r = (i*OW + j), column c = ((m*K + n)*Cin + ch) holds x[i+m, j+n, ch];
// the weight tensor [K,K,Cin,Cout] flattens row-major to exactly that column order.
static void im2col(const Tensor& x, int K, std::vector<double>& cols) {
  const int H = x.shape[0], W = x.shape[1], C = x.shape[2];
  const int OH = H - K + 1, OW = W - K + 1;
  cols.resize(static_cast<std::size_t>(OH) * OW * K * K * C);
  std::size_t idx = 0;
  for (int i = 0; i < OH; ++i)
    for (int j = 0; j < OW; ++j)
      for (int m = 0; m < K; ++m) {
        const double* src = &x.v[(static_cast<std::size_t>(i + m) * W + j) * C];
        std::copy_n(src, static_cast<std::size_t>(K) * C, &cols[idx]);
        idx += static_cast<std::size_t>(K) * C;
      }
}

Tensor Conv2d::forward(const Tensor& x, bool) {
  require(x.shape.size() == 3, "conv2d expects an H x W x C input");
  const int K = kernel(), Cin = in_channels(), Cout = out_channels();
  const int H = x.shape[0], W = x.shape[1];
  require(x.shape[2] == Cin, "conv2d channel mismatch");
  require(H >= K && W >= K, "conv2d input smaller than kernel");
  cached_input_ = x;
  im2col(x, K, cached_cols_);

  const int OH = H - K + 1, OW = W - K + 1;
  const int patch = K * K * Cin;
  Tensor y({OH, OW, Cout});
  ConstMatMap cols(cached_cols_.data(), OH * OW, patch);
  ConstMatMap wm(weights_.value.v.data(), patch, Cout);
  MatMap ym(y.v.data(), OH * OW, Cout);
  ym.noalias() = cols * wm;
  for (int p = 0; p < OH * OW; ++p)
    for (int o = 0; o < Cout; ++o) y.v[static_cast<std::size_t>(p) * Cout + o] += bias_.value.v[o];
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const int K = kernel(), Cin = in_channels(), Cout = out_channels();
  const int H = cached_input_.shape[0], W = cached_input_.shape[1];
  const int OH = H - K + 1, OW = W - K + 1;
  require(grad_out.shape == std::vector<int>({OH, OW, Cout}), "conv2d grad shape mismatch");
  const int patch = K * K * Cin;

  ConstMatMap gm(grad_out.v.data(), OH * OW, Cout);
  ConstMatMap cols(cached_cols_.data(), OH * OW, patch);
  MatMap gw(weights_.grad.v.data(), patch, Cout);
  gw.noalias() += cols.transpose() * gm;
  for (int p = 0; p < OH * OW; ++p)
    for (int o = 0; o < Cout; ++o)
      bias_.grad.v[o] += grad_out.v[static_cast<std::size_t>(p) * Cout + o];

  // grad wrt input: scatter grad_cols back through the im2col mapping.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gcols =
      gm * ConstMatMap(weights_.value.v.data(), patch, Cout).transpose();
  Tensor gx(cached_input_.shape);
  for (int i = 0; i < OH; ++i)
    for (int j = 0; j < OW; ++j) {
      const double* grow = gcols.data() + (static_cast<std::size_t>(i) * OW + j) * patch;
      for (int m = 0; m < K; ++m) {
        double* dst = &gx.v[(static_cast<std::size_t>(i + m) * W + j) * Cin];
        const double* src = grow + static_cast<std::size_t>(m) * K * Cin;
        for (int t = 0; t < K * Cin; ++t) dst[t] += src[t];
      }
    }
  return gx;
}

// ---------- Activations ----------

Tensor Relu::forward(const Tensor& x, bool) {
  cached_input_ = x;
  Tensor y = x;
  for (double& v : y.v) v = std::max(0.0, v);
  return y;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor gx = grad_out;
  for (std::size_t i = 0; i < gx.size(); ++i)
    if (cached_input_.v[i] <= 0.0) gx.v[i] = 0.0;
  return gx;
}

Tensor Selu::forward(const Tensor& x, bool) {
  cached_input_ = x;
  Tensor y = x;
  for (double& v : y.v)
    v = v > 0.0 ? kSeluLambda * v : kSeluLambda * kSeluAlpha * (std::exp(v) - 1.0);
  return y;
}

Tensor Selu::backward(const Tensor& grad_out) {
  Tensor gx = grad_out;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double x = cached_input_.v[i];
    gx.v[i] *= x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
  }
  return gx;
}

// ---------- Dropout ----------

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  require(rate >= 0.0 && rate < 1.0, "dropout rate must be in [0,1)");
}

Tensor Dropout::forward(const Tensor& x, bool train) {
  if (!train || rate_ == 0.0) {
    mask_.assign(x.size(), 1.0);
    return x;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double scale = 1.0 / (1.0 - rate_);
  mask_.resize(x.size());
  Tensor y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = u(rng_) < rate_ ? 0.0 : scale;
    y.v[i] *= mask_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  Tensor gx = grad_out;
  for (std::size_t i = 0; i < gx.size(); ++i) gx.v[i] *= mask_[i];
  return gx;
}

// ---------- Flatten ----------

Tensor Flatten::forward(const Tensor& x, bool) {
  cached_shape_ = x.shape;
  Tensor y = x;
  y.shape = {static_cast<int>(x.size())};
  return y;
}

Tensor Flatten::backward(const Tensor& grad_out) {
  Tensor gx = grad_out;
  gx.shape = cached_shape_;
  return gx;
}

// ---------- MaxPool2d ----------

MaxPool2d::MaxPool2d(int pool) : pool_(pool) { require(pool >= 1, "pool size must be >= 1"); }

Tensor MaxPool2d::forward(const Tensor& x, bool) {
  require(x.shape.size() == 3, "maxpool expects an H x W x C input");
  const int H = x.shape[0], W = x.shape[1], C = x.shape[2];
  const int OH = H / pool_, OW = W / pool_;
  require(OH >= 1 && OW >= 1, "maxpool input smaller than pool window");
  cached_shape_ = x.shape;
  Tensor y({OH, OW, C});
  argmax_.resize(y.size());
  for (int i = 0; i < OH; ++i)
    for (int j = 0; j < OW; ++j)
      for (int c = 0; c < C; ++c) {
        double best = -1e300;
        std::size_t bi = 0;
        for (int m = 0; m < pool_; ++m)
          for (int n = 0; n < pool_; ++n) {
            const std::size_t idx =
                (static_cast<std::size_t>(i * pool_ + m) * W + (j * pool_ + n)) * C + c;
            if (x.v[idx] > best) { best = x.v[idx]; bi = idx; }
          }
        const std::size_t oi = (static_cast<std::size_t>(i) * OW + j) * C + c;
        y.v[oi] = best;
        argmax_[oi] = bi;
      }
  return y;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
  Tensor gx(cached_shape_);
  for (std::size_t oi = 0; oi < grad_out.size(); ++oi) gx.v[argmax_[oi]] += grad_out.v[oi];
  return gx;
}

// ---------- Losses ----------

std::vector<double> softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

double cross_entropy(const std::vector<double>& probs, int target) {
  require(target >= 0 && target < static_cast<int>(probs.size()), "target out of range");
  return -std::log(std::max(probs[target], 1e-12));
}

std::vector<double> softmax_cross_entropy_grad(const std::vector<double>& logits, int target) {
  std::vector<double> g = softmax(logits);
  g[target] -= 1.0;
  return g;
}

// ---------- Adam ----------

void adam_step(std::vector<Param*>& params, const AdamConfig& config, long t) {
  require(t >= 1, "Adam step counter must be >= 1");
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad.v[i];
      require(std::isfinite(g), "non-finite gradient in Adam step");
      p->m.v[i] = config.beta1 * p->m.v[i] + (1.0 - config.beta1) * g;
      p->adam_v.v[i] = config.beta2 * p->adam_v.v[i] + (1.0 - config.beta2) * g * g;
      const double mhat = p->m.v[i] / bc1;
      const double vhat = p->adam_v.v[i] / bc2;
      p->value.v[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

}  // namespace altmap::nn

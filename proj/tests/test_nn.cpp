#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "altmap/nn.hpp"
#include "altmap/rng.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace altmap;
using namespace altmap::nn;
using gradcheck::check_stack;
using gradcheck::random_tensor;

TEST_CASE("dense forward is xW + b on a hand example") {
  Tensor w({2, 2});
  w.v = {1.0, 2.0, 3.0, 4.0};  // row-major [in,out]
  Tensor b({2});
  b.v = {0.5, -0.5};
  Dense layer(w, b);
  Tensor x({2});
  x.v = {1.0, -1.0};
  Tensor y = layer.forward(x, false);
  CHECK(y.v[0] == doctest::Approx(1.0 * 1 + (-1.0) * 3 + 0.5));
  CHECK(y.v[1] == doctest::Approx(1.0 * 2 + (-1.0) * 4 - 0.5));
}

TEST_CASE("dense gradients match central finite differences") {
  Rng rng(11);
  for (auto [in, out] : {std::pair{1, 1}, std::pair{3, 2}, std::pair{7, 5}}) {
    Dense layer(in, out, rng, 0.5);
    auto res = check_stack({&layer}, random_tensor({in}, rng), rng);
    CHECK(res.max_rel_err <= 1e-5);
  }
}

TEST_CASE("conv2d matches a naive six-loop convolution") {
  Rng rng(21);
  for (auto [h, w, cin, cout, k] :
       {std::tuple{5, 5, 1, 1, 3}, std::tuple{7, 6, 3, 4, 3}, std::tuple{9, 9, 2, 3, 5}}) {
    Conv2d layer(k, cin, cout, rng, 0.3);
    Tensor x = random_tensor({h, w, cin}, rng);
    Tensor y = layer.forward(x, false);
    const Tensor& wt = layer.params()[0]->value;
    const Tensor& bias = layer.params()[1]->value;
    auto ref = oracles::naive_conv2d(x.v, h, w, cin, wt.v, k, cout, bias.v);
    REQUIRE(y.size() == ref.size());
    CHECK(y.shape == std::vector<int>{h - k + 1, w - k + 1, cout});
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(y.v[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  }
}

TEST_CASE("conv2d gradients match central finite differences") {
  Rng rng(31);
  for (auto [h, w, cin, cout, k] :
       {std::tuple{3, 3, 1, 1, 3}, std::tuple{5, 4, 2, 3, 3}, std::tuple{6, 6, 1, 2, 5}}) {
    Conv2d layer(k, cin, cout, rng, 0.3);
    auto res = check_stack({&layer}, random_tensor({h, w, cin}, rng), rng);
    CHECK(res.max_rel_err <= 1e-5);
  }
}

TEST_CASE("relu and selu gradients match central finite differences") {
  Rng rng(41);
  Relu relu;
  CHECK(check_stack({&relu}, random_tensor({17}, rng), rng).max_rel_err <= 1e-5);
  Selu selu;
  CHECK(check_stack({&selu}, random_tensor({17}, rng), rng).max_rel_err <= 1e-5);
}

TEST_CASE("selu forward uses the published constants") {
  Selu selu;
  Tensor x({2});
  x.v = {1.0, -1.0};
  Tensor y = selu.forward(x, false);
  CHECK(y.v[0] == doctest::Approx(kSeluLambda).epsilon(1e-12));
  CHECK(y.v[1] ==
        doctest::Approx(kSeluLambda * kSeluAlpha * (std::exp(-1.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("maxpool picks window maxima and routes gradients to them") {
  MaxPool2d pool(2);
  Tensor x({2, 2, 1});
  x.v = {1.0, 4.0, 2.0, 3.0};
  Tensor y = pool.forward(x, false);
  REQUIRE(y.size() == 1);
  CHECK(y.v[0] == 4.0);
  Tensor g({1, 1, 1});
  g.v = {2.5};
  Tensor gx = pool.backward(g);
  CHECK(gx.v == std::vector<double>{0.0, 2.5, 0.0, 0.0});
}

TEST_CASE("composite stacks gradient-check end to end") {
  Rng rng(51);
  SUBCASE("mlp-shaped: dense-selu-dense") {
    Dense d1(6, 5, rng, 0.4);
    Selu s;
    Dense d2(5, 3, rng, 0.4);
    CHECK(check_stack({&d1, &s, &d2}, random_tensor({6}, rng), rng).max_rel_err <= 1e-5);
  }
  SUBCASE("cnn-shaped: conv-relu-conv-relu-flatten-dense") {
    Conv2d c1(3, 2, 3, rng, 0.3);
    Relu r1;
    Conv2d c2(3, 3, 2, rng, 0.3);
    Relu r2;
    Flatten f;
    Dense d(2 * 3 * 3, 3, rng, 0.3);
    CHECK(check_stack({&c1, &r1, &c2, &r2, &f, &d}, random_tensor({7, 7, 2}, rng), rng)
              .max_rel_err <= 1e-5);
  }
  SUBCASE("pooling stack: conv-relu-maxpool-flatten-dense") {
    Conv2d c(3, 1, 2, rng, 0.3);
    Relu r;
    MaxPool2d p(2);
    Flatten f;
    Dense d(2 * 2 * 2, 2, rng, 0.3);
    CHECK(check_stack({&c, &r, &p, &f, &d}, random_tensor({6, 6, 1}, rng), rng).max_rel_err <=
          1e-5);
  }
}

TEST_CASE("softmax is a shift-invariant distribution") {
  auto p = softmax({1.0, 2.0, 3.0});
  double sum = 0.0;
  for (double v : p) {
    CHECK(v > 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  auto q = softmax({1001.0, 1002.0, 1003.0});  // must not overflow
  for (int i = 0; i < 3; ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
}

TEST_CASE("cross entropy of a uniform prediction is log(n)") {
  auto p = softmax({0.0, 0.0, 0.0, 0.0});
  CHECK(cross_entropy(p, 2) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("softmax cross-entropy gradient is softmax minus one-hot and matches FD") {
  const std::vector<double> logits{0.3, -1.2, 2.0, 0.1};
  const int target = 1;
  auto g = softmax_cross_entropy_grad(logits, target);
  auto p = softmax(logits);
  for (int i = 0; i < 4; ++i)
    CHECK(g[i] == doctest::Approx(p[i] - (i == target ? 1.0 : 0.0)).epsilon(1e-12));

  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    auto up = logits, down = logits;
    up[i] += h;
    down[i] -= h;
    const double fd =
        (cross_entropy(softmax(up), target) - cross_entropy(softmax(down), target)) / (2 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("dropout: inference is identity, training masks and rescales") {
  Dropout drop(0.5, 7);
  Tensor x({1000});
  for (std::size_t i = 0; i < x.size(); ++i) x.v[i] = 1.0;
  Tensor eval = drop.forward(x, false);
  CHECK(eval.v == x.v);

  Tensor train = drop.forward(x, true);
  int kept = 0;
  for (double v : train.v) {
    CHECK((v == 0.0 || v == doctest::Approx(2.0)));
    kept += v != 0.0;
  }
  CHECK(kept > 400);
  CHECK(kept < 600);

  // backward uses the same mask as the last forward
  Tensor g({1000});
  for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = 3.0;
  Tensor gx = drop.backward(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(gx.v[i] == (train.v[i] == 0.0 ? 0.0 : doctest::Approx(6.0)));
}

TEST_CASE("dropout rate 0 keeps everything in training mode") {
  Dropout drop(0.0, 3);
  Tensor x({16});
  for (std::size_t i = 0; i < x.size(); ++i) x.v[i] = static_cast<double>(i);
  CHECK(drop.forward(x, true).v == x.v);
}

TEST_CASE("adam first step moves each weight by about -lr * sign(gradient)") {
  Tensor w({3});
  w.v = {1.0, -2.0, 0.5};
  Param p(w);
  p.grad.v = {0.4, -0.7, 1e-3};
  std::vector<Param*> params{&p};
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  adam_step(params, cfg, 1);
  // bias-corrected first step: delta = -lr * g/(|g| + eps') ~ -lr * sign(g)
  CHECK(p.value.v[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-4));
  CHECK(p.value.v[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-4));
  CHECK(p.value.v[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-2));
}

TEST_CASE("adam with zero gradient leaves weights unchanged") {
  Param p(Tensor({4}));
  p.value.v = {1.0, 2.0, 3.0, 4.0};
  std::vector<Param*> params{&p};
  adam_step(params, AdamConfig{}, 1);
  CHECK(p.value.v == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("adam rejects non-finite gradients") {
  Param p(Tensor({1}));
  p.grad.v = {std::numeric_limits<double>::quiet_NaN()};
  std::vector<Param*> params{&p};
  CHECK_THROWS(adam_step(params, AdamConfig{}, 1));
}

TEST_CASE("backward accumulates gradients until zero_grad") {
  Rng rng(61);
  Dense layer(3, 2, rng, 0.5);
  Tensor x = random_tensor({3}, rng);
  Tensor g({2});
  g.v = {1.0, -1.0};
  layer.forward(x, true);
  layer.backward(g);
  auto once = layer.params()[0]->grad.v;
  layer.forward(x, true);
  layer.backward(g);
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(layer.params()[0]->grad.v[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
  layer.params()[0]->zero_grad();
  for (double v : layer.params()[0]->grad.v) CHECK(v == 0.0);
}

#pragma once

// Central-finite-difference gradient checking against Layer::backward.
// The scalar loss is a fixed random linear functional of the layer-stack
// output, which exercises every output coordinate at once.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "altmap/nn.hpp"
#include "altmap/rng.hpp"

namespace gradcheck {

using altmap::Rng;
using altmap::nn::Layer;
using altmap::nn::Param;
using altmap::nn::Tensor;

inline double run_loss(std::vector<Layer*>& layers, const Tensor& x,
                       const std::vector<double>& c) {
  Tensor y = x;
  for (Layer* l : layers) y = l->forward(y, false);
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) loss += c[i] * y.v[i];
  return loss;
}

struct CheckResult {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1.0});
  return std::abs(analytic - numeric) / denom;
}

// Checks d(loss)/d(input) and d(loss)/d(params) for the given stack at x.
// `h` is the central-difference step; inputs should sit away from activation
// kinks (callers draw from continuous distributions, which suffices).
inline CheckResult check_stack(std::vector<Layer*> layers, Tensor x, Rng& rng,
                               double h = 1e-6) {
  Tensor y = x;
  for (Layer* l : layers) y = l->forward(y, false);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> c(y.size());
  for (double& ci : c) ci = gauss(rng);

  for (Layer* l : layers)
    for (Param* p : l->params()) p->zero_grad();

  // analytic pass
  Tensor g;
  g.shape = y.shape;
  g.v = c;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = (*it)->backward(g);

  CheckResult result;
  auto compare = [&](double analytic, double* slot) {
    const double keep = *slot;
    *slot = keep + h;
    const double up = run_loss(layers, x, c);
    *slot = keep - h;
    const double down = run_loss(layers, x, c);
    *slot = keep;
    const double numeric = (up - down) / (2.0 * h);
    result.max_rel_err = std::max(result.max_rel_err, rel_err(analytic, numeric));
    ++result.checked;
  };

  for (std::size_t i = 0; i < x.size(); ++i) compare(g.v[i], &x.v[i]);
  for (Layer* l : layers)
    for (Param* p : l->params())
      for (std::size_t i = 0; i < p->value.size(); ++i)
        compare(p->grad.v[i], &p->value.v[i]);
  return result;
}

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double spread = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> gauss(0.0, spread);
  for (double& v : t.v) v = gauss(rng);
  return t;
}

}  // namespace gradcheck

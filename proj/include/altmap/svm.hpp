#pragma once

#include <cstdint>
#include <vector>

#include "altmap/samples.hpp"

namespace altmap {

struct SvmParams {
  double C = 1.0;
  double gamma = 0.0;  // 0 means 1/n_features
  double tol = 1e-3;
  int max_passes = 200;       // consecutive full passes without an update
  int max_iterations = 2000000;
  int train_cap = 20000;      // per binary problem, seeded subsample beyond this
  std::uint64_t seed = 0;
};

// One binary RBF-SVM from the one-vs-one decomposition. coef[i] = alpha_i * y_i
// where y is +1 for class_pos, -1 for class_neg.
struct BinarySvm {
  int class_pos = 0;
  int class_neg = 0;
  std::vector<float> support_vectors;  // nsv x dim row-major
  std::vector<double> coef;
  double bias = 0.0;
};

struct SvmModel {
  int num_classes = 0;
  int dim = 0;
  double gamma = 0.0;
  double C = 1.0;
  std::vector<BinarySvm> machines;  // one per class pair (i<j)
};

SvmModel svm_train(const SampleTable& table, int num_classes, const SvmParams& params);

struct SvmPrediction {
  int class_label = 0;
  std::vector<double> votes;            // per class, normalized to fractions
  std::vector<double> decision_values;  // per machine, f(x)
};

SvmPrediction svm_predict(const SvmModel& model, const std::vector<float>& query);

double rbf_kernel(const float* a, const float* b, int dim, double gamma);

// Exposed for the KKT acceptance checks.
struct BinarySvmDiagnostics {
  std::vector<double> alpha;  // full alpha vector over the training subset
  std::vector<int> y;         // +1/-1 labels
  std::vector<std::vector<float>> x;
  double bias = 0.0;
};

BinarySvmDiagnostics svm_train_binary(const std::vector<std::vector<float>>& x,
                                      const std::vector<int>& y, const SvmParams& params);

}  // namespace altmap

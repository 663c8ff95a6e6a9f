#pragma once

#include <vector>

#include "altmap/samples.hpp"

namespace altmap {

// Training samples kept verbatim; uniform-weight majority vote over the k
// nearest by Euclidean distance. Distance ties break toward the lower training
// index, vote ties toward the lowest class id.
struct KnnModel {
  int k = 5;
  int num_classes = 0;
  int dim = 0;
  std::vector<float> features;  // n x dim row-major
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

KnnModel knn_fit(const SampleTable& table, int k, int num_classes);

struct KnnPrediction {
  int class_label = 0;
  std::vector<double> scores;  // vote fractions per class
};

KnnPrediction knn_predict(const KnnModel& model, const std::vector<float>& query);

}  // namespace altmap

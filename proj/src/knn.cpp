#include "altmap/knn.hpp"

#include <algorithm>
#include <cmath>

#include "altmap/error.hpp"

namespace altmap {

KnnModel knn_fit(const SampleTable& table, int k, int num_classes) {
  table.validate();
  require(!table.rows.empty(), "cannot fit KNN on an empty table");
  require(k >= 1 && k <= static_cast<int>(table.rows.size()), "k must be in [1, n]");
  KnnModel m;
  m.k = k;
  m.num_classes = num_classes;
  m.dim = table.feature_count();
  m.features.reserve(table.rows.size() * m.dim);
  m.labels.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    require(r.class_label < num_classes, "sample class exceeds declared class count");
    m.features.insert(m.features.end(), r.features.begin(), r.features.end());
    m.labels.push_back(r.class_label);
  }
  return m;
}

KnnPrediction knn_predict(const KnnModel& model, const std::vector<float>& query) {
  require(static_cast<int>(query.size()) == model.dim, "KNN query dimension mismatch");
  const int n = model.size();

  // Keep the k best (distance, index) pairs; ties prefer the lower index,
  // which the scan order already guarantees with strict '<' replacement.
  std::vector<std::pair<double, int>> best;
  best.reserve(model.k + 1);
  for (int i = 0; i < n; ++i) {
    const float* f = &model.features[static_cast<std::size_t>(i) * model.dim];
    double d = 0.0;
    for (int j = 0; j < model.dim; ++j) {
      const double diff = static_cast<double>(f[j]) - query[j];
      d += diff * diff;
    }
    const std::pair<double, int> cand(d, i);
    if (static_cast<int>(best.size()) < model.k) {
      best.push_back(cand);
      std::push_heap(best.begin(), best.end());
    } else if (cand < best.front()) {
      std::pop_heap(best.begin(), best.end());
      best.back() = cand;
      std::push_heap(best.begin(), best.end());
    }
  }

  KnnPrediction pred;
  pred.scores.assign(model.num_classes, 0.0);
  for (const auto& [d, i] : best) pred.scores[model.labels[i]] += 1.0 / model.k;
  pred.class_label = 0;
  for (int c = 1; c < model.num_classes; ++c)
    if (pred.scores[c] > pred.scores[pred.class_label]) pred.class_label = c;
  return pred;
}

}  // namespace altmap

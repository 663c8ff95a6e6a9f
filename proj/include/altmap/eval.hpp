#pragma once

#include <string>
#include <utility>
#include <vector>

#include "altmap/model.hpp"
#include "altmap/network.hpp"
#include "altmap/samples.hpp"

namespace altmap {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct EvalReport {
  std::vector<std::vector<long>> confusion;  // [truth][predicted]
  double accuracy = 0.0;
  std::vector<double> f1_per_class;
  double macro_f1 = 0.0;
  std::vector<std::vector<RocPoint>> roc;     // per class, empty if class absent
  std::vector<double> auc_per_class;          // NaN if class absent from truth
  double macro_auc = 0.0;                     // over classes present in truth
  std::vector<int> degenerate_classes;        // absent from truth and predictions

  std::string model_name;
  std::string data_kind;
  std::string label_method;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth,
                                                const std::vector<int>& pred, int num_classes);
double accuracy(const std::vector<std::vector<long>>& confusion);
std::vector<double> f1_per_class(const std::vector<std::vector<long>>& confusion);
double macro_f1(const std::vector<std::vector<long>>& confusion);

// One-vs-rest ROC for class c; thresholds swept over distinct scores with
// equal scores grouped into one step.
std::vector<RocPoint> roc_curve(const std::vector<std::vector<double>>& scores,
                                const std::vector<int>& truth, int c);
double auc(const std::vector<RocPoint>& points);

// Full report from per-sample class scores.
EvalReport evaluate_predictions(const std::vector<int>& truth,
                                const std::vector<std::vector<double>>& scores, int num_classes);

// Accuracy of a (typically PCA-label-trained) model over manually labeled samples.
double ground_truth_accuracy(TrainedModel& model, const SampleTable& gt_samples,
                             const RasterStack* scaled_stack = nullptr);

// CSV: epoch,train_acc,test_acc,train_loss,test_loss
void export_history(const std::vector<EpochStats>& history, const std::string& path);
std::vector<EpochStats> read_history(const std::string& path);

void export_roc_csv(const std::vector<RocPoint>& points, const std::string& path);

}  // namespace altmap

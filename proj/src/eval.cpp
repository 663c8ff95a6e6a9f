#include "altmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "altmap/error.hpp"

namespace altmap {

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth,
                                                const std::vector<int>& pred, int num_classes) {
  require(truth.size() == pred.size(), "truth/prediction length mismatch");
  require(num_classes >= 1, "need at least one class");
  std::vector<std::vector<long>> m(num_classes, std::vector<long>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < num_classes, "truth label out of range");
    require(pred[i] >= 0 && pred[i] < num_classes, "predicted label out of range");
    m[truth[i]][pred[i]]++;
  }
  return m;
}

double accuracy(const std::vector<std::vector<long>>& confusion) {
  long trace = 0, total = 0;
  for (std::size_t i = 0; i < confusion.size(); ++i)
    for (std::size_t j = 0; j < confusion[i].size(); ++j) {
      total += confusion[i][j];
      if (i == j) trace += confusion[i][j];
    }
  require(total > 0, "empty confusion matrix");
  return static_cast<double>(trace) / static_cast<double>(total);
}

std::vector<double> f1_per_class(const std::vector<std::vector<long>>& confusion) {
  const int C = static_cast<int>(confusion.size());
  std::vector<double> f1(C, 0.0);
  for (int c = 0; c < C; ++c) {
    long tp = confusion[c][c], fp = 0, fn = 0;
    for (int k = 0; k < C; ++k) {
      if (k == c) continue;
      fp += confusion[k][c];
      fn += confusion[c][k];
    }
    const double denom = 2.0 * tp + fp + fn;
    f1[c] = denom > 0.0 ? 2.0 * tp / denom : 0.0;  // F1=0 by convention when P+R=0
  }
  return f1;
}

double macro_f1(const std::vector<std::vector<long>>& confusion) {
  const std::vector<double> f1 = f1_per_class(confusion);
  return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
}

std::vector<RocPoint> roc_curve(const std::vector<std::vector<double>>& scores,
                                const std::vector<int>& truth, int c) {
  require(scores.size() == truth.size(), "scores/truth length mismatch");
  long npos = 0, nneg = 0;
  std::vector<std::pair<double, int>> ranked;  // (score for class c, is-positive)
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int pos = truth[i] == c ? 1 : 0;
    pos ? ++npos : ++nneg;
    ranked.emplace_back(scores[i][c], pos);
  }
  require(npos > 0, "class absent from truth: ROC undefined");
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<RocPoint> pts;
  pts.push_back({0.0, 0.0});
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < ranked.size()) {
    const double s = ranked[i].first;
    // Group tied scores into a single threshold step.
    while (i < ranked.size() && ranked[i].first == s) {
      ranked[i].second ? ++tp : ++fp;
      ++i;
    }
    pts.push_back({nneg > 0 ? static_cast<double>(fp) / nneg : 0.0,
                   static_cast<double>(tp) / npos});
  }
  return pts;
}

double auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  return area;
}

EvalReport evaluate_predictions(const std::vector<int>& truth,
                                const std::vector<std::vector<double>>& scores, int num_classes) {
  require(truth.size() == scores.size(), "truth/scores length mismatch");
  std::vector<int> pred(truth.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    require(static_cast<int>(scores[i].size()) == num_classes, "score vector width mismatch");
    pred[i] = static_cast<int>(
        std::max_element(scores[i].begin(), scores[i].end()) - scores[i].begin());
  }

  EvalReport rep;
  rep.confusion = confusion_matrix(truth, pred, num_classes);
  rep.accuracy = accuracy(rep.confusion);
  rep.f1_per_class = f1_per_class(rep.confusion);
  rep.macro_f1 = macro_f1(rep.confusion);

  rep.roc.resize(num_classes);
  rep.auc_per_class.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
  double auc_sum = 0.0;
  int auc_n = 0;
  for (int c = 0; c < num_classes; ++c) {
    const bool in_truth = std::find(truth.begin(), truth.end(), c) != truth.end();
    const bool in_pred = std::find(pred.begin(), pred.end(), c) != pred.end();
    if (!in_truth && !in_pred) rep.degenerate_classes.push_back(c);
    if (!in_truth) continue;
    rep.roc[c] = roc_curve(scores, truth, c);
    rep.auc_per_class[c] = auc(rep.roc[c]);
    auc_sum += rep.auc_per_class[c];
    ++auc_n;
  }
  rep.macro_auc = auc_n > 0 ? auc_sum / auc_n : 0.0;
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["confusion"] = confusion;
  j["accuracy"] = accuracy;
  j["f1_per_class"] = f1_per_class;
  j["macro_f1"] = macro_f1;
  j["auc_per_class"] = nlohmann::json::array();
  for (double a : auc_per_class) {
    if (std::isnan(a)) j["auc_per_class"].push_back(nullptr);
    else j["auc_per_class"].push_back(a);
  }
  j["macro_auc"] = macro_auc;
  j["degenerate_classes"] = degenerate_classes;
  j["roc"] = nlohmann::json::array();
  for (const auto& curve : roc) {
    nlohmann::json cj = nlohmann::json::array();
    for (const auto& p : curve) cj.push_back({p.fpr, p.tpr});
    j["roc"].push_back(cj);
  }
  j["metadata"] = {{"model", model_name},
                   {"data_kind", data_kind},
                   {"label_method", label_method},
                   {"seed", seed}};
  return j.dump(2);
}

double ground_truth_accuracy(TrainedModel& model, const SampleTable& gt_samples,
                             const RasterStack* scaled_stack) {
  require(!gt_samples.rows.empty(), "empty ground-truth sample table");
  std::size_t correct = 0;
  for (const auto& s : gt_samples.rows) {
    if (predict_sample(model, s, scaled_stack).class_label == s.class_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gt_samples.rows.size());
}

void export_history(const std::vector<EpochStats>& history, const std::string& path) {
  require(!history.empty(), "empty training history");
  std::ofstream out(path);
  require(out.good(), "cannot write history CSV: " + path);
  out << "epoch,train_acc,test_acc,train_loss,test_loss\n";
  char buf[48];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t e = 0; e < history.size(); ++e) {
    out << e + 1 << ",";
    put(history[e].train_acc); out << ",";
    put(history[e].test_acc); out << ",";
    put(history[e].train_loss); out << ",";
    put(history[e].test_loss); out << "\n";
  }
  require(out.good(), "failed writing history CSV");
}

std::vector<EpochStats> read_history(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open history CSV: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<EpochStats> history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    EpochStats st;
    std::getline(ss, cell, ',');  // epoch number
    std::getline(ss, cell, ','); st.train_acc = std::stod(cell);
    std::getline(ss, cell, ','); st.test_acc = std::stod(cell);
    std::getline(ss, cell, ','); st.train_loss = std::stod(cell);
    std::getline(ss, cell, ','); st.test_loss = std::stod(cell);
    history.push_back(st);
  }
  return history;
}

void export_roc_csv(const std::vector<RocPoint>& points, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write ROC CSV: " + path);
  out << "fpr,tpr\n";
  char buf[48];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", p.fpr, p.tpr);
    out << buf << "\n";
  }
}

}  // namespace altmap

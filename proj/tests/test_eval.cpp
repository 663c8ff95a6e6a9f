#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "altmap/eval.hpp"
#include "altmap/rng.hpp"
#include "oracles.hpp"

using namespace altmap;
namespace fs = std::filesystem;

namespace {

std::string tmpfile(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "altmap_test_eval";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("confusion matrix counts truth rows and prediction columns") {
  auto cm = confusion_matrix({0, 0, 1, 1, 1}, {0, 1, 1, 1, 0}, 2);
  CHECK(cm[0][0] == 1);
  CHECK(cm[0][1] == 1);
  CHECK(cm[1][0] == 1);
  CHECK(cm[1][1] == 2);
}

TEST_CASE("binary confusion [[50,10],[20,20]] gives accuracy 0.70 and F1_0 ~ 0.7692") {
  std::vector<std::vector<long>> cm{{50, 10}, {20, 20}};
  CHECK(accuracy(cm) == doctest::Approx(0.70));
  auto f1 = f1_per_class(cm);
  CHECK(f1[0] == doctest::Approx(50.0 / 65.0).epsilon(1e-9));  // P=50/70, R=50/60
  CHECK(f1[1] == doctest::Approx(40.0 / 70.0).epsilon(1e-9));  // P=20/30, R=20/40
  CHECK(macro_f1(cm) == doctest::Approx(0.5 * (50.0 / 65.0 + 40.0 / 70.0)).epsilon(1e-9));
}

TEST_CASE("perfect predictions give accuracy and macro-F1 of 1") {
  std::vector<int> truth{0, 1, 2, 0, 1, 2};
  auto cm = confusion_matrix(truth, truth, 3);
  CHECK(accuracy(cm) == 1.0);
  CHECK(macro_f1(cm) == 1.0);
}

TEST_CASE("class absent from truth and predictions contributes F1 0 by convention") {
  auto cm = confusion_matrix({0, 0, 1}, {0, 0, 1}, 3);
  auto f1 = f1_per_class(cm);
  CHECK(f1[2] == 0.0);
}

TEST_CASE("hand-worked ROC example has AUC 8/9") {
  // scores for the positive class; truth marks the first three as positive
  std::vector<std::vector<double>> scores;
  for (double s : {0.9, 0.8, 0.4, 0.6, 0.3, 0.1}) scores.push_back({1.0 - s, s});
  std::vector<int> truth{1, 1, 1, 0, 0, 0};
  auto curve = roc_curve(scores, truth, 1);
  CHECK(auc(curve) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(curve.front().fpr == 0.0);
  CHECK(curve.front().tpr == 0.0);
  CHECK(curve.back().fpr == 1.0);
  CHECK(curve.back().tpr == 1.0);
}

TEST_CASE("ROC is monotone and ties are grouped into single steps") {
  std::vector<std::vector<double>> scores;
  for (double s : {0.5, 0.5, 0.5, 0.2, 0.2}) scores.push_back({1.0 - s, s});
  std::vector<int> truth{1, 0, 1, 0, 1};
  auto curve = roc_curve(scores, truth, 1);
  // distinct thresholds: 0.5, 0.2 -> exactly 3 points including the origin
  CHECK(curve.size() == 3);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].fpr >= curve[i - 1].fpr);
    CHECK(curve[i].tpr >= curve[i - 1].tpr);
  }
  // tied scores count half via trapezoids; matches the pair statistic
  std::vector<double> flat;
  std::vector<int> pos;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    flat.push_back(scores[i][1]);
    pos.push_back(truth[i] == 1);
  }
  CHECK(auc(curve) == doctest::Approx(oracles::mann_whitney_auc(flat, pos)).epsilon(1e-12));
}

TEST_CASE("property: trapezoid AUC equals the Mann-Whitney statistic") {
  Rng rng(3);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 4);
  std::bernoulli_distribution is_pos(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 60);
    std::vector<std::vector<double>> scores;
    std::vector<int> truth;
    std::vector<double> flat;
    std::vector<int> pos;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // every other trial uses a coarse grid to force ties
      const double s = trial % 2 == 0 ? val(rng) : coarse(rng) / 4.0;
      const int t = is_pos(rng) ? 1 : 0;
      scores.push_back({1.0 - s, s});
      truth.push_back(t);
      flat.push_back(s);
      pos.push_back(t);
      (t ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(std::abs(auc(roc_curve(scores, truth, 1)) -
                   oracles::mann_whitney_auc(flat, pos)) <= 1e-9);
  }
}

TEST_CASE("evaluate_predictions assembles the full report") {
  std::vector<int> truth{0, 0, 1, 1, 2, 2};
  std::vector<std::vector<double>> scores{{0.8, 0.1, 0.1}, {0.6, 0.3, 0.1}, {0.2, 0.7, 0.1},
                                          {0.5, 0.4, 0.1}, {0.1, 0.2, 0.7}, {0.3, 0.3, 0.4}};
  EvalReport rep = evaluate_predictions(truth, scores, 3);
  CHECK(rep.confusion[0][0] == 2);
  CHECK(rep.confusion[1][0] == 1);
  CHECK(rep.accuracy == doctest::Approx(5.0 / 6.0));
  CHECK(rep.roc.size() == 3);
  CHECK(rep.auc_per_class.size() == 3);
  CHECK(rep.degenerate_classes.empty());
  for (double a : rep.auc_per_class) CHECK(std::isfinite(a));
}

TEST_CASE("class absent from truth yields NaN AUC, is listed degenerate, JSON says null") {
  std::vector<int> truth{0, 0, 1, 1};
  std::vector<std::vector<double>> scores{
      {0.8, 0.1, 0.1}, {0.7, 0.2, 0.1}, {0.2, 0.7, 0.1}, {0.1, 0.8, 0.1}};
  EvalReport rep = evaluate_predictions(truth, scores, 3);
  CHECK(std::isnan(rep.auc_per_class[2]));
  CHECK(rep.degenerate_classes == std::vector<int>{2});
  CHECK(std::isfinite(rep.macro_auc));
  auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("auc_per_class")[2].is_null());
  CHECK(j.at("accuracy").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("training history CSV round-trips") {
  std::vector<EpochStats> hist{{1.25, 0.5, 1.5, 0.4},
                               {0.75, 0.875, 1.0, 0.8125},
                               {0.123456789012345, 0.9, 0.2, 0.85}};
  const std::string path = tmpfile("history.csv");
  export_history(hist, path);
  auto back = read_history(path);
  REQUIRE(back.size() == hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    CHECK(back[i].train_loss == hist[i].train_loss);
    CHECK(back[i].train_acc == hist[i].train_acc);
    CHECK(back[i].test_loss == hist[i].test_loss);
    CHECK(back[i].test_acc == hist[i].test_acc);
  }
}

TEST_CASE("ROC CSV export writes one line per point plus header") {
  std::vector<RocPoint> pts{{0.0, 0.0}, {0.25, 0.75}, {1.0, 1.0}};
  const std::string path = tmpfile("roc.csv");
  export_roc_csv(pts, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 4);
}

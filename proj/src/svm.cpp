#include "altmap/svm.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <unordered_map>

#include "altmap/error.hpp"
#include "altmap/rng.hpp"

namespace altmap {

double rbf_kernel(const float* a, const float* b, int dim, double gamma) {
  double d = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double diff = static_cast<double>(a[j]) - b[j];
    d += diff * diff;
  }
  return std::exp(-gamma * d);
}

namespace {

// SMO working set for one binary problem, with an LRU kernel-row cache.
class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
            double C, double gamma, double tol, std::uint64_t seed)
      : x_(x), y_(y), n_(static_cast<int>(x.size())), dim_(static_cast<int>(x[0].size())),
        C_(C), gamma_(gamma), tol_(tol), rng_(seed) {
    alpha_.assign(n_, 0.0);
    error_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) error_[i] = -y_[i];  // f=0 initially
    cache_capacity_ = std::max<std::size_t>(64, (256u << 20) / (sizeof(double) * n_));
  }

  // Platt-style SMO; alternates full sweeps over all points with sweeps over
  // non-bound points, and stops when a full sweep moves no multiplier.
  void solve(int max_passes, long max_iterations) {
    long iters = 0;
    int full_sweeps = 0;
    bool examine_all = true;
    while (true) {
      int changed = 0;
      if (examine_all) {
        ++full_sweeps;
        for (int i = 0; i < n_; ++i) changed += examine(i);
      } else {
        for (int i = 0; i < n_; ++i)
          if (alpha_[i] > 0.0 && alpha_[i] < C_) changed += examine(i);
      }
      iters += n_;
      if (full_sweeps > max_passes || iters > max_iterations)
        throw Error("SMO did not converge (" + std::to_string(full_sweeps) + " full sweeps, " +
                    std::to_string(iters) + " examinations; last sweep changed " +
                    std::to_string(changed) + " multipliers)");
      if (examine_all) {
        if (changed == 0) break;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return bias_; }

 private:
  const std::vector<double>& kernel_row(int i) {
    auto it = cache_.find(i);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    if (cache_.size() >= cache_capacity_) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
    std::vector<double> row(n_);
    for (int j = 0; j < n_; ++j) row[j] = rbf_kernel(x_[i].data(), x_[j].data(), dim_, gamma_);
    lru_.push_front(i);
    auto [pos, ok] = cache_.emplace(i, std::make_pair(std::move(row), lru_.begin()));
    return pos->second.first;
  }

  int examine(int i2) {
    const double e2 = error_[i2];
    const double r2 = e2 * y_[i2];
    const bool violates = (r2 < -tol_ && alpha_[i2] < C_) || (r2 > tol_ && alpha_[i2] > 0.0);
    if (!violates) return 0;

    // Second-choice heuristic: maximize |E1 - E2| over non-bound points.
    int best = -1;
    double best_gap = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (alpha_[i] <= 0.0 || alpha_[i] >= C_) continue;
      const double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) { best_gap = gap; best = i; }
    }
    if (best >= 0 && take_step(best, i2)) return 1;

    const int start = static_cast<int>(rng_() % n_);
    for (int k = 0; k < n_; ++k) {
      const int i1 = (start + k) % n_;
      if (alpha_[i1] > 0.0 && alpha_[i1] < C_ && take_step(i1, i2)) return 1;
    }
    for (int k = 0; k < n_; ++k) {
      const int i1 = (start + k) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    const double a1_old = alpha_[i1], a2_old = alpha_[i2];
    const int y1 = y_[i1], y2 = y_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(C_, C_ + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - C_);
      hi = std::min(C_, a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const std::vector<double> row1 = kernel_row(i1);  // copy: row2 lookup may evict
    const std::vector<double>& row2 = kernel_row(i2);
    const double k11 = row1[i1], k22 = row2[i2], k12 = row1[i2];
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > 1e-15) {
      a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Degenerate curvature: evaluate the objective at both clip ends.
      const double f1 = y1 * e1 - a1_old * k11 - s * a2_old * k12;
      const double f2 = y2 * e2 - a2_old * k22 - s * a1_old * k12;
      const double l1 = a1_old + s * (a2_old - lo);
      const double h1 = a1_old + s * (a2_old - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - 1e-12) a2 = lo;
      else if (obj_lo > obj_hi + 1e-12) a2 = hi;
      else return false;
    }
    if (std::abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;

    // snap to the box to keep roundoff from leaving multipliers at -1e-17
    if (a2 < 1e-10) a2 = 0.0;
    else if (a2 > C_ - 1e-10) a2 = C_;
    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < 1e-10) a1 = 0.0;
    else if (a1 > C_ - 1e-10) a1 = C_;
    const double da1 = a1 - a1_old, da2 = a2 - a2_old;

    const double b_old = bias_;
    const double b1 = bias_ - e1 - y1 * da1 * k11 - y2 * da2 * k12;
    const double b2 = bias_ - e2 - y1 * da1 * k12 - y2 * da2 * k22;
    if (a1 > 0.0 && a1 < C_) bias_ = b1;
    else if (a2 > 0.0 && a2 < C_) bias_ = b2;
    else bias_ = 0.5 * (b1 + b2);

    alpha_[i1] = a1;
    alpha_[i2] = a2;
    const double db = bias_ - b_old;
    for (int k = 0; k < n_; ++k)
      error_[k] += y1 * da1 * row1[k] + y2 * da2 * row2[k] + db;
    return true;
  }

  const std::vector<std::vector<float>>& x_;
  const std::vector<int>& y_;
  int n_, dim_;
  double C_, gamma_, tol_;
  Rng rng_;
  std::vector<double> alpha_;
  std::vector<double> error_;  // f(x_i) - y_i
  double bias_ = 0.0;
  std::size_t cache_capacity_;
  std::list<int> lru_;
  std::unordered_map<int, std::pair<std::vector<double>, std::list<int>::iterator>> cache_;
};

}  // namespace

BinarySvmDiagnostics svm_train_binary(const std::vector<std::vector<float>>& x,
                                      const std::vector<int>& y, const SvmParams& params) {
  require(!x.empty(), "empty binary SVM problem");
  bool has_pos = false, has_neg = false;
  for (int v : y) (v > 0 ? has_pos : has_neg) = true;
  require(has_pos && has_neg, "binary SVM problem contains a single class");

  const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(x[0].size());
  SmoSolver solver(x, y, params.C, gamma, params.tol, derive_seed(params.seed, "smo"));
  solver.solve(params.max_passes, params.max_iterations);

  BinarySvmDiagnostics diag;
  diag.alpha = solver.alpha();
  diag.y = y;
  diag.x = x;
  diag.bias = solver.bias();
  return diag;
}

SvmModel svm_train(const SampleTable& table, int num_classes, const SvmParams& params) {
  table.validate();
  require(num_classes >= 2, "SVM needs at least 2 classes");
  SvmModel model;
  model.num_classes = num_classes;
  model.dim = table.feature_count();
  model.C = params.C;
  model.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(model.dim);

  for (int a = 0; a < num_classes; ++a) {
    for (int b = a + 1; b < num_classes; ++b) {
      std::vector<std::vector<float>> x;
      std::vector<int> y;
      for (const auto& r : table.rows) {
        if (r.class_label == a) { x.push_back(r.features); y.push_back(+1); }
        else if (r.class_label == b) { x.push_back(r.features); y.push_back(-1); }
      }
      require(std::count(y.begin(), y.end(), +1) > 0 && std::count(y.begin(), y.end(), -1) > 0,
              "class pair (" + std::to_string(a) + "," + std::to_string(b) +
                  ") lacks samples of both classes");
      if (static_cast<int>(x.size()) > params.train_cap) {
        std::vector<std::size_t> idx(x.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        Rng rng(derive_seed(params.seed, "svm-subsample-" + std::to_string(a) + "-" + std::to_string(b)));
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(params.train_cap);
        std::sort(idx.begin(), idx.end());
        std::vector<std::vector<float>> xs;
        std::vector<int> ys;
        for (std::size_t i : idx) { xs.push_back(std::move(x[i])); ys.push_back(y[i]); }
        x = std::move(xs);
        y = std::move(ys);
      }

      SvmParams p = params;
      p.gamma = model.gamma;
      BinarySvmDiagnostics diag = svm_train_binary(x, y, p);

      BinarySvm bin;
      bin.class_pos = a;
      bin.class_neg = b;
      bin.bias = diag.bias;
      for (std::size_t i = 0; i < diag.alpha.size(); ++i) {
        if (diag.alpha[i] <= 0.0) continue;
        bin.support_vectors.insert(bin.support_vectors.end(), x[i].begin(), x[i].end());
        bin.coef.push_back(diag.alpha[i] * y[i]);
      }
      model.machines.push_back(std::move(bin));
    }
  }
  return model;
}

SvmPrediction svm_predict(const SvmModel& model, const std::vector<float>& query) {
  require(static_cast<int>(query.size()) == model.dim, "SVM query dimension mismatch");
  SvmPrediction pred;
  pred.votes.assign(model.num_classes, 0.0);
  std::vector<double> decision_sum(model.num_classes, 0.0);
  for (const auto& bin : model.machines) {
    double f = bin.bias;
    const int nsv = static_cast<int>(bin.coef.size());
    for (int i = 0; i < nsv; ++i)
      f += bin.coef[i] *
           rbf_kernel(&bin.support_vectors[static_cast<std::size_t>(i) * model.dim], query.data(),
                      model.dim, model.gamma);
    pred.decision_values.push_back(f);
    pred.votes[f > 0.0 ? bin.class_pos : bin.class_neg] += 1.0;
    decision_sum[bin.class_pos] += f;
    decision_sum[bin.class_neg] -= f;
  }
  pred.class_label = 0;
  for (int c = 1; c < model.num_classes; ++c) {
    if (pred.votes[c] > pred.votes[pred.class_label] ||
        (pred.votes[c] == pred.votes[pred.class_label] &&
         decision_sum[c] > decision_sum[pred.class_label]))
      pred.class_label = c;
  }
  const double total = model.machines.empty() ? 1.0 : static_cast<double>(model.machines.size());
  for (double& v : pred.votes) v /= total;
  return pred;
}

}  // namespace altmap

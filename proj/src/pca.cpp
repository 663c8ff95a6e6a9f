#include "altmap/pca.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "altmap/error.hpp"

namespace altmap {

PcaResult pca(const RasterStack& stack, const std::vector<int>& band_subset) {
  const int d = static_cast<int>(band_subset.size());
  require(d >= 2, "PCA needs at least 2 bands");
  std::set<int> seen;
  for (int b : band_subset) {
    require(b >= 0 && b < stack.bands, "PCA band index out of range");
    require(seen.insert(b).second, "duplicate band in PCA subset");
  }

  const std::size_t plane = static_cast<std::size_t>(stack.width) * stack.height;
  std::vector<std::size_t> valid;
  valid.reserve(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    bool ok = true;
    for (int b : band_subset)
      if (stack.is_nodata(stack.data[b * plane + i])) { ok = false; break; }
    if (ok) valid.push_back(i);
  }
  require(valid.size() > static_cast<std::size_t>(d), "not enough non-nodata pixels for PCA");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t i : valid)
    for (int j = 0; j < d; ++j) mean[j] += stack.data[band_subset[j] * plane + i];
  mean /= static_cast<double>(valid.size());

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd x(d);
  for (std::size_t i : valid) {
    for (int j = 0; j < d; ++j) x[j] = stack.data[band_subset[j] * plane + i] - mean[j];
    cov.noalias() += x * x.transpose();
  }
  cov /= static_cast<double>(valid.size());
  require(cov.trace() > 0.0, "degenerate PCA input: zero variance in every band");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");

  PcaResult res;
  res.band_subset = band_subset;
  res.eigenvalues.resize(d);
  res.loadings.assign(d, std::vector<double>(d));
  // Eigen returns ascending eigenvalues; flip to descending and fix signs.
  Eigen::MatrixXd vecs(d, d);
  for (int k = 0; k < d; ++k) {
    const int src = d - 1 - k;
    res.eigenvalues[k] = std::max(0.0, solver.eigenvalues()[src]);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    int imax = 0;
    for (int j = 1; j < d; ++j)
      if (std::abs(v[j]) > std::abs(v[imax])) imax = j;
    if (v[imax] < 0.0) v = -v;
    vecs.col(k) = v;
    for (int j = 0; j < d; ++j) res.loadings[k][j] = v[j];
  }

  res.scores.width = stack.width;
  res.scores.height = stack.height;
  res.scores.bands = d;
  res.scores.transform = stack.transform;
  res.scores.crs = stack.crs;
  if (stack.nodata) res.scores.nodata = stack.nodata;
  res.scores.data.assign(plane * d, stack.nodata.value_or(0.0f));
  if (!stack.nodata)
    std::fill(res.scores.data.begin(), res.scores.data.end(), 0.0f);
  for (std::size_t i : valid) {
    for (int j = 0; j < d; ++j) x[j] = stack.data[band_subset[j] * plane + i] - mean[j];
    Eigen::VectorXd proj = vecs.transpose() * x;
    for (int k = 0; k < d; ++k) res.scores.data[k * plane + i] = static_cast<float>(proj[k]);
  }
  return res;
}

std::pair<int, int> select_component(const PcaResult& result, const SpectralSignature& sig) {
  const int d = static_cast<int>(result.loadings.size());
  require(static_cast<int>(sig.size()) == d, "signature length must match PCA band subset");
  bool any = false;
  for (int s : sig) any = any || s != 0;
  require(any, "all-zero spectral signature");

  int best_k = 0, best_s = 1;
  double best = -1e300;
  for (int k = 0; k < d; ++k) {
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += sig[j] * result.loadings[k][j];
    for (int s : {+1, -1}) {
      const double score = s * dot;
      if (score > best + 1e-12) {
        best = score;
        best_k = k;
        best_s = s;
      }
    }
  }
  return {best_k, best_s};
}

ClassMap threshold_component(const PcaResult& result, int component, int polarity, double k) {
  require(component >= 0 && component < result.scores.bands, "component index out of range");
  require(polarity == 1 || polarity == -1, "polarity must be +1 or -1");

  const RasterStack& sc = result.scores;
  const std::size_t plane = static_cast<std::size_t>(sc.width) * sc.height;
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < plane; ++i) {
    const float v = sc.data[component * plane + i];
    if (sc.is_nodata(v)) continue;
    const double s = polarity * static_cast<double>(v);
    sum += s;
    sumsq += s * s;
    ++n;
  }
  require(n > 0, "component image is entirely nodata");
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
  const double cut = mean + k * sd;

  ClassMap mask;
  mask.width = sc.width;
  mask.height = sc.height;
  mask.transform = sc.transform;
  mask.crs = sc.crs;
  mask.labels.assign(plane, 0);
  for (std::size_t i = 0; i < plane; ++i) {
    const float v = sc.data[component * plane + i];
    if (sc.is_nodata(v)) continue;
    if (polarity * static_cast<double>(v) > cut) mask.labels[i] = 1;
  }
  return mask;
}

}  // namespace altmap

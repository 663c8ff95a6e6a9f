#pragma once

#include <utility>
#include <vector>

#include "altmap/raster.hpp"

namespace altmap {

// Covariance PCA over a band subset. Loadings are unit-norm eigenvectors
// (rows, component x band), eigenvalues descending. Sign convention: the
// largest-magnitude entry of each eigenvector is positive.
struct PcaResult {
  std::vector<int> band_subset;
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> loadings;  // [component][band]
  RasterStack scores;                          // component images, one band each
};

// Per-band expectation for a target class: +1 reflect, -1 absorb, 0 ignore.
using SpectralSignature = std::vector<int>;

PcaResult pca(const RasterStack& stack, const std::vector<int>& band_subset);

// Picks the (component, polarity) whose signed loadings best match the
// signature: score(k,s) = s * sum_b sig_b * loading[k][b], maximized over
// s in {+1,-1}; ties broken by smaller k then s=+1.
std::pair<int, int> select_component(const PcaResult& result, const SpectralSignature& sig);

// Mask of pixels where polarity*score exceeds mean + k*stddev of the
// polarity-adjusted component image (non-nodata pixels only).
ClassMap threshold_component(const PcaResult& result, int component, int polarity, double k);

}  // namespace altmap

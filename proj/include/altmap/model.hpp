#pragma once

#include <string>
#include <vector>

#include "altmap/knn.hpp"
#include "altmap/network.hpp"
#include "altmap/preprocess.hpp"
#include "altmap/raster.hpp"
#include "altmap/svm.hpp"

namespace altmap {

enum class ModelKind { Knn, Svm, Mlp, Cnn };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct Provenance {
  std::string data_kind = "synthetic";
  std::string label_method = "manual";
  std::uint64_t seed = 0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::Knn;
  int num_classes = 3;
  ScalingParams scaling;
  Provenance provenance;

  KnnModel knn;       // kind == Knn
  SvmModel svm;       // kind == Svm
  MlpSpec mlp_spec;   // kind == Mlp
  CnnSpec cnn_spec;   // kind == Cnn
  Network net;        // kind == Mlp | Cnn
  std::vector<EpochStats> history;
};

struct Prediction {
  int class_label = 0;
  std::vector<double> probs;  // sums to 1 (softmax or normalized votes)
};

// CNN models need the scaled stack to pull the sample's patch; other kinds
// ignore it.
Prediction predict_sample(TrainedModel& model, const Sample& sample,
                          const RasterStack* scaled_stack = nullptr);

struct MapPrediction {
  ClassMap map;
  RasterStack probs;  // one band per class, per-pixel sum 1 (0 on nodata)
};

// Applies the model's stored scaling, then classifies every non-nodata pixel.
// A sub-rectangle limits the output to a tile while CNN patches still read
// (reflect-padded) context from the full stack, so tiled prediction stitches
// bit-exactly to the monolithic result.
MapPrediction predict_map(TrainedModel& model, const RasterStack& raw_stack, int col0 = 0,
                          int row0 = 0, int tile_width = -1, int tile_height = -1);

// Manifest JSON at <path>.json, float64 little-endian parameter blob at
// <path>.params.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace altmap

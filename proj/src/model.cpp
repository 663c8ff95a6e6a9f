#include "altmap/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "altmap/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "model blob format assumes a little-endian host");

namespace altmap {

using nlohmann::json;

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Knn: return "knn";
    case ModelKind::Svm: return "svm";
    case ModelKind::Mlp: return "mlp";
    case ModelKind::Cnn: return "cnn";
  }
  throw Error("unknown model kind");
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "knn") return ModelKind::Knn;
  if (name == "svm") return ModelKind::Svm;
  if (name == "mlp") return ModelKind::Mlp;
  if (name == "cnn") return ModelKind::Cnn;
  throw Error("unknown model kind: " + name);
}

Prediction predict_sample(TrainedModel& model, const Sample& sample,
                          const RasterStack* scaled_stack) {
  Prediction pred;
  switch (model.kind) {
    case ModelKind::Knn: {
      KnnPrediction p = knn_predict(model.knn, sample.features);
      pred.class_label = p.class_label;
      pred.probs = p.scores;
      const double sum = std::accumulate(pred.probs.begin(), pred.probs.end(), 0.0);
      if (sum > 0.0)
        for (double& v : pred.probs) v /= sum;
      break;
    }
    case ModelKind::Svm: {
      SvmPrediction p = svm_predict(model.svm, sample.features);
      pred.class_label = p.class_label;
      pred.probs = p.votes;
      const double sum = std::accumulate(pred.probs.begin(), pred.probs.end(), 0.0);
      if (sum > 0.0)
        for (double& v : pred.probs) v /= sum;
      break;
    }
    case ModelKind::Mlp: {
      pred.probs = nn::softmax(model.net.logits(feature_tensor(sample.features), false));
      pred.class_label = static_cast<int>(
          std::max_element(pred.probs.begin(), pred.probs.end()) - pred.probs.begin());
      break;
    }
    case ModelKind::Cnn: {
      require(scaled_stack != nullptr, "CNN prediction needs the scaled stack");
      nn::Tensor patch =
          patch_tensor(*scaled_stack, sample.col, sample.row, model.cnn_spec.patch);
      pred.probs = nn::softmax(model.net.logits(patch, false));
      pred.class_label = static_cast<int>(
          std::max_element(pred.probs.begin(), pred.probs.end()) - pred.probs.begin());
      break;
    }
  }
  return pred;
}

MapPrediction predict_map(TrainedModel& model, const RasterStack& raw_stack, int col0, int row0,
                          int tile_width, int tile_height) {
  const RasterStack scaled = apply_scaling(raw_stack, model.scaling);
  if (tile_width < 0) tile_width = raw_stack.width - col0;
  if (tile_height < 0) tile_height = raw_stack.height - row0;
  require(col0 >= 0 && row0 >= 0 && col0 + tile_width <= raw_stack.width &&
              row0 + tile_height <= raw_stack.height,
          "tile out of raster bounds");

  MapPrediction out;
  out.map.width = tile_width;
  out.map.height = tile_height;
  out.map.transform = raw_stack.transform;
  out.map.transform[0] += col0 * raw_stack.transform[1];
  out.map.transform[3] += row0 * raw_stack.transform[5];
  out.map.crs = raw_stack.crs;
  out.map.labels.assign(static_cast<std::size_t>(tile_width) * tile_height, 0);

  out.probs.width = tile_width;
  out.probs.height = tile_height;
  out.probs.bands = model.num_classes;
  out.probs.transform = out.map.transform;
  out.probs.crs = raw_stack.crs;
  out.probs.data.assign(
      static_cast<std::size_t>(tile_width) * tile_height * model.num_classes, 0.0f);

  Sample s;
  s.features.resize(scaled.bands);
  for (int r = 0; r < tile_height; ++r) {
    for (int c = 0; c < tile_width; ++c) {
      const int sc = col0 + c, sr = row0 + r;
      if (raw_stack.pixel_is_nodata(sc, sr)) continue;
      s.col = sc;
      s.row = sr;
      for (int b = 0; b < scaled.bands; ++b) s.features[b] = scaled.at(sc, sr, b);
      const Prediction p = predict_sample(model, s, &scaled);
      out.map.at(c, r) = static_cast<std::uint8_t>(p.class_label);
      for (int k = 0; k < model.num_classes; ++k)
        out.probs.at(c, r, k) = static_cast<float>(p.probs[k]);
    }
  }
  return out;
}

// ---------- serialization ----------

namespace {

struct BlobWriter {
  std::vector<double> data;
  json manifest_arrays = json::array();

  void add(const std::string& name, const std::vector<int>& shape, const double* src,
           std::size_t count) {
    json a;
    a["name"] = name;
    a["shape"] = shape;
    a["offset"] = data.size();
    a["count"] = count;
    manifest_arrays.push_back(a);
    data.insert(data.end(), src, src + count);
  }
};

struct BlobReader {
  std::vector<double> data;
  json arrays;

  std::pair<const double*, std::size_t> get(const std::string& name,
                                            std::vector<int>* shape = nullptr) const {
    for (const auto& a : arrays) {
      if (a.at("name").get<std::string>() != name) continue;
      const std::size_t off = a.at("offset").get<std::size_t>();
      const std::size_t count = a.at("count").get<std::size_t>();
      require(off + count <= data.size(), "model blob truncated for array " + name);
      if (shape) *shape = a.at("shape").get<std::vector<int>>();
      return {data.data() + off, count};
    }
    throw Error("model blob missing array " + name);
  }
};

json scaling_to_json(const ScalingParams& p) {
  json j;
  j["mode"] = p.mode == ScalingMode::MinMax01 ? "minmax01" : "zscore";
  j["a"] = p.a;
  j["b"] = p.b;
  return j;
}

ScalingParams scaling_from_json(const json& j) {
  ScalingParams p;
  p.mode = j.at("mode").get<std::string>() == "minmax01" ? ScalingMode::MinMax01
                                                         : ScalingMode::ZScore;
  p.a = j.at("a").get<std::vector<double>>();
  p.b = j.at("b").get<std::vector<double>>();
  return p;
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  json m;
  m["version"] = 1;
  m["kind"] = model_kind_name(model.kind);
  m["num_classes"] = model.num_classes;
  m["scaling"] = scaling_to_json(model.scaling);
  m["provenance"] = {{"data_kind", model.provenance.data_kind},
                     {"label_method", model.provenance.label_method},
                     {"seed", model.provenance.seed}};
  m["history"] = json::array();
  for (const auto& h : model.history)
    m["history"].push_back({{"train_loss", h.train_loss},
                            {"train_acc", h.train_acc},
                            {"test_loss", h.test_loss},
                            {"test_acc", h.test_acc}});

  BlobWriter blob;
  switch (model.kind) {
    case ModelKind::Knn: {
      m["knn"] = {{"k", model.knn.k}, {"dim", model.knn.dim}};
      std::vector<double> feats(model.knn.features.begin(), model.knn.features.end());
      blob.add("features", {model.knn.size(), model.knn.dim}, feats.data(), feats.size());
      std::vector<double> labels(model.knn.labels.begin(), model.knn.labels.end());
      blob.add("labels", {model.knn.size()}, labels.data(), labels.size());
      break;
    }
    case ModelKind::Svm: {
      json machines = json::array();
      for (std::size_t i = 0; i < model.svm.machines.size(); ++i) {
        const BinarySvm& bin = model.svm.machines[i];
        const int nsv = static_cast<int>(bin.coef.size());
        machines.push_back({{"class_pos", bin.class_pos},
                            {"class_neg", bin.class_neg},
                            {"bias", bin.bias},
                            {"nsv", nsv}});
        std::vector<double> sv(bin.support_vectors.begin(), bin.support_vectors.end());
        blob.add("sv_" + std::to_string(i), {nsv, model.svm.dim}, sv.data(), sv.size());
        blob.add("coef_" + std::to_string(i), {nsv}, bin.coef.data(), bin.coef.size());
      }
      m["svm"] = {{"dim", model.svm.dim},
                  {"gamma", model.svm.gamma},
                  {"C", model.svm.C},
                  {"machines", machines}};
      break;
    }
    case ModelKind::Mlp:
    case ModelKind::Cnn: {
      if (model.kind == ModelKind::Mlp) {
        m["mlp"] = {{"input", model.mlp_spec.input},
                    {"hidden", model.mlp_spec.hidden},
                    {"output", model.mlp_spec.output}};
      } else {
        const CnnSpec& c = model.cnn_spec;
        m["cnn"] = {{"patch", c.patch},       {"bands", c.bands},
                    {"kernel", c.kernel},     {"filters1", c.filters1},
                    {"filters2", c.filters2}, {"dense", c.dense},
                    {"output", c.output},     {"dropout_conv", c.dropout_conv},
                    {"dropout_dense", c.dropout_dense}};
      }
      // const_cast: params() is non-const but saving does not mutate values.
      auto& net = const_cast<Network&>(model.net);
      int i = 0;
      for (nn::Param* p : net.params()) {
        blob.add("p" + std::to_string(i++), p->value.shape, p->value.v.data(), p->value.size());
      }
      break;
    }
  }
  m["arrays"] = blob.manifest_arrays;

  std::ofstream mj(path + ".json");
  require(mj.good(), "cannot write model manifest: " + path + ".json");
  mj << m.dump(2) << "\n";
  require(mj.good(), "failed writing model manifest");

  std::ofstream bb(path + ".params", std::ios::binary);
  require(bb.good(), "cannot write model blob: " + path + ".params");
  bb.write(reinterpret_cast<const char*>(blob.data.data()),
           static_cast<std::streamsize>(blob.data.size() * sizeof(double)));
  require(bb.good(), "failed writing model blob");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream mj(path + ".json");
  require(mj.good(), "cannot open model manifest: " + path + ".json");
  json m;
  mj >> m;
  require(m.at("version").get<int>() == 1, "unsupported model version");

  TrainedModel model;
  model.kind = model_kind_from_name(m.at("kind").get<std::string>());
  model.num_classes = m.at("num_classes").get<int>();
  model.scaling = scaling_from_json(m.at("scaling"));
  model.provenance.data_kind = m.at("provenance").at("data_kind").get<std::string>();
  model.provenance.label_method = m.at("provenance").at("label_method").get<std::string>();
  model.provenance.seed = m.at("provenance").at("seed").get<std::uint64_t>();
  for (const auto& h : m.at("history"))
    model.history.push_back({h.at("train_loss").get<double>(), h.at("train_acc").get<double>(),
                             h.at("test_loss").get<double>(), h.at("test_acc").get<double>()});

  BlobReader blob;
  blob.arrays = m.at("arrays");
  {
    std::ifstream bb(path + ".params", std::ios::binary);
    require(bb.good(), "cannot open model blob: " + path + ".params");
    bb.seekg(0, std::ios::end);
    const std::size_t bytes = static_cast<std::size_t>(bb.tellg());
    require(bytes % sizeof(double) == 0, "model blob size not a multiple of 8");
    bb.seekg(0);
    blob.data.resize(bytes / sizeof(double));
    bb.read(reinterpret_cast<char*>(blob.data.data()), static_cast<std::streamsize>(bytes));
    require(bb.good(), "short read on model blob");
  }

  switch (model.kind) {
    case ModelKind::Knn: {
      model.knn.k = m.at("knn").at("k").get<int>();
      model.knn.dim = m.at("knn").at("dim").get<int>();
      model.knn.num_classes = model.num_classes;
      auto [feats, fcount] = blob.get("features");
      model.knn.features.assign(feats, feats + fcount);
      auto [labels, lcount] = blob.get("labels");
      for (std::size_t i = 0; i < lcount; ++i)
        model.knn.labels.push_back(static_cast<int>(labels[i]));
      break;
    }
    case ModelKind::Svm: {
      const json& sj = m.at("svm");
      model.svm.num_classes = model.num_classes;
      model.svm.dim = sj.at("dim").get<int>();
      model.svm.gamma = sj.at("gamma").get<double>();
      model.svm.C = sj.at("C").get<double>();
      std::size_t i = 0;
      for (const auto& mj2 : sj.at("machines")) {
        BinarySvm bin;
        bin.class_pos = mj2.at("class_pos").get<int>();
        bin.class_neg = mj2.at("class_neg").get<int>();
        bin.bias = mj2.at("bias").get<double>();
        auto [sv, svn] = blob.get("sv_" + std::to_string(i));
        bin.support_vectors.assign(sv, sv + svn);
        auto [coef, cn] = blob.get("coef_" + std::to_string(i));
        bin.coef.assign(coef, coef + cn);
        model.svm.machines.push_back(std::move(bin));
        ++i;
      }
      break;
    }
    case ModelKind::Mlp:
    case ModelKind::Cnn: {
      if (model.kind == ModelKind::Mlp) {
        model.mlp_spec.input = m.at("mlp").at("input").get<int>();
        model.mlp_spec.hidden = m.at("mlp").at("hidden").get<std::vector<int>>();
        model.mlp_spec.output = m.at("mlp").at("output").get<int>();
        model.net = Network::make_mlp(model.mlp_spec, model.provenance.seed);
      } else {
        const json& cj = m.at("cnn");
        CnnSpec& c = model.cnn_spec;
        c.patch = cj.at("patch").get<int>();
        c.bands = cj.at("bands").get<int>();
        c.kernel = cj.at("kernel").get<int>();
        c.filters1 = cj.at("filters1").get<int>();
        c.filters2 = cj.at("filters2").get<int>();
        c.dense = cj.at("dense").get<int>();
        c.output = cj.at("output").get<int>();
        c.dropout_conv = cj.at("dropout_conv").get<double>();
        c.dropout_dense = cj.at("dropout_dense").get<double>();
        model.net = Network::make_cnn(c, model.provenance.seed);
      }
      int i = 0;
      for (nn::Param* p : model.net.params()) {
        std::vector<int> shape;
        auto [src, count] = blob.get("p" + std::to_string(i++), &shape);
        require(shape == p->value.shape, "model blob shape mismatch at parameter " +
                                            std::to_string(i - 1));
        std::copy_n(src, count, p->value.v.begin());
      }
      break;
    }
  }
  return model;
}

}  // namespace altmap

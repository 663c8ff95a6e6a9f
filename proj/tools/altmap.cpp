// Command-line front end for the alteration-mapping pipeline: scene synthesis,
// ingest, label generation (manual polygons or selective PCA), training,
// whole-raster prediction, evaluation, and map rendering.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "altmap/error.hpp"
#include "altmap/eval.hpp"
#include "altmap/geometry.hpp"
#include "altmap/labelgen.hpp"
#include "altmap/model.hpp"
#include "altmap/pca.hpp"
#include "altmap/png_io.hpp"
#include "altmap/preprocess.hpp"
#include "altmap/rng.hpp"
#include "altmap/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace altmap;

namespace {

struct RunConfig {
  std::string raster;      // native stack path prefix
  std::string polygons;
  std::string scene;       // scene spec JSON (synth)
  std::string out = "out";
  std::string data_kind = "synthetic";   // landsat8 | landsat9 | aster | synthetic
  std::string label_method = "manual";   // manual | pca
  std::string model = "cnn";             // knn | svm | mlp | cnn
  std::string scaling = "minmax01";
  std::uint64_t seed = 0;
  std::vector<int> bands;                // optional band selection at ingest
  int resample_factor = 1;
  std::vector<int> pca_bands;            // default: all bands
  std::vector<std::pair<int, SpectralSignature>> signatures;
  double threshold_k = 2.0;
  int background_count = 0;              // 0 = mean of foreground counts
  std::vector<int> priority;             // polygon overlap priority
  double ratio = 0.7;
  int epochs = 0;                        // 0 = auto by data kind x label method
  int batch_size = 32;
  double learning_rate = 0.01;
  double warmup_epochs = 1.0;           // linear lr ramp over the first epoch(s)
  int knn_k = 5;
  double svm_C = 1.0;
  double svm_gamma = 0.0;                // 0 = 1/n_features
  double svm_tol = 1e-3;
  int svm_train_cap = 20000;
  int cnn_patch = 0;                     // 0 = auto by kernel size
  std::map<int, Rgb> palette;

  json raw;
};

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  require(in.good(), "cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed config JSON: ") + e.what());
  }
  c.raw = j;
  c.raster = j.value("raster", c.raster);
  c.polygons = j.value("polygons", c.polygons);
  c.scene = j.value("scene", c.scene);
  c.out = j.value("out", c.out);
  c.data_kind = j.value("data_kind", c.data_kind);
  c.label_method = j.value("label_method", c.label_method);
  c.model = j.value("model", c.model);
  c.scaling = j.value("scaling", c.scaling);
  c.seed = j.value("seed", c.seed);
  c.bands = j.value("bands", c.bands);
  c.resample_factor = j.value("resample_factor", c.resample_factor);
  c.pca_bands = j.value("pca_bands", c.pca_bands);
  c.threshold_k = j.value("threshold_k", c.threshold_k);
  c.background_count = j.value("background_count", c.background_count);
  c.priority = j.value("priority", c.priority);
  c.ratio = j.value("ratio", c.ratio);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
  c.knn_k = j.value("knn_k", c.knn_k);
  c.svm_C = j.value("svm_C", c.svm_C);
  c.svm_gamma = j.value("svm_gamma", c.svm_gamma);
  c.svm_tol = j.value("svm_tol", c.svm_tol);
  c.svm_train_cap = j.value("svm_train_cap", c.svm_train_cap);
  c.cnn_patch = j.value("cnn_patch", c.cnn_patch);
  if (j.contains("signatures")) {
    for (const auto& sj : j["signatures"])
      c.signatures.emplace_back(sj.at("class").get<int>(),
                                sj.at("signature").get<std::vector<int>>());
  }
  if (j.contains("palette")) {
    for (const auto& [key, val] : j["palette"].items()) {
      auto rgb = val.get<std::vector<int>>();
      require(rgb.size() == 3, "palette entries must be [r,g,b]");
      c.palette[std::stoi(key)] = {static_cast<std::uint8_t>(rgb[0]),
                                   static_cast<std::uint8_t>(rgb[1]),
                                   static_cast<std::uint8_t>(rgb[2])};
    }
  }
  require(c.data_kind == "landsat8" || c.data_kind == "landsat9" || c.data_kind == "aster" ||
              c.data_kind == "synthetic",
          "unknown data_kind: " + c.data_kind);
  require(c.label_method == "manual" || c.label_method == "pca",
          "unknown label_method: " + c.label_method);
  return c;
}

ScalingMode scaling_mode(const RunConfig& c) {
  require(c.scaling == "minmax01" || c.scaling == "zscore", "unknown scaling: " + c.scaling);
  return c.scaling == "minmax01" ? ScalingMode::MinMax01 : ScalingMode::ZScore;
}

// Epoch defaults per data kind x label method; the synthetic benchmark uses a
// short run.
int default_epochs(const std::string& data_kind, const std::string& label_method) {
  if (data_kind == "aster") return label_method == "pca" ? 20 : 40;
  if (data_kind == "synthetic") return 20;
  return label_method == "pca" ? 50 : 100;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot hash missing file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& c) {
  return fnv1a64(c.raw.is_null() ? "{}" : c.raw.dump());
}

void write_manifest(const RunConfig& c, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  fs::create_directories(c.out);
  const std::string path = c.out + "/manifest_" + command + ".json";
  const std::uint64_t chash = config_hash(c);
  if (fs::exists(path)) {
    std::ifstream in(path);
    json old;
    in >> old;
    if (old.value("config_hash", std::uint64_t{0}) == chash)
      std::cerr << "warning: rerun detected for '" << command
                << "' with an identical config hash\n";
  }
  json m;
  m["command"] = command;
  m["version"] = 1;
  m["config_hash"] = chash;
  m["seed"] = c.seed;
  m["inputs"] = json::object();
  for (const auto& p : inputs)
    if (fs::exists(p)) m["inputs"][p] = hash_file(p);
  m["outputs"] = outputs;
  std::ofstream out(path);
  out << m.dump(2) << "\n";
}

std::vector<float> scale_features(const ScalingParams& p, const std::vector<float>& f) {
  std::vector<float> out(f.size());
  for (std::size_t b = 0; b < f.size(); ++b) {
    if (p.mode == ScalingMode::MinMax01) {
      const double range = p.b[b] - p.a[b];
      out[b] = range > 0.0
                   ? static_cast<float>(std::clamp((f[b] - p.a[b]) / range, 0.0, 1.0))
                   : 0.0f;
    } else {
      out[b] = p.b[b] > 0.0 ? static_cast<float>((f[b] - p.a[b]) / p.b[b]) : 0.0f;
    }
  }
  return out;
}

SampleTable scale_table(const ScalingParams& p, const SampleTable& t) {
  SampleTable out = t;
  for (auto& r : out.rows) r.features = scale_features(p, r.features);
  return out;
}

int cmd_synth(const RunConfig& c) {
  require(!c.scene.empty(), "synth needs a scene spec path (config key \"scene\")");
  SceneSpec spec = SceneSpec::from_file(c.scene);
  if (c.seed != 0) spec.seed = c.seed;
  Scene scene = generate_scene(spec);
  fs::create_directories(c.out);
  write_stack(scene.stack, c.out + "/scene");
  write_stack(class_map_to_raster(scene.truth), c.out + "/truth");
  write_manifest(c, "synth", {c.scene},
                 {c.out + "/scene.hdr", c.out + "/scene.bin", c.out + "/truth.hdr",
                  c.out + "/truth.bin"});
  std::cout << "scene " << scene.stack.width << "x" << scene.stack.height << "x"
            << scene.stack.bands << " written to " << c.out << "/scene\n";
  return 0;
}

int cmd_ingest(const RunConfig& c) {
  require(!c.raster.empty(), "ingest needs a raster path (config key \"raster\")");
  RasterStack stack = read_stack(c.raster);
  if (!c.bands.empty()) stack = select_bands(stack, c.bands);
  if (c.resample_factor > 1) stack = resample_nearest(stack, c.resample_factor);
  fs::create_directories(c.out);
  write_stack(stack, c.out + "/stack");
  write_manifest(c, "ingest", {c.raster + ".hdr", c.raster + ".bin"},
                 {c.out + "/stack.hdr", c.out + "/stack.bin"});
  std::cout << "stack " << stack.width << "x" << stack.height << "x" << stack.bands
            << " written to " << c.out << "/stack\n";
  return 0;
}

int background_count_for(const RunConfig& c, const std::vector<std::pair<int, ClassMap>>& masks) {
  if (c.background_count > 0) return c.background_count;
  std::size_t total = 0;
  for (const auto& [cls, m] : masks)
    total += static_cast<std::size_t>(std::count_if(m.labels.begin(), m.labels.end(),
                                                    [](std::uint8_t v) { return v != 0; }));
  return std::max(1, static_cast<int>(total / std::max<std::size_t>(1, masks.size())));
}

int cmd_labels(const RunConfig& c, const std::string& method_flag) {
  const std::string method = method_flag.empty() ? c.label_method : method_flag;
  RasterStack stack = read_stack(c.out + "/stack");
  std::vector<std::pair<int, ClassMap>> masks;
  std::vector<std::string> inputs = {c.out + "/stack.hdr", c.out + "/stack.bin"};

  if (method == "manual") {
    require(!c.polygons.empty(), "manual labels need a polygon file (config key \"polygons\")");
    inputs.push_back(c.polygons);
    PolygonSet polys = read_polygons(c.polygons);
    ClassMap labeled = rasterize_polygons(polys, stack, c.priority);
    std::uint8_t maxc = 0;
    for (std::uint8_t v : labeled.labels) maxc = std::max(maxc, v);
    for (int cls = 1; cls <= maxc; ++cls) {
      ClassMap mask = labeled;
      for (auto& v : mask.labels) v = v == cls ? 1 : 0;
      masks.emplace_back(cls, std::move(mask));
    }
    write_stack(class_map_to_raster(labeled), c.out + "/labels");
  } else {
    require(!c.signatures.empty(), "pca labels need spectral signatures in the config");
    std::vector<int> subset = c.pca_bands;
    if (subset.empty())
      for (int b = 0; b < stack.bands; ++b) subset.push_back(b);
    const ScalingParams sp = fit_scaling(stack, scaling_mode(c));
    const RasterStack scaled = apply_scaling(stack, sp);
    PcaResult res = pca(scaled, subset);

    json pj;
    pj["band_subset"] = res.band_subset;
    pj["eigenvalues"] = res.eigenvalues;
    pj["loadings"] = res.loadings;
    pj["selection"] = json::array();
    for (const auto& [cls, sig] : c.signatures) {
      auto [comp, pol] = select_component(res, sig);
      ClassMap mask = threshold_component(res, comp, pol, c.threshold_k);
      pj["selection"].push_back(
          {{"class", cls}, {"component", comp}, {"polarity", pol}, {"threshold_k", c.threshold_k}});
      write_stack(class_map_to_raster(mask), c.out + "/mask_class" + std::to_string(cls));
      masks.emplace_back(cls, std::move(mask));
    }
    // Resolve inter-class overlaps by signature order (first listed wins).
    for (std::size_t i = 1; i < masks.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        for (std::size_t p = 0; p < masks[i].second.labels.size(); ++p)
          if (masks[j].second.labels[p]) masks[i].second.labels[p] = 0;
    std::ofstream pout(c.out + "/pca.json");
    pout << pj.dump(2) << "\n";
  }

  SampleTable table =
      build_dataset(stack, masks, background_count_for(c, masks), derive_seed(c.seed, "labels"));
  write_samples(table, c.out + "/samples.csv");
  write_manifest(c, "labels", inputs, {c.out + "/samples.csv"});
  const std::vector<int> counts = table.class_counts();
  std::cout << "samples: total " << table.rows.size();
  for (std::size_t k = 0; k < counts.size(); ++k)
    std::cout << ", class " << k << ": " << counts[k];
  std::cout << "\n";
  return 0;
}

TrainedModel train_from_config(const RunConfig& c, const std::string& model_flag,
                               const RasterStack& stack, const SampleTable& table) {
  const std::string model_name = model_flag.empty() ? c.model : model_flag;
  const ModelKind kind = model_kind_from_name(model_name);
  const std::vector<int> counts = table.class_counts();
  const int num_classes = static_cast<int>(counts.size());

  TrainedModel model;
  model.kind = kind;
  model.num_classes = num_classes;
  model.scaling = fit_scaling(stack, scaling_mode(c));
  model.provenance = {c.data_kind, c.label_method, c.seed};

  const SampleTable scaled_table = scale_table(model.scaling, table);
  const DatasetSplit split = split_dataset(scaled_table, c.ratio, derive_seed(c.seed, "split"));

  TrainConfig tc;
  tc.learning_rate = c.learning_rate;
  tc.warmup_epochs = c.warmup_epochs;
  tc.epochs = c.epochs > 0 ? c.epochs : default_epochs(c.data_kind, c.label_method);
  tc.batch_size = c.batch_size;
  tc.seed = derive_seed(c.seed, "train");

  switch (kind) {
    case ModelKind::Knn: {
      SampleTable train = split.train;
      model.knn = knn_fit(train, c.knn_k, num_classes);
      break;
    }
    case ModelKind::Svm: {
      SvmParams sp;
      sp.C = c.svm_C;
      sp.gamma = c.svm_gamma;
      sp.tol = c.svm_tol;
      sp.train_cap = c.svm_train_cap;
      sp.seed = derive_seed(c.seed, "svm");
      model.svm = svm_train(split.train, num_classes, sp);
      break;
    }
    case ModelKind::Mlp: {
      MlpSpec spec;
      spec.input = table.feature_count();
      spec.hidden = c.data_kind == "aster" ? std::vector<int>{8, 6} : std::vector<int>{5};
      spec.output = num_classes;
      TrainResult r = train_network(spec, split, tc);
      model.mlp_spec = spec;
      model.net = std::move(r.net);
      model.history = std::move(r.history);
      break;
    }
    case ModelKind::Cnn: {
      CnnSpec spec;
      spec.bands = stack.bands;
      spec.kernel = c.data_kind == "aster" ? 5 : 7;
      spec.patch = c.cnn_patch > 0 ? c.cnn_patch : (spec.kernel == 7 ? 15 : 11);
      spec.output = num_classes;
      const RasterStack scaled = apply_scaling(stack, model.scaling);
      TrainResult r = train_network(spec, split, scaled, tc);
      model.cnn_spec = spec;
      model.net = std::move(r.net);
      model.history = std::move(r.history);
      break;
    }
  }
  return model;
}

int cmd_train(const RunConfig& c, const std::string& model_flag) {
  RasterStack stack = read_stack(c.out + "/stack");
  SampleTable table = read_samples(c.out + "/samples.csv");
  TrainedModel model = train_from_config(c, model_flag, stack, table);
  const std::string name = model_kind_name(model.kind);
  save_model(model, c.out + "/model_" + name);
  std::vector<std::string> outputs = {c.out + "/model_" + name + ".json",
                                      c.out + "/model_" + name + ".params"};
  if (!model.history.empty()) {
    export_history(model.history, c.out + "/history_" + name + ".csv");
    outputs.push_back(c.out + "/history_" + name + ".csv");
  }
  write_manifest(c, "train_" + name,
                 {c.out + "/stack.hdr", c.out + "/stack.bin", c.out + "/samples.csv"}, outputs);
  std::cout << "trained " << name;
  if (!model.history.empty())
    std::cout << " (final train acc " << model.history.back().train_acc << ", test acc "
              << model.history.back().test_acc << ")";
  std::cout << "\n";
  return 0;
}

int cmd_predict(const RunConfig& c, const std::string& model_flag) {
  const std::string name = model_flag.empty() ? c.model : model_flag;
  TrainedModel model = load_model(c.out + "/model_" + name);
  RasterStack stack = read_stack(c.out + "/stack");
  MapPrediction pred = predict_map(model, stack);
  write_stack(class_map_to_raster(pred.map), c.out + "/classmap_" + name);
  write_stack(pred.probs, c.out + "/probs_" + name);
  write_manifest(c, "predict_" + name,
                 {c.out + "/stack.hdr", c.out + "/stack.bin", c.out + "/model_" + name + ".json",
                  c.out + "/model_" + name + ".params"},
                 {c.out + "/classmap_" + name + ".hdr", c.out + "/classmap_" + name + ".bin",
                  c.out + "/probs_" + name + ".hdr", c.out + "/probs_" + name + ".bin"});
  std::cout << "class map written to " << c.out << "/classmap_" << name << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& c, const std::string& model_flag,
                 const std::string& gt_samples_path) {
  const std::string name = model_flag.empty() ? c.model : model_flag;
  TrainedModel model = load_model(c.out + "/model_" + name);
  RasterStack stack = read_stack(c.out + "/stack");
  SampleTable table = read_samples(c.out + "/samples.csv");

  const SampleTable scaled_table = scale_table(model.scaling, table);
  const DatasetSplit split = split_dataset(scaled_table, c.ratio, derive_seed(c.seed, "split"));
  const RasterStack scaled = apply_scaling(stack, model.scaling);

  std::vector<int> truth;
  std::vector<std::vector<double>> scores;
  for (const auto& s : split.test.rows) {
    truth.push_back(s.class_label);
    scores.push_back(predict_sample(model, s, &scaled).probs);
  }
  EvalReport rep = evaluate_predictions(truth, scores, model.num_classes);
  rep.model_name = name;
  rep.data_kind = c.data_kind;
  rep.label_method = c.label_method;
  rep.seed = c.seed;

  json extra;
  if (!gt_samples_path.empty()) {
    SampleTable gt = scale_table(model.scaling, read_samples(gt_samples_path));
    extra["ground_truth_accuracy"] = ground_truth_accuracy(model, gt, &scaled);
  }

  const std::string rpath = c.out + "/report_" + name + ".json";
  {
    json rj = json::parse(rep.to_json());
    for (auto& [k, v] : extra.items()) rj[k] = v;
    std::ofstream out(rpath);
    out << rj.dump(2) << "\n";
  }
  std::vector<std::string> outputs = {rpath};
  for (int cls = 0; cls < model.num_classes; ++cls) {
    if (rep.roc[cls].empty()) continue;
    const std::string p = c.out + "/roc_" + name + "_class" + std::to_string(cls) + ".csv";
    export_roc_csv(rep.roc[cls], p);
    outputs.push_back(p);
  }
  write_manifest(c, "evaluate_" + name,
                 {c.out + "/samples.csv", c.out + "/model_" + name + ".json"}, outputs);
  std::cout << "accuracy " << rep.accuracy << ", macro-F1 " << rep.macro_f1 << ", macro-AUC "
            << rep.macro_auc;
  if (extra.contains("ground_truth_accuracy"))
    std::cout << ", ground-truth accuracy " << extra["ground_truth_accuracy"].get<double>();
  std::cout << "\n";
  return 0;
}

int cmd_render(const RunConfig& c, const std::string& model_flag) {
  const std::string name = model_flag.empty() ? c.model : model_flag;
  const std::string src = c.out + "/classmap_" + name;
  ClassMap map = class_map_from_raster(read_stack(src));
  Palette palette = c.palette.empty() ? default_palette() : c.palette;
  const std::string dst = c.out + "/classmap_" + name + ".png";
  render_class_map(map, palette, dst);
  write_manifest(c, "render_" + name, {src + ".hdr", src + ".bin"}, {dst});
  std::cout << "rendered " << dst << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alteration-zone mapping pipeline"};
  app.require_subcommand(1);

  std::string config_path, model_flag, method_flag, gt_samples_path;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  std::string out_flag;
  int threads = 1;
  app.add_option("--config", config_path, "run configuration JSON");
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { seed_flag = s; seed_set = true; },
         "override the config seed");
  app.add_option("--out", out_flag, "override the output directory");
  app.add_option("--threads", threads, "worker threads (prediction tiling)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  auto* ingest = app.add_subcommand("ingest", "read, subset, and resample the input raster");
  auto* labels = app.add_subcommand("labels", "build the training dataset");
  labels->add_option("--method", method_flag, "manual | pca");
  auto* train = app.add_subcommand("train", "train a classifier");
  train->add_option("--model", model_flag, "knn | svm | mlp | cnn");
  auto* predict = app.add_subcommand("predict", "classify the whole raster");
  predict->add_option("--model", model_flag, "knn | svm | mlp | cnn");
  auto* evaluate = app.add_subcommand("evaluate", "metrics over the held-out split");
  evaluate->add_option("--model", model_flag, "knn | svm | mlp | cnn");
  evaluate->add_option("--gt-samples", gt_samples_path,
                       "manually labeled sample CSV for ground-truth accuracy");
  auto* render = app.add_subcommand("render", "render the class map to PNG");
  render->add_option("--model", model_flag, "knn | svm | mlp | cnn");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig c = load_config(config_path);
    if (seed_set) c.seed = seed_flag;
    if (!out_flag.empty()) c.out = out_flag;
    if (synth->parsed()) return cmd_synth(c);
    if (ingest->parsed()) return cmd_ingest(c);
    if (labels->parsed()) return cmd_labels(c, method_flag);
    if (train->parsed()) return cmd_train(c, model_flag);
    if (predict->parsed()) return cmd_predict(c, model_flag);
    if (evaluate->parsed()) return cmd_evaluate(c, model_flag, gt_samples_path);
    if (render->parsed()) return cmd_render(c, model_flag);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 2;
}

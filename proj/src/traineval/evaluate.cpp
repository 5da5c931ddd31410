// Copyright 2026 The latres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "traineval/evaluate.hpp"

#include <cmath>
#include <map>

#include "aggregate/aggregate.hpp"
#include "baselines/baselines.hpp"
#include "imaging/corners.hpp"
#include "imaging/image_io.hpp"
#include "models/inference.hpp"
#include "models/model_io.hpp"
#include "util/errors.hpp"
#include "util/text_io.hpp"

namespace latres::te {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Predictor predictor_for(ModelKind kind) {
  return kind == ModelKind::softmax ? Predictor::patch : Predictor::mask;
}

namespace {

constexpr std::size_t kPatchBatch = 64;

// Rows of d outputs, one per patch.
std::vector<std::vector<float>> forward_patches(model::Network<float>& net,
                                                std::span<const synth::PatchRecord> patches) {
  std::vector<std::vector<float>> out;
  std::vector<img::Plane> batch;
  for (std::size_t b = 0; b < patches.size(); b += kPatchBatch) {
    batch.clear();
    for (std::size_t i = b; i < std::min(patches.size(), b + kPatchBatch); ++i)
      batch.push_back(patches[i].pixels);
    auto y = net.forward(model::planes_to_tensor(batch), false);
    const std::size_t d = y.shape().c;
    for (std::size_t i = 0; i < batch.size(); ++i)
      out.emplace_back(y.raw() + i * d, y.raw() + (i + 1) * d);
  }
  return out;
}

}  // namespace

ImageAnalysis analyze_plane(model::Network<float>& net, ModelKind kind, const img::Plane& plane,
                            const RunConfig& cfg) {
  if (plane.height() < model::kPatchSize || plane.width() < model::kPatchSize)
    throw DimensionError("image is " + img::dims(plane.height(), plane.width()) +
                         "; the model needs at least 64x64");
  net.set_mode(nk::Mode::infer);
  ImageAnalysis a;
  const auto corners = img::detect_corners(plane, cfg.harris, cfg.nms);
  a.corner_count = corners.size();

  if (predictor_for(kind) == Predictor::patch) {
    const auto patches = synth::extract_patches(plane, corners);
    for (const auto& scores : forward_patches(net, patches))
      a.unit_classes.push_back(agg::argmax_class(scores));
    return a;
  }

  const auto map = model::forward_map(net, plane);
  const auto mask = model::propagate_mask(net.architecture(), img::Mask::from_corners(corners));
  const auto locations = model::mask_locations(mask);
  if (task_of(kind) == Task::classification) {
    for (const auto& l : locations) a.unit_classes.push_back(agg::argmax_class(map, l));
    return a;
  }
  for (const auto& l : locations) a.mask_values.push_back(map.at(0, l.y, l.x));
  a.unmasked_mean = agg::image_reg_unmasked(map);
  const auto patches = synth::extract_patches(plane, corners);
  for (const auto& v : forward_patches(net, patches)) a.patch_values.push_back(v[0]);
  return a;
}

std::vector<ImageAnalysis> analyze_entries(model::Network<float>& net, ModelKind kind,
                                           std::span<const synth::ManifestEntry> entries,
                                           const RunConfig& cfg, img::ResampleMethod method,
                                           const EntryCallback& progress) {
  std::vector<ImageAnalysis> out;
  out.reserve(entries.size());
  std::string loaded_path;
  img::Plane source;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.source_path != loaded_path) {
      source = img::load_luma(e.source_path);
      loaded_path = e.source_path;
    }
    auto a = analyze_plane(net, kind, synth::render_entry(e, source, method), cfg);
    a.entry_id = e.id;
    a.label_class = e.label_class;
    a.target = e.target;
    a.video_id = e.video_id;
    out.push_back(std::move(a));
    if (progress) progress(i + 1, entries.size());
  }
  return out;
}

namespace {

std::vector<int> image_verdicts(std::span<const ImageAnalysis> items, double pct,
                                std::size_t* low_conf) {
  std::vector<int> preds;
  for (const auto& a : items) {
    auto v = agg::image_class_or_fallback(a.unit_classes, pct);
    if (v.low_confidence && low_conf) ++*low_conf;
    preds.push_back(v.cls);
  }
  return preds;
}

// Videos keyed by (video_id, label); frame verdicts gathered in order.
struct VideoGroups {
  std::vector<std::vector<int>> frame_preds;
  std::vector<int> labels;
};

VideoGroups group_videos(std::span<const ImageAnalysis> items, std::span<const int> preds) {
  std::map<std::pair<std::string, int>, std::size_t> index;
  VideoGroups g;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].video_id) continue;
    auto key = std::make_pair(*items[i].video_id, items[i].label_class);
    auto [it, fresh] = index.emplace(key, g.labels.size());
    if (fresh) {
      g.labels.push_back(items[i].label_class);
      g.frame_preds.emplace_back();
    }
    g.frame_preds[it->second].push_back(preds[i]);
  }
  return g;
}

Confusion video_confusion(const VideoGroups& g, double pct) {
  std::vector<int> preds;
  for (const auto& f : g.frame_preds) preds.push_back(agg::video_class(f, pct));
  return accuracy_confusion(preds, g.labels);
}

std::vector<int> labels_of(std::span<const ImageAnalysis> items) {
  std::vector<int> labels;
  for (const auto& a : items) labels.push_back(a.label_class);
  return labels;
}

std::optional<double> try_r2(const std::vector<double>& preds, const std::vector<double>& targets) {
  try {
    return r_squared(preds, targets);
  } catch (const NumericError&) {
    return std::nullopt;
  } catch (const DataError&) {
    return std::nullopt;
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

ClassEval evaluate_classes(std::span<const ImageAnalysis> items, double image_pct,
                           double video_pct) {
  ClassEval ev;
  const auto preds = image_verdicts(items, image_pct, &ev.low_confidence);
  ev.images = accuracy_confusion(preds, labels_of(items));
  ev.videos = video_confusion(group_videos(items, preds), video_pct);
  return ev;
}

Ablation ablation_regression(std::span<const ImageAnalysis> items) {
  Ablation ab;
  std::vector<double> targets, masked, unmasked, patched;
  for (const auto& a : items) {
    targets.push_back(a.target);
    unmasked.push_back(a.unmasked_mean);
    if (a.mask_values.empty() || a.patch_values.empty()) ++ab.fallback;
    masked.push_back(a.mask_values.empty() ? agg::kFallbackValue : mean(a.mask_values));
    patched.push_back(a.patch_values.empty() ? agg::kFallbackValue : mean(a.patch_values));
  }
  ab.images = items.size();
  ab.mask_r2 = try_r2(masked, targets);
  ab.nomask_r2 = try_r2(unmasked, targets);
  ab.patch_r2 = try_r2(patched, targets);
  return ab;
}

std::vector<SweepPoint> percentile_sweep(std::span<const ImageAnalysis> items, double image_pct) {
  std::vector<SweepPoint> points;
  const auto labels = labels_of(items);
  for (int p = 10; p <= 90; p += 10) {
    const auto preds = image_verdicts(items, p, nullptr);
    auto c = accuracy_confusion(preds, labels);
    points.push_back({"image", p, c.total ? std::optional(c.accuracy()) : std::nullopt, c.total});
  }
  const auto groups = group_videos(items, image_verdicts(items, image_pct, nullptr));
  for (int p = 10; p <= 90; p += 10) {
    auto c = video_confusion(groups, p);
    points.push_back({"video", p, c.total ? std::optional(c.accuracy()) : std::nullopt, c.total});
  }
  return points;
}

void write_sweep_csv(const fs::path& path, std::span<const SweepPoint> points) {
  std::string out = "axis,percentile,accuracy,items\n";
  for (const auto& p : points)
    out += p.axis + "," + std::to_string(p.percentile) + "," +
           (p.accuracy ? format_double(*p.accuracy) : std::string()) + "," +
           std::to_string(p.items) + "\n";
  write_text(path, out);
}

namespace {

Prediction verdict(const ImageAnalysis& a, ModelKind kind, const RunConfig& cfg) {
  Prediction p;
  p.task = task_of(kind);
  p.corners = a.corner_count;
  if (p.task == Task::classification) {
    auto v = agg::image_class_or_fallback(a.unit_classes, cfg.image_pct);
    p.cls = v.cls;
    p.low_confidence = v.low_confidence;
  } else if (a.mask_values.empty()) {
    p.value = agg::kFallbackValue;
    p.low_confidence = true;
  } else {
    p.value = mean(a.mask_values);
  }
  if (p.task == Task::regression)
    p.cls = synth::nearest_class(static_cast<std::size_t>(
        std::lround(std::clamp(p.value, 0.0, 1.0) * static_cast<double>(synth::kMinSourceHeight))));
  if (a.corner_count < cfg.low_conf_corners) p.low_confidence = true;
  return p;
}

}  // namespace

Prediction predict_image(model::Network<float>& net, ModelKind kind, const img::Plane& plane,
                         const RunConfig& cfg) {
  return verdict(analyze_plane(net, kind, plane, cfg), kind, cfg);
}

Prediction predict_video(model::Network<float>& net, ModelKind kind,
                         std::span<const img::Plane> frames, const RunConfig& cfg) {
  if (frames.empty()) throw DataError("video has no frames");
  std::vector<int> classes;
  std::vector<double> values;
  Prediction out;
  out.task = task_of(kind);
  out.frames = frames.size();
  out.corners = 0;
  for (const auto& f : frames) {
    auto p = predict_image(net, kind, f, cfg);
    classes.push_back(p.cls);
    values.push_back(p.value);
    out.corners += p.corners;
    out.low_confidence = out.low_confidence || p.low_confidence;
  }
  if (out.task == Task::classification) {
    out.cls = agg::video_class(classes, cfg.video_pct);
  } else {
    out.value = agg::video_value(values, cfg.video_pct);
    out.cls = synth::nearest_class(static_cast<std::size_t>(
        std::lround(std::clamp(out.value, 0.0, 1.0) * static_cast<double>(synth::kMinSourceHeight))));
  }
  return out;
}

namespace {

struct Prepared {
  model::LoadedModel model;
  RunConfig data_cfg;
  synth::Manifest manifest;
};

Prepared prepare(const RunConfig& cfg, const EvalRequest& req) {
  cfg.validate();
  if (!fs::is_directory(req.dataset_dir))
    throw DataError("dataset directory " + req.dataset_dir.string() + " does not exist");
  if (!fs::is_regular_file(req.model_path))
    throw DataError("checkpoint " + req.model_path.string() + " does not exist");
  Prepared p{model::load_model(req.model_path),
             RunConfig::from_text(read_text(req.dataset_dir / synth::kConfigFile)),
             synth::Manifest::read(req.dataset_dir / synth::kManifestFile)};
  if (p.data_cfg.mode != task_of(p.model.config.model))
    throw DataError("model " + to_string(p.model.config.model) + " cannot be evaluated on a " +
                    to_string(p.data_cfg.mode) + " dataset");
  return p;
}

std::vector<synth::ManifestEntry> select_split(const synth::Manifest& m, synth::Split split) {
  std::vector<synth::ManifestEntry> out;
  for (const auto& e : m.entries)
    if (e.split == split) out.push_back(e);
  return out;
}

synth::Split checked_eval_split(const RunConfig& cfg) {
  const auto split = synth::parse_split(cfg.eval_split);
  if (split != synth::Split::test && !cfg.eval_force)
    throw UsageError("refusing to evaluate on the " + cfg.eval_split +
                     " split; set eval.force=true to override");
  return split;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json confusion_json(const Confusion& c) {
  json j;
  j["accuracy"] = c.total ? json(c.accuracy()) : json(nullptr);
  j["correct"] = c.correct;
  j["total"] = c.total;
  json rows = json::array();
  for (const auto& r : c.counts) rows.push_back(r);
  j["confusion"] = rows;
  return j;
}

std::vector<double> features_of(const ImageAnalysis& a, std::size_t count) {
  if (a.mask_values.empty()) return std::vector<double>(count, a.unmasked_mean);
  return base::extract_features(a.mask_values, count);
}

json baseline_report(const RunConfig& cfg, const fs::path& baseline_path,
                     const synth::Manifest& manifest, synth::Split eval_split,
                     img::ResampleMethod method, const EntryCallback& progress) {
  auto feat_model = model::load_model(baseline_path);
  if (feat_model.config.model != ModelKind::mask)
    throw UsageError("baseline features need a regression (mask) checkpoint, got " +
                     to_string(feat_model.config.model));
  std::vector<synth::ManifestEntry> fit_entries;
  for (const auto& e : manifest.entries)
    if (e.split != eval_split && e.split != synth::Split::test) fit_entries.push_back(e);
  const auto test_entries = select_split(manifest, eval_split);
  if (fit_entries.empty()) throw DataError("no training entries for the baseline classifiers");

  auto to_xy = [&](const std::vector<ImageAnalysis>& items, base::Matrix& x, std::vector<int>& y) {
    for (const auto& a : items) {
      x.push_back(features_of(a, cfg.baseline.feature_count));
      y.push_back(a.label_class);
    }
  };
  base::Matrix xtr, xte;
  std::vector<int> ytr, yte;
  to_xy(analyze_entries(feat_model.net, ModelKind::mask, fit_entries, cfg, method, progress), xtr, ytr);
  to_xy(analyze_entries(feat_model.net, ModelKind::mask, test_entries, cfg, method, progress), xte, yte);

  auto score = [&](auto&& predict) {
    std::vector<int> preds;
    for (const auto& r : xte) preds.push_back(predict(r));
    return accuracy_confusion(preds, yte);
  };
  json out;
  base::RandomForest forest;
  forest.fit(xtr, ytr, {cfg.baseline.trees, cfg.baseline.max_features, cfg.baseline.min_split, cfg.seed});
  out["random_forest"] = confusion_json(score([&](const base::Row& r) { return forest.predict(r); }));
  base::DecisionTree tree;
  tree.fit(xtr, ytr, {cfg.baseline.min_split, 0});
  out["decision_tree"] = confusion_json(score([&](const base::Row& r) { return tree.predict(r); }));
  base::GaussianNaiveBayes nb;
  nb.fit(xtr, ytr, cfg.baseline.nb_var_floor);
  out["naive_bayes"] = confusion_json(score([&](const base::Row& r) { return nb.predict(r); }));
  base::LogisticRegression lr;
  lr.fit(xtr, ytr, {cfg.baseline.logreg_l2, cfg.baseline.logreg_tol, cfg.baseline.logreg_max_iter});
  auto lr_json = confusion_json(score([&](const base::Row& r) { return lr.predict(r); }));
  lr_json["converged"] = lr.converged();
  lr_json["iterations"] = lr.iterations();
  out["logistic_regression"] = lr_json;
  out["train_items"] = xtr.size();
  return out;
}

}  // namespace

json run_eval(const RunConfig& cfg, const EvalRequest& req, const EntryCallback& progress) {
  const auto split = checked_eval_split(cfg);
  auto prep = prepare(cfg, req);
  if (req.baseline_model && !fs::is_regular_file(*req.baseline_model))
    throw DataError("baseline checkpoint " + req.baseline_model->string() + " does not exist");
  const auto entries = select_split(prep.manifest, split);
  if (entries.empty()) throw DataError("the " + cfg.eval_split + " split holds no entries");
  fs::create_directories(req.out_dir);

  const ModelKind kind = prep.model.config.model;
  const auto items = analyze_entries(prep.model.net, kind, entries, cfg, prep.data_cfg.resample, progress);

  json report;
  report["command"] = "eval";
  report["model"] = to_string(kind);
  report["split"] = cfg.eval_split;
  report["images"] = items.size();
  if (task_of(kind) == Task::classification) {
    const auto ev = evaluate_classes(items, cfg.image_pct, cfg.video_pct);
    report["image_pct"] = cfg.image_pct;
    report["video_pct"] = cfg.video_pct;
    report["image"] = confusion_json(ev.images);
    report["video"] = confusion_json(ev.videos);
    report["low_confidence_images"] = ev.low_confidence;
    const auto sweep = percentile_sweep(items, cfg.image_pct);
    write_sweep_csv(req.out_dir / kSweepFile, sweep);
    if (req.baseline_model)
      report["baselines"] = baseline_report(cfg, *req.baseline_model, prep.manifest, split,
                                            prep.data_cfg.resample, progress);
  } else {
    const auto ab = ablation_regression(items);
    json rows = json::array();
    rows.push_back({{"method", "Mask-CNN"}, {"r2", opt_json(ab.mask_r2)}});
    rows.push_back({{"method", "CNN without mask"}, {"r2", opt_json(ab.nomask_r2)}});
    rows.push_back({{"method", "CNN from corner-centered patches"}, {"r2", opt_json(ab.patch_r2)}});
    report["regression"] = rows;
    report["fallback_images"] = ab.fallback;
  }
  report["config"] = cfg.to_map();
  report["train_config"] = prep.model.config.to_map();
  write_text(req.out_dir / "report.json", report.dump(2) + "\n");
  return report;
}

std::vector<SweepPoint> run_sweep(const RunConfig& cfg, const EvalRequest& req,
                                  const EntryCallback& progress) {
  const auto split = checked_eval_split(cfg);
  auto prep = prepare(cfg, req);
  if (task_of(prep.model.config.model) != Task::classification)
    throw UsageError("percentile sweep needs a classification model");
  const auto entries = select_split(prep.manifest, split);
  if (entries.empty()) throw DataError("the " + cfg.eval_split + " split holds no entries");
  fs::create_directories(req.out_dir);
  const auto items = analyze_entries(prep.model.net, prep.model.config.model, entries, cfg,
                                     prep.data_cfg.resample, progress);
  auto sweep = percentile_sweep(items, cfg.image_pct);
  write_sweep_csv(req.out_dir / kSweepFile, sweep);
  return sweep;
}

void run_features(const RunConfig& cfg, const EvalRequest& req, const EntryCallback& progress) {
  cfg.validate();
  if (!fs::is_directory(req.dataset_dir))
    throw DataError("dataset directory " + req.dataset_dir.string() + " does not exist");
  auto model = model::load_model(req.model_path);
  if (model.config.model != ModelKind::mask)
    throw UsageError("features need a regression (mask) checkpoint, got " + to_string(model.config.model));
  const auto data_cfg = RunConfig::from_text(read_text(req.dataset_dir / synth::kConfigFile));
  const auto manifest = synth::Manifest::read(req.dataset_dir / synth::kManifestFile);
  fs::create_directories(req.out_dir);
  for (auto split : {synth::Split::train, synth::Split::val, synth::Split::test}) {
    const auto entries = select_split(manifest, split);
    const auto items = analyze_entries(model.net, ModelKind::mask, entries, cfg, data_cfg.resample, progress);
    std::string out;
    for (std::size_t i = 0; i < cfg.baseline.feature_count; ++i) out += "f" + std::to_string(i + 1) + ",";
    out += "label\n";
    for (const auto& a : items) {
      for (double v : features_of(a, cfg.baseline.feature_count)) out += format_double(v) + ",";
      out += data_cfg.mode == Task::classification ? std::to_string(a.label_class) : format_double(a.target);
      out += "\n";
    }
    write_text(req.out_dir / ("features_" + synth::to_string(split) + ".csv"), out);
  }
}

}  // namespace latres::te

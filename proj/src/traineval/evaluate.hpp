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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "config/run_config.hpp"
#include "imaging/plane.hpp"
#include "models/network.hpp"
#include "synth/dataset.hpp"
#include "traineval/metrics.hpp"

namespace latres::te {

// Patch path: classify every corner-centered patch. Mask path: read the
// FCN map at the propagated corner locations.
enum class Predictor { patch, mask };
Predictor predictor_for(ModelKind kind);

struct ImageAnalysis {
  std::uint32_t entry_id = 0;
  int label_class = 6;
  double target = 1.0;
  std::optional<std::string> video_id;
  std::size_t corner_count = 0;

  std::vector<int> unit_classes;    // classification units (patches or S)
  std::vector<double> mask_values;  // d=1 map values at S
  double unmasked_mean = 0.0;       // d=1 mean over the whole map
  std::vector<double> patch_values; // d=1 forward_patch per corner patch
};

// Runs one presented image through the model.
ImageAnalysis analyze_plane(model::Network<float>& net, ModelKind kind,
                            const img::Plane& plane, const RunConfig& cfg);

using EntryCallback = std::function<void(std::size_t done, std::size_t total)>;

// Renders and analyzes each entry; sources are loaded once per run of
// consecutive entries that share them.
std::vector<ImageAnalysis> analyze_entries(
    model::Network<float>& net, ModelKind kind,
    std::span<const synth::ManifestEntry> entries, const RunConfig& cfg,
    img::ResampleMethod method, const EntryCallback& progress = {});

struct ClassEval {
  Confusion images;
  Confusion videos;
  std::size_t low_confidence = 0;
};

ClassEval evaluate_classes(std::span<const ImageAnalysis> items,
                           double image_pct, double video_pct);

struct Ablation {
  std::optional<double> mask_r2;     // mean over S
  std::optional<double> nomask_r2;   // mean over the whole map
  std::optional<double> patch_r2;    // mean of forward_patch over patches
  std::size_t images = 0;
  std::size_t fallback = 0;          // images with no usable corners
};

// Images without corners predict the fallback value in every row. An R² is
// absent when the targets have no variance.
Ablation ablation_regression(std::span<const ImageAnalysis> items);

struct SweepPoint {
  std::string axis;  // "image" or "video"
  int percentile = 0;
  std::optional<double> accuracy;  // absent when the axis has no items
  std::size_t items = 0;
};

// Percentiles 10..90 on each axis. The video axis keeps frame verdicts at
// image_pct.
std::vector<SweepPoint> percentile_sweep(std::span<const ImageAnalysis> items,
                                         double image_pct);
void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepPoint> points);

struct Prediction {
  Task task = Task::classification;
  int cls = 6;
  double value = 1.0;
  bool low_confidence = false;
  std::size_t corners = 0;  // total over frames
  std::size_t frames = 1;
};

Prediction predict_image(model::Network<float>& net, ModelKind kind,
                         const img::Plane& plane, const RunConfig& cfg);
Prediction predict_video(model::Network<float>& net, ModelKind kind,
                         std::span<const img::Plane> frames,
                         const RunConfig& cfg);

struct EvalRequest {
  std::filesystem::path dataset_dir;
  std::filesystem::path model_path;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> baseline_model;  // d=1 feature model
};

// Writes report.json (and sweep.csv for classification models) and returns
// the report.
nlohmann::ordered_json run_eval(const RunConfig& cfg, const EvalRequest& req,
                                const EntryCallback& progress = {});
// Writes sweep.csv.
std::vector<SweepPoint> run_sweep(const RunConfig& cfg, const EvalRequest& req,
                                  const EntryCallback& progress = {});
// Writes features_<split>.csv for every split from a d=1 model.
void run_features(const RunConfig& cfg, const EvalRequest& req,
                  const EntryCallback& progress = {});

inline constexpr const char* kSweepFile = "sweep.csv";

}  // namespace latres::te

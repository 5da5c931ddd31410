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
#include <map>
#include <string>
#include <vector>

#include "imaging/corners.hpp"
#include "imaging/resample.hpp"

namespace latres {

enum class Task { classification, regression };
enum class ModelKind { softmax, mask_softmax, mask };

std::string to_string(Task task);
std::string to_string(ModelKind kind);
Task parse_task(const std::string& s);
ModelKind parse_model_kind(const std::string& s);
Task task_of(ModelKind kind);
std::size_t head_channels_of(ModelKind kind);

struct TrainSchedule {
  std::size_t epochs = 40;
  std::size_t batch0 = 32;
  std::size_t batch_double_every = 10;
  double lr0 = 1e-4;
  double lr_drop_factor = 10.0;
  std::size_t plateau_patience = 5;
  double plateau_min_delta = 1e-4;
  std::size_t max_lr_drops = 2;

  // batch0 * 2^floor(epoch / batch_double_every)
  std::size_t batch_size(std::size_t epoch) const;
};

struct BaselineParams {
  std::size_t feature_count = 50;
  std::size_t trees = 300;
  std::size_t max_features = 7;  // ~sqrt(50)
  std::size_t min_split = 2;
  double nb_var_floor = 1e-9;
  double logreg_l2 = 1e-4;
  double logreg_tol = 1e-5;
  std::size_t logreg_max_iter = 10000;
};

// Every tunable of the toolkit. Serialized as `key = value` lines; every
// emitted artifact carries a copy.
struct RunConfig {
  std::uint64_t seed = 1;
  bool deterministic = true;

  img::ResampleMethod resample = img::ResampleMethod::bicubic;
  img::HarrisParams harris;
  img::NmsParams nms;

  Task mode = Task::classification;
  std::size_t variants = 6;            // regression variants per source
  std::size_t patches_per_image = 32;  // 0 keeps every in-bounds corner
  std::size_t frames_per_video = 10;
  double train_fraction = 0.7;
  double val_fraction = 0.1;

  ModelKind model = ModelKind::softmax;
  std::string optimizer = "auto";  // auto | adam | sgd
  std::size_t input_channels = 1;
  std::string precision = "f32";
  TrainSchedule schedule;
  double sgd_momentum = 0.9;
  double sgd_weight_decay = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  double image_pct = 90.0;
  double video_pct = 70.0;
  std::size_t low_conf_corners = 10;
  std::string eval_split = "test";
  bool eval_force = false;

  BaselineParams baseline;

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  // Checks ranges and cross-field constraints.
  void validate() const;

  std::map<std::string, std::string> to_map() const;
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  void merge_text(const std::string& text);
  void merge_file(const std::filesystem::path& path);

  // Resolves optimizer=auto: SGD for the regression Mask-CNN, Adam otherwise.
  std::string resolved_optimizer() const;
};

std::string format_double(double v);

}  // namespace latres

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

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "config/run_config.hpp"
#include "imaging/plane.hpp"
#include "models/network.hpp"

namespace latres::te {

struct PatchSet {
  std::vector<img::Plane> patches;
  std::vector<float> labels;  // class 1..6 or regression target

  std::size_t size() const { return patches.size(); }
  bool empty() const { return patches.empty(); }
};

PatchSet load_patch_set(const std::filesystem::path& shard);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_metric = 0.0;
  double test_metric = 0.0;
  double val_metric = 0.0;
  double lr = 0.0;
  std::size_t batch_size = 0;
  double train_loss = 0.0;
};

struct TrainResult {
  model::Network<float> best;
  std::vector<EpochRecord> curves;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
  std::size_t lr_drops = 0;
  std::string optimizer;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Patch-level accuracy (classification) or R² (regression; NaN when the
// targets have no variance) in BN infer mode. Leaves the network in infer.
template <typename T>
double patch_metric(model::Network<T>& net, const PatchSet& set, Task task);

// Runs the full schedule and keeps the weights with the best validation
// metric. An empty val set falls back to the train metric.
TrainResult train_network(const RunConfig& cfg, const PatchSet& train,
                          const PatchSet& val, const PatchSet& test,
                          const EpochCallback& on_epoch = {});

// epoch,train_metric,test_metric,val_metric,lr,batch_size,train_loss
void write_curves_csv(const std::filesystem::path& path,
                      std::span<const EpochRecord> curves);

inline constexpr const char* kModelFile = "model.lres";
inline constexpr const char* kCurvesFile = "curves.csv";
inline constexpr const char* kReportFile = "report.json";

// Trains cfg.model on a synth dataset directory; writes model.lres,
// curves.csv, report.json and config.txt into out_dir.
TrainResult train_from_dataset(const RunConfig& cfg,
                               const std::filesystem::path& dataset_dir,
                               const std::filesystem::path& out_dir,
                               const EpochCallback& on_epoch = {});

}  // namespace latres::te

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

#include "config/run_config.hpp"
#include "models/network.hpp"

namespace latres::model {

inline constexpr const char* kConfigRecord = "__config__";

struct LoadedModel {
  Network<float> net;
  RunConfig config;  // config the weights were trained with
};

// Weights plus the producing RunConfig as a text record.
void save_model(const std::filesystem::path& path, const Network<float>& net,
                const RunConfig& cfg);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace latres::model

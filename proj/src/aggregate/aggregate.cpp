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

#include "aggregate/aggregate.hpp"

namespace latres::agg {

int image_class(std::span<const int> classes, double pct) {
  if (classes.empty()) throw DataError("no corners: nothing to aggregate for this image");
  for (int c : classes)
    if (c < 1 || c > 6) throw DataError("class index " + std::to_string(c) + " outside 1..6");
  return percentile(classes, pct);
}

ClassVerdict image_class_or_fallback(std::span<const int> classes, double pct) {
  if (classes.empty()) return {kFallbackClass, true};
  return {image_class(classes, pct), false};
}

double image_reg(const model::OutputMap& map,
                 std::span<const model::Location> locations) {
  if (map.depth() != 1)
    throw UsageError("image_reg needs a d=1 map, got d=" + std::to_string(map.depth()));
  if (locations.empty()) throw DataError("image_reg: empty location set");
  double sum = 0.0;
  for (const auto& l : locations) sum += map.at(0, l.y, l.x);
  return sum / static_cast<double>(locations.size());
}

double image_reg_unmasked(const model::OutputMap& map) {
  if (map.depth() != 1)
    throw UsageError("image_reg_unmasked needs a d=1 map, got d=" + std::to_string(map.depth()));
  double sum = 0.0;
  for (float v : map.values.data()) sum += v;
  return sum / static_cast<double>(map.values.numel());
}

int video_class(std::span<const int> frame_classes, double pct) {
  if (frame_classes.empty()) throw DataError("video has no frame predictions");
  return percentile(frame_classes, pct);
}

double video_value(std::span<const double> frame_values, double pct) {
  if (frame_values.empty()) throw DataError("video has no frame predictions");
  return percentile(frame_values, pct);
}

int argmax_class(std::span<const float> scores) {
  if (scores.empty()) throw DimensionError("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<int>(best) + 1;
}

int argmax_class(const model::OutputMap& map, const model::Location& at) {
  std::size_t best = 0;
  for (std::size_t ch = 1; ch < map.depth(); ++ch)
    if (map.at(ch, at.y, at.x) > map.at(best, at.y, at.x)) best = ch;
  return static_cast<int>(best) + 1;
}

}  // namespace latres::agg

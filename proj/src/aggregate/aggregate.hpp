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

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "models/inference.hpp"
#include "util/errors.hpp"

namespace latres::agg {

inline constexpr double kImagePercentile = 90.0;
inline constexpr double kVideoPercentile = 70.0;
inline constexpr int kFallbackClass = 6;
inline constexpr double kFallbackValue = 1.0;

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest element
// (1-based, clamped to [1,n]); p = 0 gives the minimum.
template <typename V>
V percentile(std::span<const V> values, double p) {
  if (values.empty()) throw DataError("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0))
    throw UsageError("percentile p=" + std::to_string(p) + " outside [0,100]");
  std::vector<V> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Guard ceil against 0.9*10 landing at 9.000000000000002.
  const double rank = std::ceil(p / 100.0 * n - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, n)) - 1;
  return sorted[idx];
}

template <typename V>
V percentile(const std::vector<V>& values, double p) {
  return percentile(std::span<const V>(values), p);
}

struct ClassVerdict {
  int cls = kFallbackClass;
  bool low_confidence = false;
};

struct ValueVerdict {
  double value = kFallbackValue;
  bool low_confidence = false;
};

// Per-unit class predictions (1..6) to one class. Throws on empty input.
int image_class(std::span<const int> classes, double pct = kImagePercentile);

// As image_class, but an empty set yields class 6 flagged low-confidence.
ClassVerdict image_class_or_fallback(std::span<const int> classes,
                                     double pct = kImagePercentile);

// Mean of a d=1 output map over the locations S.
double image_reg(const model::OutputMap& map,
                 std::span<const model::Location> locations);

// Mean over every cell of the d=1 map (no mask).
double image_reg_unmasked(const model::OutputMap& map);

int video_class(std::span<const int> frame_classes,
                double pct = kVideoPercentile);
double video_value(std::span<const double> frame_values,
                   double pct = kVideoPercentile);

// 1-based argmax over channels at one map cell; ties go to the lower class.
int argmax_class(const model::OutputMap& map, const model::Location& at);
int argmax_class(std::span<const float> scores);

}  // namespace latres::agg

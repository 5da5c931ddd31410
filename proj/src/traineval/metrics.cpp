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

#include "traineval/metrics.hpp"

#include <string>

#include "util/errors.hpp"

namespace latres::te {

double r_squared(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size())
    throw UsageError("r_squared: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(targets.size()) + " targets");
  if (targets.size() < 2) throw DataError("r_squared: need at least 2 targets");
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
    ss_res += (targets[i] - preds[i]) * (targets[i] - preds[i]);
  }
  if (ss_tot == 0.0) throw NumericError("r_squared: targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double Confusion::accuracy() const {
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::size_t Confusion::row_sum(int label) const {
  std::size_t s = 0;
  for (auto c : counts.at(static_cast<std::size_t>(label - 1))) s += c;
  return s;
}

Confusion accuracy_confusion(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size())
    throw UsageError("accuracy_confusion: " + std::to_string(preds.size()) +
                     " predictions vs " + std::to_string(labels.size()) + " labels");
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 1 || preds[i] > 6 || labels[i] < 1 || labels[i] > 6)
      throw UsageError("accuracy_confusion: class outside 1..6");
    ++c.counts[static_cast<std::size_t>(labels[i] - 1)][static_cast<std::size_t>(preds[i] - 1)];
    if (preds[i] == labels[i]) ++c.correct;
  }
  c.total = preds.size();
  return c;
}

}  // namespace latres::te

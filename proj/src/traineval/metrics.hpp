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

#include <array>
#include <span>
#include <vector>

namespace latres::te {

// 1 - SS_res/SS_tot. Throws NumericError when the targets have no variance.
double r_squared(std::span<const double> preds, std::span<const double> targets);

struct Confusion {
  // counts[label-1][pred-1]
  std::array<std::array<std::size_t, 6>, 6> counts{};
  std::size_t total = 0;
  std::size_t correct = 0;

  double accuracy() const;
  std::size_t row_sum(int label) const;
};

// Classes are 1..6.
Confusion accuracy_confusion(std::span<const int> preds,
                             std::span<const int> labels);

}  // namespace latres::te

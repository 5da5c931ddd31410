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

#include <iosfwd>
#include <vector>

#include "imaging/plane.hpp"

namespace latres::img {

struct HarrisParams {
  double kappa = 0.05;
  double sigma = 1.5;  // Gaussian window, truncated at ceil(3*sigma)
};

struct NmsParams {
  std::size_t radius = 10;  // Chebyshev
  double rel_threshold = 0.01;
  std::size_t max_corners = 200;
};

struct ResponseMap {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * w + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * w + c]; }
};

inline constexpr std::size_t kHarrisMinSide = 7;

// det(S) - kappa*trace(S)^2 of the Gaussian-smoothed structure tensor of
// 3x3 Sobel gradients. Borders are replicated.
ResponseMap harris(const Plane& plane, const HarrisParams& params = {});

// Greedy non-maximal suppression: candidates are maxima of their
// (2r+1)^2 window above rel_threshold*max, accepted in descending response
// order (row-major on ties) when farther than r from every accepted point.
CornerSet nms(const ResponseMap& response, const NmsParams& params = {});

CornerSet detect_corners(const Plane& plane, const HarrisParams& harris_params,
                         const NmsParams& nms_params);

// row,col,response
void write_corners_csv(std::ostream& out, const CornerSet& corners);

}  // namespace latres::img

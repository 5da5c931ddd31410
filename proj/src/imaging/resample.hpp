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

#include <string>

#include "imaging/plane.hpp"

namespace latres::img {

enum class ResampleMethod { bilinear, bicubic };

ResampleMethod parse_resample_method(const std::string& name);
std::string to_string(ResampleMethod method);

// Separable resampling with pixel-center alignment. When shrinking, the
// kernel is widened by the scale factor so the result is antialiased.
// Output samples are clamped to [0,1].
Plane resample(const Plane& plane, std::size_t out_h, std::size_t out_w,
               ResampleMethod method);

// Minimum intermediate size accepted by degrade().
inline constexpr std::size_t kDegradeMinSide = 8;

// Down-scales by factor k, then up-scales back to the original dims.
// k == 1 returns the input unchanged.
Plane degrade(const Plane& plane, double k, ResampleMethod method);

}  // namespace latres::img

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

#include "imaging/plane.hpp"

#include <algorithm>
#include <numeric>

namespace latres::img {

std::string dims(std::size_t h, std::size_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

Plane::Plane(std::size_t h, std::size_t w, float fill)
    : h_(h), w_(w), samples_(h * w, fill) {
  if (h == 0 || w == 0) throw DimensionError("plane dims must be >= 1, got " + dims(h, w));
}

Plane::Plane(std::size_t h, std::size_t w, std::vector<float> samples)
    : h_(h), w_(w), samples_(std::move(samples)) {
  if (h == 0 || w == 0) throw DimensionError("plane dims must be >= 1, got " + dims(h, w));
  if (samples_.size() != h * w)
    throw DimensionError("plane " + dims(h, w) + " given " +
                         std::to_string(samples_.size()) + " samples");
}

void Plane::clamp() {
  for (float& v : samples_) v = std::clamp(v, 0.0f, 1.0f);
}

Plane Plane::crop(std::size_t top, std::size_t left, std::size_t h,
                  std::size_t w) const {
  if (top + h > h_ || left + w > w_)
    throw DimensionError("crop " + dims(h, w) + " at (" + std::to_string(top) +
                         "," + std::to_string(left) + ") exceeds plane " +
                         dims(h_, w_));
  Plane out(h, w);
  for (std::size_t r = 0; r < h; ++r)
    std::copy_n(samples_.begin() + (top + r) * w_ + left, w,
                out.samples_.begin() + r * w);
  return out;
}

double mean_squared_error(const Plane& a, const Plane& b) {
  if (a.height() != b.height() || a.width() != b.width())
    throw DimensionError("mse: plane " + dims(a.height(), a.width()) + " vs " +
                         dims(b.height(), b.width()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.samples()[i]) - b.samples()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

Mask Mask::from_corners(const CornerSet& corners) {
  Mask m(corners.h, corners.w);
  for (const Corner& c : corners.points) {
    if (c.row >= corners.h || c.col >= corners.w)
      throw DimensionError("corner (" + std::to_string(c.row) + "," +
                           std::to_string(c.col) + ") outside " +
                           dims(corners.h, corners.w));
    m.set(c.row, c.col);
  }
  return m;
}

std::size_t Mask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

}  // namespace latres::img

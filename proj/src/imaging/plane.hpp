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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "util/errors.hpp"

namespace latres::img {

// Single-channel luma grid, row-major, samples in [0,1].
class Plane {
 public:
  Plane() = default;
  Plane(std::size_t h, std::size_t w, float fill = 0.0f);
  Plane(std::size_t h, std::size_t w, std::vector<float> samples);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  float& at(std::size_t r, std::size_t c) { return samples_[r * w_ + c]; }
  float at(std::size_t r, std::size_t c) const { return samples_[r * w_ + c]; }
  std::span<float> samples() { return samples_; }
  std::span<const float> samples() const { return samples_; }

  // Clamps every sample into [0,1].
  void clamp();

  Plane crop(std::size_t top, std::size_t left, std::size_t h,
             std::size_t w) const;

  bool operator==(const Plane&) const = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<float> samples_;
};

std::string dims(std::size_t h, std::size_t w);

double mean_squared_error(const Plane& a, const Plane& b);

struct Corner {
  std::size_t row = 0;
  std::size_t col = 0;
  double response = 0.0;
  bool operator==(const Corner&) const = default;
};

// Sorted by descending response; pairwise Chebyshev distance > NMS radius.
struct CornerSet {
  std::vector<Corner> points;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

class Mask {
 public:
  Mask() = default;
  Mask(std::size_t h, std::size_t w) : h_(h), w_(w), bits_(h * w, 0) {}

  static Mask from_corners(const CornerSet& corners);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  bool at(std::size_t r, std::size_t c) const { return bits_[r * w_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v = true) {
    bits_[r * w_ + c] = v ? 1 : 0;
  }
  std::size_t popcount() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator==(const Mask&) const = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace latres::img

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

#include <span>
#include <vector>

#include "imaging/plane.hpp"
#include "models/network.hpp"

namespace latres::model {

// FCN output M (1 × d × p × q) and the dims of the image it came from.
struct OutputMap {
  nk::Tensor<float> values;
  std::size_t src_h = 0;
  std::size_t src_w = 0;

  std::size_t rows() const { return values.shape().h; }
  std::size_t cols() const { return values.shape().w; }
  std::size_t depth() const { return values.shape().c; }
  float at(std::size_t ch, std::size_t y, std::size_t x) const {
    return values.at(0, ch, y, x);
  }
};

struct Location {
  std::size_t y = 0;
  std::size_t x = 0;
  bool operator==(const Location&) const = default;
};

// Stacks equally sized planes into an n × 1 × h × w tensor.
nk::Tensor<float> planes_to_tensor(std::span<const img::Plane> planes);

// d outputs for one 64×64 patch, using the network's current BN mode.
std::vector<float> forward_patch(Network<float>& net, const img::Plane& patch);

// Runs the network fully convolutionally over an image of at least 64×64.
OutputMap forward_map(Network<float>& net, const img::Plane& image);

// Crop/OR-pool transform of an input-aligned mask through the network's
// conv and pool steps. A k×k conv removes ceil((k-1)/2) rows/cols at the
// top/left and floor((k-1)/2) at the bottom/right.
img::Mask propagate_mask(const Architecture& arch, const img::Mask& mask);

// Nonzero cells in row-major order.
std::vector<Location> mask_locations(const img::Mask& mask);

// Input row/col of the top-left of the receptive window of map cell (y,x).
inline std::size_t window_origin(std::size_t map_index) {
  return map_index * kMapStride;
}

}  // namespace latres::model

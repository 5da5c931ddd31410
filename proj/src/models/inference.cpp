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

#include "models/inference.hpp"

#include <algorithm>

namespace latres::model {

nk::Tensor<float> planes_to_tensor(std::span<const img::Plane> planes) {
  if (planes.empty()) throw UsageError("planes_to_tensor: no planes");
  const std::size_t h = planes[0].height(), w = planes[0].width();
  nk::Tensor<float> t({planes.size(), 1, h, w});
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (planes[i].height() != h || planes[i].width() != w)
      throw DimensionError("planes_to_tensor: plane " +
                           img::dims(planes[i].height(), planes[i].width()) +
                           " vs " + img::dims(h, w));
    std::copy(planes[i].samples().begin(), planes[i].samples().end(),
              t.raw() + i * h * w);
  }
  return t;
}

std::vector<float> forward_patch(Network<float>& net, const img::Plane& patch) {
  if (patch.height() != kPatchSize || patch.width() != kPatchSize)
    throw DimensionError("forward_patch: patch " +
                         img::dims(patch.height(), patch.width()) + " is not 64x64");
  const auto out = net.forward(planes_to_tensor(std::span(&patch, 1)), false);
  return {out.data().begin(), out.data().end()};
}

OutputMap forward_map(Network<float>& net, const img::Plane& image) {
  if (image.height() < kPatchSize || image.width() < kPatchSize)
    throw DimensionError("forward_map: image " +
                         img::dims(image.height(), image.width()) +
                         " is smaller than 64x64");
  OutputMap m;
  m.values = net.forward(planes_to_tensor(std::span(&image, 1)), false);
  m.src_h = image.height();
  m.src_w = image.width();
  return m;
}

img::Mask propagate_mask(const Architecture& arch, const img::Mask& mask) {
  img::Mask cur = mask;
  for (const Step& s : arch.steps) {
    if (s.kind == Step::Kind::conv) {
      const std::size_t lead = s.kernel / 2;         // ceil((k-1)/2)
      const std::size_t trail = (s.kernel - 1) / 2;  // floor((k-1)/2)
      if (cur.height() < s.kernel || cur.width() < s.kernel)
        throw DimensionError("propagate_mask: mask " +
                             img::dims(cur.height(), cur.width()) +
                             " smaller than kernel " + std::to_string(s.kernel));
      img::Mask next(cur.height() - lead - trail, cur.width() - lead - trail);
      for (std::size_t r = 0; r < next.height(); ++r)
        for (std::size_t c = 0; c < next.width(); ++c)
          if (cur.at(r + lead, c + lead)) next.set(r, c);
      cur = std::move(next);
    } else if (s.kind == Step::Kind::pool2) {
      img::Mask next(cur.height() / 2, cur.width() / 2);
      for (std::size_t r = 0; r < next.height(); ++r)
        for (std::size_t c = 0; c < next.width(); ++c)
          if (cur.at(2 * r, 2 * c) || cur.at(2 * r, 2 * c + 1) ||
              cur.at(2 * r + 1, 2 * c) || cur.at(2 * r + 1, 2 * c + 1))
            next.set(r, c);
      cur = std::move(next);
    }
  }
  return cur;
}

std::vector<Location> mask_locations(const img::Mask& mask) {
  std::vector<Location> out;
  for (std::size_t r = 0; r < mask.height(); ++r)
    for (std::size_t c = 0; c < mask.width(); ++c)
      if (mask.at(r, c)) out.push_back({r, c});
  return out;
}

}  // namespace latres::model

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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "imaging/plane.hpp"

namespace latres::img {

struct RgbImage {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

struct LoadedImage {
  Plane luma;
  RgbImage rgb;  // kept for provenance
};

// Decodes PNG or JPEG (by content signature) and converts to BT.601 luma.
LoadedImage load_image(const std::filesystem::path& path);
Plane load_luma(const std::filesystem::path& path);

Plane luma_from_rgb(const RgbImage& image);

bool is_image_file(const std::filesystem::path& path);

void save_png(const std::filesystem::path& path, const RgbImage& image);
// Writes the plane as 8-bit gray replicated into RGB.
void save_png(const std::filesystem::path& path, const Plane& plane);

}  // namespace latres::img

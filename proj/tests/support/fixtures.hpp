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
#include <random>

#include "imaging/plane.hpp"
#include "models/network.hpp"

namespace latres::testing {

// Randomly initialized network with non-trivial BN running statistics, put
// in infer mode.
inline model::Network<float> random_infer_net(std::size_t d, std::uint64_t seed) {
  model::Network<float> net(d);
  net.init(seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  for (auto& l : net.layers()) {
    for (auto& b : l.bias.data()) b = u(rng);
    if (!l.has_bn) continue;
    for (auto& g : l.bn_gamma.data()) g = 1.0f + u(rng);
    for (auto& b : l.bn_beta.data()) b = u(rng);
    for (auto& m : l.bn_running_mean) m = u(rng);
    for (auto& v : l.bn_running_var) v = 0.5f + (u(rng) + 0.5f);
  }
  net.set_mode(nk::Mode::infer);
  return net;
}

inline img::Plane random_plane(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  img::Plane p(h, w);
  for (auto& v : p.samples()) v = u(rng);
  return p;
}

}  // namespace latres::testing

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
#include <string>
#include <vector>

#include "numkernel/checkpoint.hpp"
#include "numkernel/ops.hpp"
#include "numkernel/tensor.hpp"

namespace latres::model {

struct Step {
  enum class Kind { conv, bn, pool2, relu };
  Kind kind;
  std::size_t out_ch = 0;  // conv
  std::size_t kernel = 0;  // conv
  std::size_t layer = 0;   // index of the conv/bn parameter block
};

// conv(16,5)+bn, conv(16,5)+bn, pool2, conv(32,5)+bn, pool2,
// conv(32,5)+bn, relu, conv(d,8)
struct Architecture {
  std::size_t in_channels = 1;
  std::size_t head_channels = 6;
  std::vector<Step> steps;

  static Architecture standard(std::size_t head_channels,
                               std::size_t in_channels = 1);
  std::string describe() const;
};

inline constexpr std::size_t kPatchSize = 64;
inline constexpr std::size_t kMapStride = 4;

// Output-map side length for an input side t (t >= 64).
std::size_t shape_fn(std::size_t t);

template <typename T>
class Network {
 public:
  explicit Network(std::size_t head_channels, std::size_t in_channels = 1);

  const Architecture& architecture() const { return arch_; }
  std::size_t head_channels() const { return arch_.head_channels; }
  std::size_t in_channels() const { return arch_.in_channels; }

  void init(std::uint64_t seed);
  void set_mode(nk::Mode mode);
  nk::Mode mode() const { return mode_; }
  void set_bn_hyper(T momentum, T eps);

  // keep_cache retains activations for backward().
  nk::Tensor<T> forward(const nk::Tensor<T>& input, bool keep_cache = true);
  // Accumulates parameter gradients; returns the input gradient when asked.
  nk::Tensor<T> backward(const nk::Tensor<T>& out_grad,
                         bool want_input_grad = false);
  bool has_cache() const { return !cache_.inputs.empty(); }
  void clear_cache() { cache_ = {}; }

  std::vector<nk::Tensor<T>*> parameters();
  void zero_grad();

  std::vector<nk::LayerParams<T>>& layers() { return layers_; }
  const std::vector<nk::LayerParams<T>>& layers() const { return layers_; }

  std::vector<nk::Record> to_records() const;
  static Network from_records(const std::vector<nk::Record>& records);

  template <typename U>
  Network<U> cast() const;

 private:
  struct Cache {
    std::vector<nk::Tensor<T>> inputs;  // input of every step
    std::vector<nk::BatchNormCache<T>> bn;
    std::vector<nk::PoolIndices> pool;
  };

  Architecture arch_;
  std::vector<nk::LayerParams<T>> layers_;
  nk::Mode mode_ = nk::Mode::train;
  Cache cache_;
};

template <typename T>
template <typename U>
Network<U> Network<T>::cast() const {
  Network<U> out(arch_.head_channels, arch_.in_channels);
  auto& dst = out.layers();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto copy = [](const nk::Tensor<T>& src, nk::Tensor<U>& d) {
      for (std::size_t j = 0; j < src.numel(); ++j) d[j] = static_cast<U>(src[j]);
    };
    copy(layers_[i].weight, dst[i].weight);
    copy(layers_[i].bias, dst[i].bias);
    if (layers_[i].has_bn) {
      copy(layers_[i].bn_gamma, dst[i].bn_gamma);
      copy(layers_[i].bn_beta, dst[i].bn_beta);
      for (std::size_t c = 0; c < layers_[i].out_ch; ++c) {
        dst[i].bn_running_mean[c] = static_cast<U>(layers_[i].bn_running_mean[c]);
        dst[i].bn_running_var[c] = static_cast<U>(layers_[i].bn_running_var[c]);
      }
      dst[i].bn_momentum = static_cast<U>(layers_[i].bn_momentum);
      dst[i].bn_eps = static_cast<U>(layers_[i].bn_eps);
    }
  }
  out.set_mode(mode_);
  return out;
}

}  // namespace latres::model

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
#include <span>
#include <vector>

#include "numkernel/tensor.hpp"

namespace latres::nk {

enum class Mode { train, infer };

// One convolution and the batch normalization that follows it.
template <typename T>
struct LayerParams {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 0;
  bool has_bn = false;

  Tensor<T> weight;  // out_ch × in_ch × k × k
  Tensor<T> bias;    // 1 × out_ch × 1 × 1
  Tensor<T> bn_gamma;
  Tensor<T> bn_beta;
  std::vector<T> bn_running_mean;
  std::vector<T> bn_running_var;
  T bn_momentum = T(0.1);
  T bn_eps = T(1e-5);
  Mode mode = Mode::train;

  static LayerParams make(std::size_t in_ch, std::size_t out_ch,
                          std::size_t kernel, bool has_bn);

  // Kaiming normal on the weights, zero bias, identity BN.
  void init(std::mt19937_64& rng);

  // Trainable tensors in a fixed order.
  std::vector<Tensor<T>*> trainable();
};

// Valid (unpadded) stride-1 convolution.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const LayerParams<T>& params);

// Accumulates into params.weight/bias grads. Writes the input gradient to
// `input_grad` when it is non-null.
template <typename T>
void conv2d_backward(const Tensor<T>& input, LayerParams<T>& params,
                     const Tensor<T>& out_grad, Tensor<T>* input_grad);

struct PoolIndices {
  Shape input_shape;
  std::vector<std::uint32_t> argmax;  // flat input offset per output cell
};

template <typename T>
struct PoolResult {
  Tensor<T> output;
  PoolIndices indices;
};

// 2×2 stride-2 max pooling; an odd trailing row/column is dropped.
template <typename T>
PoolResult<T> maxpool2(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& out_grad,
                            const PoolIndices& indices);

template <typename T>
struct BatchNormCache {
  Mode mode = Mode::train;
  Tensor<T> normalized;
  std::vector<T> inv_std;
};

// Uses params.mode. In train mode the running statistics are updated.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, LayerParams<T>& params,
                    BatchNormCache<T>* cache);

template <typename T>
Tensor<T> batchnorm_backward(const Tensor<T>& out_grad,
                             LayerParams<T>& params,
                             const BatchNormCache<T>& cache);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& out_grad);

template <typename T>
struct LossResult {
  T loss = T{0};
  Tensor<T> grad;
};

// Mean cross-entropy over the batch. `logits` is n × d × 1 × 1 and labels are
// 1-based class indices.
template <typename T>
LossResult<T> softmax_xent(const Tensor<T>& logits,
                           std::span<const int> labels);

template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace latres::nk

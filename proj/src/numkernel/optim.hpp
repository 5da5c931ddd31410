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

#include "numkernel/tensor.hpp"

namespace latres::nk {

enum class OptimizerKind { sgd_momentum, adam };

template <typename T>
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  T lr = T(1e-4);
  T momentum = T(0.9);
  T weight_decay = T(1e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);
  std::size_t steps = 0;
  // One buffer per parameter tensor, lazily sized on the first step.
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// v <- momentum*v + (g + weight_decay*theta); theta <- theta - lr*v
template <typename T>
void sgd_step(std::span<Tensor<T>* const> params, OptimizerState<T>& state);

// Bias-corrected Adam, no weight decay.
template <typename T>
void adam_step(std::span<Tensor<T>* const> params, OptimizerState<T>& state);

template <typename T>
void optimizer_step(std::span<Tensor<T>* const> params,
                    OptimizerState<T>& state);

}  // namespace latres::nk

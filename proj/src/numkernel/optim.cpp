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

#include "numkernel/optim.hpp"

#include <cmath>

namespace latres::nk {

namespace {

template <typename T>
void prepare(std::span<Tensor<T>* const> params, OptimizerState<T>& state,
             bool second) {
  if (!(state.lr > T{0})) throw UsageError("optimizer: learning rate must be > 0");
  if (state.first_moment.empty()) {
    for (const Tensor<T>* p : params) {
      state.first_moment.emplace_back(p->numel(), T{0});
      if (second) state.second_moment.emplace_back(p->numel(), T{0});
    }
  }
  if (state.first_moment.size() != params.size())
    throw DimensionError("optimizer: state tracks " +
                         std::to_string(state.first_moment.size()) +
                         " tensors, step given " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.first_moment[i].size() != params[i]->numel())
      throw DimensionError("optimizer: moment buffer size mismatch for tensor " +
                           params[i]->shape().str());
  }
}

}  // namespace

template <typename T>
void sgd_step(std::span<Tensor<T>* const> params, OptimizerState<T>& state) {
  if (state.kind != OptimizerKind::sgd_momentum)
    throw UsageError("sgd_step called with non-SGD optimizer state");
  prepare(params, state, false);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto& v = state.first_moment[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      v[j] = state.momentum * v[j] + (g[j] + state.weight_decay * p[j]);
      p[j] -= state.lr * v[j];
    }
  }
  ++state.steps;
}

template <typename T>
void adam_step(std::span<Tensor<T>* const> params, OptimizerState<T>& state) {
  if (state.kind != OptimizerKind::adam)
    throw UsageError("adam_step called with non-Adam optimizer state");
  prepare(params, state, true);
  ++state.steps;
  const T t = static_cast<T>(state.steps);
  const T c1 = T{1} - std::pow(state.beta1, t);
  const T c2 = T{1} - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      m[j] = state.beta1 * m[j] + (T{1} - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (T{1} - state.beta2) * g[j] * g[j];
      const T mhat = m[j] / c1;
      const T vhat = v[j] / c2;
      p[j] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

template <typename T>
void optimizer_step(std::span<Tensor<T>* const> params, OptimizerState<T>& state) {
  if (state.kind == OptimizerKind::adam)
    adam_step(params, state);
  else
    sgd_step(params, state);
}

template void sgd_step(std::span<Tensor<float>* const>, OptimizerState<float>&);
template void sgd_step(std::span<Tensor<double>* const>, OptimizerState<double>&);
template void adam_step(std::span<Tensor<float>* const>, OptimizerState<float>&);
template void adam_step(std::span<Tensor<double>* const>, OptimizerState<double>&);
template void optimizer_step(std::span<Tensor<float>* const>, OptimizerState<float>&);
template void optimizer_step(std::span<Tensor<double>* const>, OptimizerState<double>&);

}  // namespace latres::nk

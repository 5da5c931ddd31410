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

#include "models/network.hpp"

#include <map>
#include <sstream>

namespace latres::model {

using nk::Mode;
using nk::Tensor;

Architecture Architecture::standard(std::size_t head_channels,
                                    std::size_t in_channels) {
  if (head_channels == 0 || in_channels == 0)
    throw UsageError("architecture: channel counts must be positive");
  using K = Step::Kind;
  Architecture a;
  a.in_channels = in_channels;
  a.head_channels = head_channels;
  a.steps = {
      {K::conv, 16, 5, 0}, {K::bn, 0, 0, 0},
      {K::conv, 16, 5, 1}, {K::bn, 0, 0, 1}, {K::pool2, 0, 0, 0},
      {K::conv, 32, 5, 2}, {K::bn, 0, 0, 2}, {K::pool2, 0, 0, 0},
      {K::conv, 32, 5, 3}, {K::bn, 0, 0, 3}, {K::relu, 0, 0, 0},
      {K::conv, head_channels, 8, 4},
  };
  return a;
}

std::string Architecture::describe() const {
  std::ostringstream os;
  os << "input: " << in_channels << " channel(s), 64x64 patch or any image >= 64x64\n";
  std::size_t side = kPatchSize;
  std::size_t ch = in_channels;
  for (const Step& s : steps) {
    switch (s.kind) {
      case Step::Kind::conv:
        side = side - s.kernel + 1;
        os << "  conv " << s.kernel << "x" << s.kernel << "  " << ch << " -> " << s.out_ch;
        ch = s.out_ch;
        break;
      case Step::Kind::bn: os << "  batchnorm"; break;
      case Step::Kind::pool2:
        side /= 2;
        os << "  maxpool 2x2/2";
        break;
      case Step::Kind::relu: os << "  relu"; break;
    }
    os << "  (64x64 input -> " << side << "x" << side << "x" << ch << ")\n";
  }
  return os.str();
}

std::size_t shape_fn(std::size_t t) {
  if (t < kPatchSize)
    throw DimensionError("shape_fn: input side " + std::to_string(t) +
                         " is below the 64 px minimum");
  return ((t - 8) / 2 - 4) / 2 - 11;
}

template <typename T>
Network<T>::Network(std::size_t head_channels, std::size_t in_channels)
    : arch_(Architecture::standard(head_channels, in_channels)) {
  std::size_t ch = in_channels;
  for (const Step& s : arch_.steps) {
    if (s.kind != Step::Kind::conv) continue;
    const bool bn = s.layer < 4;  // the head conv has no BN
    layers_.push_back(nk::LayerParams<T>::make(ch, s.out_ch, s.kernel, bn));
    ch = s.out_ch;
  }
}

template <typename T>
void Network<T>::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& l : layers_) l.init(rng);
}

template <typename T>
void Network<T>::set_mode(Mode mode) {
  mode_ = mode;
  for (auto& l : layers_) l.mode = mode;
}

template <typename T>
void Network<T>::set_bn_hyper(T momentum, T eps) {
  for (auto& l : layers_) {
    l.bn_momentum = momentum;
    l.bn_eps = eps;
  }
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input, bool keep_cache) {
  if (input.shape().c != arch_.in_channels)
    throw DimensionError("network: input " + input.shape().str() + " expects " +
                         std::to_string(arch_.in_channels) + " channel(s)");
  cache_ = {};
  Tensor<T> x = input;
  for (const Step& s : arch_.steps) {
    if (keep_cache) cache_.inputs.push_back(x);
    switch (s.kind) {
      case Step::Kind::conv:
        x = nk::conv2d(x, layers_[s.layer]);
        break;
      case Step::Kind::bn: {
        nk::BatchNormCache<T> bc;
        x = nk::batchnorm(x, layers_[s.layer], keep_cache ? &bc : nullptr);
        if (keep_cache) cache_.bn.push_back(std::move(bc));
        break;
      }
      case Step::Kind::pool2: {
        auto r = nk::maxpool2(x);
        x = std::move(r.output);
        if (keep_cache) cache_.pool.push_back(std::move(r.indices));
        break;
      }
      case Step::Kind::relu:
        x = nk::relu(x);
        break;
    }
  }
  return x;
}

template <typename T>
Tensor<T> Network<T>::backward(const Tensor<T>& out_grad, bool want_input_grad) {
  if (cache_.inputs.size() != arch_.steps.size())
    throw UsageError("network: backward called before a cached forward pass");
  Tensor<T> g = out_grad;
  std::size_t bn_i = cache_.bn.size(), pool_i = cache_.pool.size();
  for (std::size_t i = arch_.steps.size(); i-- > 0;) {
    const Step& s = arch_.steps[i];
    const Tensor<T>& in = cache_.inputs[i];
    switch (s.kind) {
      case Step::Kind::conv: {
        const bool need = i > 0 || want_input_grad;
        Tensor<T> din;
        nk::conv2d_backward(in, layers_[s.layer], g, need ? &din : nullptr);
        g = std::move(din);
        break;
      }
      case Step::Kind::bn:
        g = nk::batchnorm_backward(g, layers_[s.layer], cache_.bn[--bn_i]);
        break;
      case Step::Kind::pool2:
        g = nk::maxpool2_backward(g, cache_.pool[--pool_i]);
        break;
      case Step::Kind::relu:
        g = nk::relu_backward(in, g);
        break;
    }
  }
  return g;
}

template <typename T>
std::vector<Tensor<T>*> Network<T>::parameters() {
  std::vector<Tensor<T>*> out;
  for (auto& l : layers_)
    for (Tensor<T>* p : l.trainable()) out.push_back(p);
  return out;
}

template <typename T>
void Network<T>::zero_grad() {
  for (Tensor<T>* p : parameters()) p->zero_grad();
}

template <typename T>
std::vector<nk::Record> Network<T>::to_records() const {
  std::vector<nk::Record> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::string conv = "conv" + std::to_string(i);
    out.push_back(nk::make_record(conv + ".weight", l.weight));
    out.push_back(nk::make_record(conv + ".bias", l.bias));
    if (l.has_bn) {
      const std::string bn = "bn" + std::to_string(i);
      out.push_back(nk::make_record(bn + ".gamma", l.bn_gamma));
      out.push_back(nk::make_record(bn + ".beta", l.bn_beta));
      out.push_back(nk::make_record(bn + ".running_mean", std::span<const T>(l.bn_running_mean)));
      out.push_back(nk::make_record(bn + ".running_var", std::span<const T>(l.bn_running_var)));
    }
  }
  const std::vector<T> hyper{layers_[0].bn_momentum, layers_[0].bn_eps};
  out.push_back(nk::make_record("bn.hyper", std::span<const T>(hyper)));
  return out;
}

template <typename T>
Network<T> Network<T>::from_records(const std::vector<nk::Record>& records) {
  std::map<std::string, const nk::Record*> by_name;
  for (const auto& r : records) by_name[r.name] = &r;
  auto get = [&](const std::string& name) -> const nk::Record& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint: missing record '" + name + "'");
    return *it->second;
  };
  const auto& head = get("conv4.weight");
  const auto& first = get("conv0.weight");
  if (head.shape.size() != 4 || first.shape.size() != 4)
    throw DataError("checkpoint: conv weights must be rank 4");
  Network net(static_cast<std::size_t>(head.shape[0]),
              static_cast<std::size_t>(first.shape[1]));
  auto fill = [&](const std::string& name, std::span<T> dst) {
    const auto values = nk::record_values<T>(get(name));
    if (values.size() != dst.size())
      throw DataError("checkpoint: record '" + name + "' has " +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(dst.size()));
    std::copy(values.begin(), values.end(), dst.begin());
  };
  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    auto& l = net.layers_[i];
    const std::string conv = "conv" + std::to_string(i);
    fill(conv + ".weight", l.weight.data());
    fill(conv + ".bias", l.bias.data());
    if (l.has_bn) {
      const std::string bn = "bn" + std::to_string(i);
      fill(bn + ".gamma", l.bn_gamma.data());
      fill(bn + ".beta", l.bn_beta.data());
      fill(bn + ".running_mean", l.bn_running_mean);
      fill(bn + ".running_var", l.bn_running_var);
      for (T v : l.bn_running_var)
        if (!(v > T{0})) throw DataError("checkpoint: non-positive BN running variance");
    }
  }
  const auto hyper = nk::record_values<T>(get("bn.hyper"));
  if (hyper.size() != 2) throw DataError("checkpoint: bn.hyper must hold 2 values");
  net.set_bn_hyper(hyper[0], hyper[1]);
  net.set_mode(Mode::infer);
  return net;
}

template class Network<float>;
template class Network<double>;

}  // namespace latres::model

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

#include "numkernel/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace latres::nk {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

// Upper bound on the im2col buffer, in elements.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

std::size_t rows_per_chunk(std::size_t patch_len, std::size_t out_w,
                           std::size_t out_h) {
  std::size_t rows = kColumnBudget / std::max<std::size_t>(1, patch_len * out_w);
  return std::clamp<std::size_t>(rows, 1, out_h);
}

// Fills col (patch_len × rows*out_w) for output rows [row0, row0+rows).
template <typename T>
void im2col(const T* in, std::size_t channels, std::size_t in_h,
            std::size_t in_w, std::size_t k, std::size_t row0,
            std::size_t rows, std::size_t out_w, T* col) {
  const std::size_t cols = rows * out_w;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    const T* plane = in + ci * in_h * in_w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* dst = col + ((ci * k + ky) * k + kx) * cols;
        for (std::size_t oy = 0; oy < rows; ++oy) {
          const T* src = plane + (row0 + oy + ky) * in_w + kx;
          std::copy(src, src + out_w, dst + oy * out_w);
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::size_t channels, std::size_t in_h,
                std::size_t in_w, std::size_t k, std::size_t row0,
                std::size_t rows, std::size_t out_w, T* in) {
  const std::size_t cols = rows * out_w;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    T* plane = in + ci * in_h * in_w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* src = col + ((ci * k + ky) * k + kx) * cols;
        for (std::size_t oy = 0; oy < rows; ++oy) {
          T* dst = plane + (row0 + oy + ky) * in_w + kx;
          const T* s = src + oy * out_w;
          for (std::size_t ox = 0; ox < out_w; ++ox) dst[ox] += s[ox];
        }
      }
    }
  }
}

void check_conv_shapes(const Shape& in, std::size_t in_ch, std::size_t k,
                       const Shape& weight) {
  if (in.c != in_ch || in.h < k || in.w < k)
    throw DimensionError("conv2d: input " + in.str() +
                         " incompatible with weight " + weight.str());
}

}  // namespace

template <typename T>
LayerParams<T> LayerParams<T>::make(std::size_t in_ch, std::size_t out_ch,
                                    std::size_t kernel, bool has_bn) {
  LayerParams p;
  p.in_ch = in_ch;
  p.out_ch = out_ch;
  p.kernel = kernel;
  p.has_bn = has_bn;
  p.weight = Tensor<T>({out_ch, in_ch, kernel, kernel});
  p.bias = Tensor<T>({1, out_ch, 1, 1});
  if (has_bn) {
    p.bn_gamma = Tensor<T>({1, out_ch, 1, 1}, T{1});
    p.bn_beta = Tensor<T>({1, out_ch, 1, 1});
    p.bn_running_mean.assign(out_ch, T{0});
    p.bn_running_var.assign(out_ch, T{1});
  }
  return p;
}

template <typename T>
void LayerParams<T>::init(std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(in_ch * kernel * kernel);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (T& v : weight.data()) v = static_cast<T>(dist(rng));
  std::fill(bias.data().begin(), bias.data().end(), T{0});
  if (has_bn) {
    std::fill(bn_gamma.data().begin(), bn_gamma.data().end(), T{1});
    std::fill(bn_beta.data().begin(), bn_beta.data().end(), T{0});
    bn_running_mean.assign(out_ch, T{0});
    bn_running_var.assign(out_ch, T{1});
  }
}

template <typename T>
std::vector<Tensor<T>*> LayerParams<T>::trainable() {
  std::vector<Tensor<T>*> out{&weight, &bias};
  if (has_bn) {
    out.push_back(&bn_gamma);
    out.push_back(&bn_beta);
  }
  return out;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const LayerParams<T>& params) {
  const Shape& s = input.shape();
  const std::size_t k = params.kernel;
  check_conv_shapes(s, params.in_ch, k, params.weight.shape());
  const std::size_t oh = s.h - k + 1, ow = s.w - k + 1, co = params.out_ch;
  const std::size_t patch_len = s.c * k * k;
  Tensor<T> out({s.n, co, oh, ow});

  Eigen::Map<const RowMat<T>> weights(params.weight.raw(), co, patch_len);
  const std::size_t chunk = rows_per_chunk(patch_len, ow, oh);
  AlignedVector<T> col(patch_len * chunk * ow);

  for (std::size_t n = 0; n < s.n; ++n) {
    const T* in = input.raw() + n * s.c * s.h * s.w;
    T* dst = out.raw() + n * co * oh * ow;
    for (std::size_t row0 = 0; row0 < oh; row0 += chunk) {
      const std::size_t rows = std::min(chunk, oh - row0);
      const std::size_t cols = rows * ow;
      im2col(in, s.c, s.h, s.w, k, row0, rows, ow, col.data());
      Eigen::Map<const RowMat<T>> colm(col.data(), patch_len, cols);
      StridedMap<T> outm(dst + row0 * ow, co, cols, Eigen::OuterStride<>(oh * ow));
      outm.noalias() = weights * colm;
      for (std::size_t c = 0; c < co; ++c) outm.row(c).array() += params.bias[c];
    }
  }
  return out;
}

template <typename T>
void conv2d_backward(const Tensor<T>& input, LayerParams<T>& params,
                     const Tensor<T>& out_grad, Tensor<T>* input_grad) {
  const Shape& s = input.shape();
  const std::size_t k = params.kernel;
  check_conv_shapes(s, params.in_ch, k, params.weight.shape());
  const std::size_t oh = s.h - k + 1, ow = s.w - k + 1, co = params.out_ch;
  const Shape expect{s.n, co, oh, ow};
  if (out_grad.shape() != expect)
    throw DimensionError("conv2d_backward: upstream gradient " +
                         out_grad.shape().str() + " expected " + expect.str());
  const std::size_t patch_len = s.c * k * k;

  params.weight.ensure_grad();
  params.bias.ensure_grad();
  Eigen::Map<const RowMat<T>> weights(params.weight.raw(), co, patch_len);
  Eigen::Map<RowMat<T>> wgrad(params.weight.grad().data(), co, patch_len);
  T* bgrad = params.bias.grad().data();

  if (input_grad) *input_grad = Tensor<T>(s);

  const std::size_t chunk = rows_per_chunk(patch_len, ow, oh);
  AlignedVector<T> col(patch_len * chunk * ow);
  AlignedVector<T> dcol(input_grad ? col.size() : 0);

  for (std::size_t n = 0; n < s.n; ++n) {
    const T* in = input.raw() + n * s.c * s.h * s.w;
    const T* g = out_grad.raw() + n * co * oh * ow;
    for (std::size_t row0 = 0; row0 < oh; row0 += chunk) {
      const std::size_t rows = std::min(chunk, oh - row0);
      const std::size_t cols = rows * ow;
      im2col(in, s.c, s.h, s.w, k, row0, rows, ow, col.data());
      Eigen::Map<const RowMat<T>> colm(col.data(), patch_len, cols);
      ConstStridedMap<T> gm(g + row0 * ow, co, cols, Eigen::OuterStride<>(oh * ow));
      wgrad.noalias() += gm * colm.transpose();
      for (std::size_t c = 0; c < co; ++c) bgrad[c] += gm.row(c).sum();
      if (input_grad) {
        Eigen::Map<RowMat<T>> dcolm(dcol.data(), patch_len, cols);
        dcolm.noalias() = weights.transpose() * gm;
        col2im_add(dcol.data(), s.c, s.h, s.w, k, row0, rows, ow,
                   input_grad->raw() + n * s.c * s.h * s.w);
      }
    }
  }
}

template <typename T>
PoolResult<T> maxpool2(const Tensor<T>& input) {
  const Shape& s = input.shape();
  if (s.h < 2 || s.w < 2)
    throw DimensionError("maxpool2: input " + s.str() + " smaller than (.,.,2,2)");
  const std::size_t oh = s.h / 2, ow = s.w / 2;
  PoolResult<T> r{Tensor<T>({s.n, s.c, oh, ow}), PoolIndices{s, {}}};
  r.indices.argmax.resize(r.output.numel());
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    const std::size_t base = nc * s.h * s.w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x, ++o) {
        std::size_t best = base + (2 * y) * s.w + 2 * x;
        const std::size_t cand[3] = {best + 1, best + s.w, best + s.w + 1};
        for (std::size_t c : cand)
          if (input[c] > input[best]) best = c;
        r.output[o] = input[best];
        r.indices.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& out_grad,
                            const PoolIndices& indices) {
  if (out_grad.numel() != indices.argmax.size())
    throw DimensionError("maxpool2_backward: upstream gradient " +
                         out_grad.shape().str() + " does not match pooled input " +
                         indices.input_shape.str());
  Tensor<T> grad(indices.input_shape);
  for (std::size_t i = 0; i < indices.argmax.size(); ++i)
    grad[indices.argmax[i]] += out_grad[i];
  return grad;
}

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, LayerParams<T>& params,
                    BatchNormCache<T>* cache) {
  const Shape& s = input.shape();
  if (!params.has_bn || s.c != params.out_ch)
    throw DimensionError("batchnorm: input " + s.str() +
                         " does not match channel count " +
                         std::to_string(params.out_ch));
  const std::size_t hw = s.h * s.w;
  const std::size_t count = s.n * hw;
  Tensor<T> out(s);
  Tensor<T> normalized(cache ? s : Shape{});
  std::vector<T> inv_std(s.c);

  for (std::size_t c = 0; c < s.c; ++c) {
    T mean, var;
    if (params.mode == Mode::train) {
      if (count < 2)
        throw DimensionError("batchnorm: train mode needs at least 2 values per "
                             "channel, input " + s.str());
      double sum = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* p = input.raw() + (n * s.c + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      }
      const double m = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* p = input.raw() + (n * s.c + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) sq += (p[i] - m) * (p[i] - m);
      }
      mean = static_cast<T>(m);
      var = static_cast<T>(sq / static_cast<double>(count));
      const T unbiased = static_cast<T>(sq / static_cast<double>(count - 1));
      const T mom = params.bn_momentum;
      params.bn_running_mean[c] = (T{1} - mom) * params.bn_running_mean[c] + mom * mean;
      params.bn_running_var[c] = (T{1} - mom) * params.bn_running_var[c] + mom * unbiased;
    } else {
      mean = params.bn_running_mean[c];
      var = params.bn_running_var[c];
    }
    const T istd = T{1} / std::sqrt(var + params.bn_eps);
    inv_std[c] = istd;
    const T gamma = params.bn_gamma[c], beta = params.bn_beta[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t off = (n * s.c + c) * hw;
      const T* p = input.raw() + off;
      T* o = out.raw() + off;
      if (cache) {
        T* xn = normalized.raw() + off;
        for (std::size_t i = 0; i < hw; ++i) {
          xn[i] = (p[i] - mean) * istd;
          o[i] = gamma * xn[i] + beta;
        }
      } else {
        for (std::size_t i = 0; i < hw; ++i) o[i] = gamma * (p[i] - mean) * istd + beta;
      }
    }
  }
  if (cache) {
    cache->mode = params.mode;
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename T>
Tensor<T> batchnorm_backward(const Tensor<T>& out_grad, LayerParams<T>& params,
                             const BatchNormCache<T>& cache) {
  const Shape& s = out_grad.shape();
  if (cache.normalized.shape() != s)
    throw DimensionError("batchnorm_backward: upstream gradient " + s.str() +
                         " does not match cached " + cache.normalized.shape().str());
  const std::size_t hw = s.h * s.w;
  const double count = static_cast<double>(s.n * hw);
  params.bn_gamma.ensure_grad();
  params.bn_beta.ensure_grad();
  Tensor<T> grad(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t off = (n * s.c + c) * hw;
      const T* g = out_grad.raw() + off;
      const T* xn = cache.normalized.raw() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_g += g[i];
        sum_gx += static_cast<double>(g[i]) * xn[i];
      }
    }
    params.bn_gamma.grad()[c] += static_cast<T>(sum_gx);
    params.bn_beta.grad()[c] += static_cast<T>(sum_g);
    const T scale = params.bn_gamma[c] * cache.inv_std[c];
    const T mean_g = static_cast<T>(sum_g / count);
    const T mean_gx = static_cast<T>(sum_gx / count);
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t off = (n * s.c + c) * hw;
      const T* g = out_grad.raw() + off;
      const T* xn = cache.normalized.raw() + off;
      T* d = grad.raw() + off;
      if (cache.mode == Mode::train) {
        for (std::size_t i = 0; i < hw; ++i)
          d[i] = scale * (g[i] - mean_g - xn[i] * mean_gx);
      } else {
        for (std::size_t i = 0; i < hw; ++i) d[i] = scale * g[i];
      }
    }
  }
  return grad;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.numel(); ++i)
    out[i] = input[i] > T{0} ? input[i] : T{0};
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& out_grad) {
  if (input.shape() != out_grad.shape())
    throw DimensionError("relu_backward: input " + input.shape().str() +
                         " vs upstream gradient " + out_grad.shape().str());
  Tensor<T> grad(input.shape());
  for (std::size_t i = 0; i < input.numel(); ++i)
    grad[i] = input[i] > T{0} ? out_grad[i] : T{0};
  return grad;
}

template <typename T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels) {
  const Shape& s = logits.shape();
  if (s.h != 1 || s.w != 1 || labels.size() != s.n || s.n == 0)
    throw DimensionError("softmax_xent: logits " + s.str() + " with " +
                         std::to_string(labels.size()) + " labels");
  const std::size_t d = s.c;
  LossResult<T> r{T{0}, Tensor<T>(s)};
  double total = 0.0;
  std::vector<double> prob(d);
  for (std::size_t n = 0; n < s.n; ++n) {
    const int label = labels[n];
    if (label < 1 || static_cast<std::size_t>(label) > d)
      throw UsageError("softmax_xent: label " + std::to_string(label) +
                       " outside 1.." + std::to_string(d));
    const T* z = logits.raw() + n * d;
    const double zmax = *std::max_element(z, z + d);
    double denom = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      prob[j] = std::exp(static_cast<double>(z[j]) - zmax);
      denom += prob[j];
    }
    const std::size_t y = static_cast<std::size_t>(label - 1);
    total += std::log(denom) - (static_cast<double>(z[y]) - zmax);
    for (std::size_t j = 0; j < d; ++j) {
      const double p = prob[j] / denom;
      r.grad[n * d + j] =
          static_cast<T>((p - (j == y ? 1.0 : 0.0)) / static_cast<double>(s.n));
    }
  }
  r.loss = static_cast<T>(total / static_cast<double>(s.n));
  return r;
}

template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape() || pred.numel() == 0)
    throw DimensionError("mse_loss: prediction " + pred.shape().str() +
                         " vs target " + target.shape().str());
  LossResult<T> r{T{0}, Tensor<T>(pred.shape())};
  const double n = static_cast<double>(pred.numel());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    const double diff = static_cast<double>(pred[i]) - target[i];
    total += diff * diff;
    r.grad[i] = static_cast<T>(2.0 * diff / n);
  }
  r.loss = static_cast<T>(total / n);
  return r;
}

#define LATRES_INSTANTIATE(T)                                                  \
  template struct LayerParams<T>;                                              \
  template Tensor<T> conv2d(const Tensor<T>&, const LayerParams<T>&);          \
  template void conv2d_backward(const Tensor<T>&, LayerParams<T>&,             \
                                const Tensor<T>&, Tensor<T>*);                 \
  template PoolResult<T> maxpool2(const Tensor<T>&);                           \
  template Tensor<T> maxpool2_backward(const Tensor<T>&, const PoolIndices&);  \
  template Tensor<T> batchnorm(const Tensor<T>&, LayerParams<T>&,              \
                               BatchNormCache<T>*);                            \
  template Tensor<T> batchnorm_backward(const Tensor<T>&, LayerParams<T>&,     \
                                        const BatchNormCache<T>&);             \
  template Tensor<T> relu(const Tensor<T>&);                                   \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);        \
  template LossResult<T> softmax_xent(const Tensor<T>&, std::span<const int>); \
  template LossResult<T> mse_loss(const Tensor<T>&, const Tensor<T>&);

LATRES_INSTANTIATE(float)
LATRES_INSTANTIATE(double)
#undef LATRES_INSTANTIATE

}  // namespace latres::nk

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

#include "imaging/resample.hpp"

#include <algorithm>
#include <cmath>

namespace latres::img {

namespace {

double bilinear_kernel(double x) {
  x = std::abs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

// Keys cubic convolution, a = -0.5.
double bicubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

struct Taps {
  std::vector<std::size_t> first;
  std::vector<std::size_t> count;
  std::vector<double> weights;  // out_size × stride
  std::size_t stride = 0;
};

Taps compute_taps(std::size_t in_size, std::size_t out_size,
                  ResampleMethod method) {
  const double base_support = method == ResampleMethod::bicubic ? 2.0 : 1.0;
  auto kernel = method == ResampleMethod::bicubic ? bicubic_kernel : bilinear_kernel;
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double filter_scale = std::max(scale, 1.0);
  const double support = base_support * filter_scale;
  const double inv = 1.0 / filter_scale;

  Taps t;
  t.stride = static_cast<std::size_t>(std::ceil(support)) * 2 + 1;
  t.first.resize(out_size);
  t.count.resize(out_size);
  t.weights.assign(out_size * t.stride, 0.0);
  for (std::size_t i = 0; i < out_size; ++i) {
    const double center = (static_cast<double>(i) + 0.5) * scale;
    const double lo = std::max(0.0, std::floor(center - support + 0.5));
    const double hi = std::min(static_cast<double>(in_size), std::floor(center + support + 0.5));
    const auto xmin = static_cast<std::size_t>(lo);
    const std::size_t n = std::min(static_cast<std::size_t>(hi) - xmin, t.stride);
    double total = 0.0;
    double* w = &t.weights[i * t.stride];
    for (std::size_t x = 0; x < n; ++x) {
      w[x] = kernel((static_cast<double>(x + xmin) - center + 0.5) * inv);
      total += w[x];
    }
    if (total != 0.0)
      for (std::size_t x = 0; x < n; ++x) w[x] /= total;
    t.first[i] = xmin;
    t.count[i] = n;
  }
  return t;
}

}  // namespace

ResampleMethod parse_resample_method(const std::string& name) {
  if (name == "bicubic") return ResampleMethod::bicubic;
  if (name == "bilinear") return ResampleMethod::bilinear;
  throw UsageError("unknown resample method '" + name + "' (bicubic|bilinear)");
}

std::string to_string(ResampleMethod method) {
  return method == ResampleMethod::bicubic ? "bicubic" : "bilinear";
}

Plane resample(const Plane& plane, std::size_t out_h, std::size_t out_w,
               ResampleMethod method) {
  if (out_h == 0 || out_w == 0)
    throw DimensionError("resample: target dims must be >= 1, got " + dims(out_h, out_w));
  const std::size_t h = plane.height(), w = plane.width();
  const Taps tx = compute_taps(w, out_w, method);
  const Taps ty = compute_taps(h, out_h, method);
  auto src = plane.samples();

  std::vector<double> tmp(h * out_w);
  for (std::size_t r = 0; r < h; ++r) {
    const float* row = src.data() + r * w;
    for (std::size_t c = 0; c < out_w; ++c) {
      const double* wt = &tx.weights[c * tx.stride];
      double acc = 0.0;
      for (std::size_t k = 0; k < tx.count[c]; ++k) acc += wt[k] * row[tx.first[c] + k];
      tmp[r * out_w + c] = acc;
    }
  }
  Plane out(out_h, out_w);
  auto dst = out.samples();
  for (std::size_t r = 0; r < out_h; ++r) {
    const double* wt = &ty.weights[r * ty.stride];
    float* orow = dst.data() + r * out_w;
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ty.count[r]; ++k)
        acc += wt[k] * tmp[(ty.first[r] + k) * out_w + c];
      orow[c] = static_cast<float>(acc);
    }
  }
  out.clamp();
  return out;
}

Plane degrade(const Plane& plane, double k, ResampleMethod method) {
  if (!(k > 0.0 && k <= 1.0))
    throw UsageError("degrade: factor k=" + std::to_string(k) + " outside (0,1]");
  if (k == 1.0) return plane;
  const auto small_h = static_cast<std::size_t>(std::llround(k * static_cast<double>(plane.height())));
  const auto small_w = static_cast<std::size_t>(std::llround(k * static_cast<double>(plane.width())));
  if (small_h < kDegradeMinSide || small_w < kDegradeMinSide)
    throw DataError("degrade: k=" + std::to_string(k) + " shrinks " +
                    dims(plane.height(), plane.width()) + " to " +
                    dims(small_h, small_w) + ", below the " +
                    std::to_string(kDegradeMinSide) + " px minimum");
  const Plane small = resample(plane, small_h, small_w, method);
  return resample(small, plane.height(), plane.width(), method);
}

}  // namespace latres::img

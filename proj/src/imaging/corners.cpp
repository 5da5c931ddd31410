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

#include "imaging/corners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace latres::img {

namespace {

std::vector<double> gaussian_weights(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    w[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

// Separable convolution with replicated borders, in place.
void smooth(std::vector<double>& data, std::size_t h, std::size_t w,
            const std::vector<double>& kernel) {
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto ih = static_cast<std::ptrdiff_t>(h), iw = static_cast<std::ptrdiff_t>(w);
  std::vector<double> tmp(data.size());
  for (std::ptrdiff_t r = 0; r < ih; ++r) {
    for (std::ptrdiff_t c = 0; c < iw; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::ptrdiff_t cc = std::clamp<std::ptrdiff_t>(c + k, 0, iw - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * data[static_cast<std::size_t>(r * iw + cc)];
      }
      tmp[static_cast<std::size_t>(r * iw + c)] = acc;
    }
  }
  for (std::ptrdiff_t r = 0; r < ih; ++r) {
    for (std::ptrdiff_t c = 0; c < iw; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::ptrdiff_t rr = std::clamp<std::ptrdiff_t>(r + k, 0, ih - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(rr * iw + c)];
      }
      data[static_cast<std::size_t>(r * iw + c)] = acc;
    }
  }
}

// Sliding maximum over a (2r+1) window along rows, then columns.
std::vector<double> window_max(const ResponseMap& m, std::size_t radius) {
  const auto ih = static_cast<std::ptrdiff_t>(m.h), iw = static_cast<std::ptrdiff_t>(m.w);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  std::vector<double> tmp(m.values.size()), out(m.values.size());
  for (std::ptrdiff_t y = 0; y < ih; ++y) {
    for (std::ptrdiff_t x = 0; x < iw; ++x) {
      double best = -INFINITY;
      for (std::ptrdiff_t xx = std::max<std::ptrdiff_t>(0, x - r); xx <= std::min(iw - 1, x + r); ++xx)
        best = std::max(best, m.values[static_cast<std::size_t>(y * iw + xx)]);
      tmp[static_cast<std::size_t>(y * iw + x)] = best;
    }
  }
  for (std::ptrdiff_t y = 0; y < ih; ++y) {
    for (std::ptrdiff_t x = 0; x < iw; ++x) {
      double best = -INFINITY;
      for (std::ptrdiff_t yy = std::max<std::ptrdiff_t>(0, y - r); yy <= std::min(ih - 1, y + r); ++yy)
        best = std::max(best, tmp[static_cast<std::size_t>(yy * iw + x)]);
      out[static_cast<std::size_t>(y * iw + x)] = best;
    }
  }
  return out;
}

std::size_t chebyshev(const Corner& a, std::size_t row, std::size_t col) {
  const std::size_t dr = a.row > row ? a.row - row : row - a.row;
  const std::size_t dc = a.col > col ? a.col - col : col - a.col;
  return std::max(dr, dc);
}

}  // namespace

ResponseMap harris(const Plane& plane, const HarrisParams& params) {
  const std::size_t h = plane.height(), w = plane.width();
  if (h < kHarrisMinSide || w < kHarrisMinSide)
    throw DimensionError("harris: plane " + dims(h, w) + " smaller than " +
                         dims(kHarrisMinSide, kHarrisMinSide));
  auto px = [&](std::ptrdiff_t r, std::ptrdiff_t c) -> double {
    r = std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(h) - 1);
    c = std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(w) - 1);
    return plane.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  std::vector<double> xx(h * w), yy(h * w), xy(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const auto ir = static_cast<std::ptrdiff_t>(r), ic = static_cast<std::ptrdiff_t>(c);
      const double gx = (px(ir - 1, ic + 1) + 2.0 * px(ir, ic + 1) + px(ir + 1, ic + 1)) -
                        (px(ir - 1, ic - 1) + 2.0 * px(ir, ic - 1) + px(ir + 1, ic - 1));
      const double gy = (px(ir + 1, ic - 1) + 2.0 * px(ir + 1, ic) + px(ir + 1, ic + 1)) -
                        (px(ir - 1, ic - 1) + 2.0 * px(ir - 1, ic) + px(ir - 1, ic + 1));
      xx[r * w + c] = gx * gx;
      yy[r * w + c] = gy * gy;
      xy[r * w + c] = gx * gy;
    }
  }
  const auto kernel = gaussian_weights(params.sigma);
  smooth(xx, h, w, kernel);
  smooth(yy, h, w, kernel);
  smooth(xy, h, w, kernel);

  ResponseMap out{h, w, std::vector<double>(h * w)};
  for (std::size_t i = 0; i < h * w; ++i) {
    const double det = xx[i] * yy[i] - xy[i] * xy[i];
    const double tr = xx[i] + yy[i];
    out.values[i] = det - params.kappa * tr * tr;
  }
  return out;
}

CornerSet nms(const ResponseMap& response, const NmsParams& params) {
  if (params.radius < 1) throw UsageError("nms: radius must be >= 1");
  CornerSet out{{}, response.h, response.w};
  if (response.values.empty()) return out;
  const double peak = *std::max_element(response.values.begin(), response.values.end());
  if (!(peak > 0.0)) return out;
  const double threshold = params.rel_threshold * peak;

  const auto local_max = window_max(response, params.radius);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < response.values.size(); ++i) {
    const double v = response.values[i];
    if (v > threshold && v >= local_max[i]) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return response.values[a] > response.values[b];
  });
  for (std::size_t idx : candidates) {
    if (out.points.size() >= params.max_corners) break;
    const std::size_t row = idx / response.w, col = idx % response.w;
    const bool clear = std::all_of(out.points.begin(), out.points.end(), [&](const Corner& c) {
      return chebyshev(c, row, col) > params.radius;
    });
    if (clear) out.points.push_back({row, col, response.values[idx]});
  }
  return out;
}

CornerSet detect_corners(const Plane& plane, const HarrisParams& harris_params,
                         const NmsParams& nms_params) {
  return nms(harris(plane, harris_params), nms_params);
}

void write_corners_csv(std::ostream& out, const CornerSet& corners) {
  out << "row,col,response\n";
  for (const Corner& c : corners.points)
    out << c.row << ',' << c.col << ',' << c.response << '\n';
}

}  // namespace latres::img

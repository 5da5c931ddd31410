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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "aggregate/aggregate.hpp"
#include "oracles.hpp"

using namespace latres;
using namespace latres::agg;
using latres::testing::percentile_oracle;

namespace {

model::OutputMap map_of(std::size_t d, std::size_t h, std::size_t w, std::mt19937_64& rng) {
  model::OutputMap m{nk::Tensor<float>({1, d, h, w}), h, w};
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : m.values.data()) v = u(rng);
  return m;
}

std::vector<int> random_classes(std::mt19937_64& rng, int lo = 1, int hi = 6) {
  std::uniform_int_distribution<int> c(lo, hi);
  std::vector<int> v(1 + rng() % 60);
  for (auto& x : v) x = c(rng);
  return v;
}

}  // namespace

TEST_CASE("percentile examples") {
  std::vector<int> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(percentile(ten, 90.0) == 9);
  CHECK(percentile(ten, 100.0) == 10);
  CHECK(percentile(ten, 0.0) == 1);
  CHECK(percentile(std::vector<double>{0.3}, 37.0) == 0.3);
  CHECK_THROWS_AS(percentile(std::vector<int>{}, 50.0), DataError);
  CHECK_THROWS_AS(percentile(ten, 101.0), UsageError);
  CHECK_THROWS_AS(percentile(ten, -1.0), UsageError);
}

TEST_CASE("image_class and video examples") {
  CHECK(image_class(std::vector<int>(7, 3)) == 3);
  std::vector<int> nine_two{2, 2, 2, 2, 2, 2, 2, 2, 2, 5};
  CHECK(image_class(nine_two) == 2);
  CHECK(image_class(std::vector<int>{1, 2, 3, 4, 5, 6}) == 6);
  CHECK_THROWS_AS(image_class(std::vector<int>{}), DataError);
  CHECK_THROWS_AS(image_class(std::vector<int>{7}), DataError);
  auto fb = image_class_or_fallback(std::vector<int>{});
  CHECK(fb.cls == 6);
  CHECK(fb.low_confidence);
  CHECK_FALSE(image_class_or_fallback(std::vector<int>{2}).low_confidence);

  CHECK(video_class(std::vector<int>(10, 4)) == 4);
  CHECK(video_class(std::vector<int>{1, 1, 1, 1, 1, 1, 1, 6, 6, 6}) == 1);
  CHECK(video_class(std::vector<int>{5}) == 5);
  CHECK(video_value(std::vector<double>{0.25}) == 0.25);
  CHECK_THROWS_AS(video_class(std::vector<int>{}), DataError);
  CHECK_THROWS_AS(video_value(std::vector<double>{}), DataError);
}

TEST_CASE("percentile matches the integer nearest-rank oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    auto v = random_classes(rng, -50, 50);
    for (int p = 0; p <= 100; ++p) CHECK(percentile(v, static_cast<double>(p)) == percentile_oracle(v, p));
  }
}

TEST_CASE("percentile properties") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    auto v = random_classes(rng);
    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    int prev = 0;
    for (int p = 0; p <= 100; p += 5) {
      const int r = percentile(v, p);
      CHECK(r == percentile(shuffled, p));
      CHECK(r >= prev);
      CHECK(std::find(v.begin(), v.end(), r) != v.end());
      prev = r;
    }
    auto low = random_classes(rng, 1, 5);
    auto up = low;
    for (auto& c : up) ++c;
    CHECK(image_class(up) == image_class(low) + 1);
    CHECK(video_class(up) == video_class(low) + 1);
  }
}

TEST_CASE("image_reg") {
  std::mt19937_64 rng(3);
  model::OutputMap flat{nk::Tensor<float>({1, 1, 4, 5}, 0.5f), 76, 80};
  std::vector<model::Location> s{{0, 0}, {3, 4}, {1, 2}};
  CHECK(image_reg(flat, s) == doctest::Approx(0.5));
  CHECK(image_reg_unmasked(flat) == doctest::Approx(0.5));
  CHECK_THROWS_AS(image_reg(flat, std::vector<model::Location>{}), DataError);
  auto six = map_of(6, 3, 3, rng);
  CHECK_THROWS_AS(image_reg(six, s), UsageError);
  CHECK_THROWS_AS(image_reg_unmasked(six), UsageError);

  for (int t = 0; t < 50; ++t) {
    auto m = map_of(1, 1 + rng() % 9, 1 + rng() % 9, rng);
    std::vector<model::Location> loc;
    for (std::size_t y = 0; y < m.rows(); ++y)
      for (std::size_t x = 0; x < m.cols(); ++x)
        if (rng() % 3 == 0) loc.push_back({y, x});
    if (loc.empty()) loc.push_back({0, 0});
    CHECK(image_reg(m, std::vector<model::Location>{loc.back()}) == doctest::Approx(m.at(0, loc.back().y, loc.back().x)));
    double sum = 0.0;
    for (const auto& l : loc) sum += m.at(0, l.y, l.x);
    const double mean = image_reg(m, loc);
    CHECK(mean == doctest::Approx(sum / static_cast<double>(loc.size())).epsilon(1e-9));
    std::shuffle(loc.begin(), loc.end(), rng);
    CHECK(image_reg(m, loc) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("argmax_class") {
  CHECK(argmax_class(std::vector<float>{0.1f, 0.9f, 0.3f}) == 2);
  CHECK(argmax_class(std::vector<float>{0.5f, 0.5f}) == 1);
  CHECK_THROWS_AS(argmax_class(std::vector<float>{}), DimensionError);
  model::OutputMap m{nk::Tensor<float>({1, 6, 2, 2}, 0.0f), 68, 68};
  m.values.at(0, 4, 1, 0) = 3.0f;
  CHECK(argmax_class(m, {1, 0}) == 5);
  CHECK(argmax_class(m, {0, 0}) == 1);
}

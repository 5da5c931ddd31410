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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <random>

#include "imaging/corners.hpp"
#include "imaging/image_io.hpp"
#include "imaging/plane.hpp"
#include "imaging/resample.hpp"
#include "procedural.hpp"
#include "util/errors.hpp"

using namespace latres;
using namespace latres::img;

namespace {

RgbImage solid(std::size_t h, std::size_t w, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage im{h, w, {}};
  for (std::size_t i = 0; i < h * w; ++i) im.rgb.insert(im.rgb.end(), {r, g, b});
  return im;
}

std::size_t chebyshev(const Corner& a, const Corner& b) {
  const auto d = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
  return std::max(d(a.row, b.row), d(a.col, b.col));
}

ResponseMap random_response(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ResponseMap m{h, w, std::vector<double>(h * w)};
  for (auto& v : m.values) v = u(rng) < 0.05 ? u(rng) : 0.0;
  return m;
}

}  // namespace

TEST_CASE("luma: white, black, red") {
  CHECK(luma_from_rgb(solid(3, 4, 255, 255, 255)) == Plane(3, 4, 1.0f));
  CHECK(luma_from_rgb(solid(3, 4, 0, 0, 0)) == Plane(3, 4, 0.0f));
  auto red = luma_from_rgb(solid(2, 2, 255, 0, 0));
  for (float v : red.samples()) CHECK(std::abs(v - 0.299) <= 1.0 / 255);
}

TEST_CASE("png round trip and decode errors") {
  const auto dir = std::filesystem::temp_directory_path() / "latres_imaging_test";
  std::filesystem::create_directories(dir);
  auto im = solid(5, 7, 10, 200, 30);
  save_png(dir / "a.png", im);
  auto back = load_image(dir / "a.png");
  CHECK(back.rgb.rgb == im.rgb);
  CHECK(back.luma == luma_from_rgb(im));
  CHECK(is_image_file(dir / "a.png"));
  CHECK_THROWS_AS(load_image(dir / "missing.png"), DataError);
  {
    std::ofstream junk(dir / "junk.png");
    junk << "not an image";
  }
  CHECK_THROWS_AS(load_image(dir / "junk.png"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resample examples") {
  for (auto m : {ResampleMethod::bilinear, ResampleMethod::bicubic}) {
    auto c = resample(Plane(17, 9, 0.5f), 40, 3, m);
    CHECK(c.height() == 40);
    CHECK(c.width() == 3);
    for (float v : c.samples()) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
    CHECK_THROWS_AS(resample(Plane(4, 4), 0, 3, m), DimensionError);
  }
  std::mt19937_64 rng(1);
  Plane p(13, 21);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : p.samples()) v = u(rng);
  CHECK(resample(p, 13, 21, ResampleMethod::bilinear) == p);

  // x_src = (x + 0.5) * 2/3 - 0.5 = 0.5 at the middle output column.
  Plane two(2, 2, std::vector<float>{0, 1, 0, 1});
  auto r = resample(two, 2, 3, ResampleMethod::bilinear);
  CHECK(r.at(0, 1) == doctest::Approx(0.5));
  CHECK(r.at(1, 1) == doctest::Approx(0.5));
  CHECK(r.at(0, 0) == doctest::Approx(0.0));
  CHECK(r.at(0, 2) == doctest::Approx(1.0));

  CHECK(parse_resample_method("bicubic") == ResampleMethod::bicubic);
  CHECK(to_string(ResampleMethod::bilinear) == "bilinear");
  CHECK_THROWS_AS(parse_resample_method("lanczos"), UsageError);
}

TEST_CASE("resample output stays in [0,1] under ringing") {
  Plane step(32, 32);
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t c = 16; c < 32; ++c) step.at(r, c) = 1.0f;
  for (auto [h, w] : {std::pair{7, 9}, {64, 64}, {100, 13}}) {
    auto out = resample(step, h, w, ResampleMethod::bicubic);
    for (float v : out.samples()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("degrade: identity, errors, dims property") {
  auto scene = latres::testing::make_scene(3, 64, 80);
  CHECK(degrade(scene, 1.0, ResampleMethod::bicubic) == scene);
  CHECK_THROWS_AS(degrade(scene, 0.0, ResampleMethod::bicubic), UsageError);
  CHECK_THROWS_AS(degrade(scene, 1.5, ResampleMethod::bicubic), UsageError);
  CHECK_THROWS_AS(degrade(scene, 0.1, ResampleMethod::bicubic), DataError);

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> side(8, 120);
  std::uniform_real_distribution<double> kd(0.01, 1.0);
  int ran = 0;
  for (int i = 0; i < 60; ++i) {
    const std::size_t h = side(rng), w = side(rng);
    const double k = kd(rng);
    if (std::lround(k * h) < 8 || std::lround(k * w) < 8) continue;
    Plane p(h, w, 0.25f);
    auto out = degrade(p, k, i % 2 ? ResampleMethod::bilinear : ResampleMethod::bicubic);
    CHECK(out.height() == h);
    CHECK(out.width() == w);
    ++ran;
  }
  CHECK(ran > 10);
}

TEST_CASE("degrade MSE fixture on the reference scene") {
  // Frozen from the shipped procedural scene (seed 3, 256x256).
  auto p = latres::testing::make_scene(3, 256, 256);
  const double bicubic[] = {0.001693218987, 0.005253715062, 0.009401035509};
  const double bilinear[] = {0.002964792869, 0.00667996006, 0.01020806453};
  const double ks[] = {0.9, 0.5, 0.2};
  double prev = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double e = mean_squared_error(degrade(p, ks[i], ResampleMethod::bicubic), p);
    CHECK(e == doctest::Approx(bicubic[i]).epsilon(1e-6));
    CHECK(e > prev);
    prev = e;
    CHECK(mean_squared_error(degrade(p, ks[i], ResampleMethod::bilinear), p) ==
          doctest::Approx(bilinear[i]).epsilon(1e-6));
  }
}

TEST_CASE("harris examples") {
  CHECK_THROWS_AS(harris(Plane(6, 20)), DimensionError);
  auto flat = harris(Plane(20, 20, 0.7f));
  for (double v : flat.values) CHECK(std::abs(v) < 1e-12);

  Plane edge(40, 40);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 20; c < 40; ++c) edge.at(r, c) = 1.0f;
  auto e = harris(edge);
  for (std::size_t r = 10; r < 30; ++r)
    for (std::size_t c = 17; c < 23; ++c) CHECK(e.at(r, c) <= 1e-12);

  Plane sq(60, 60);
  for (std::size_t r = 20; r < 40; ++r)
    for (std::size_t c = 20; c < 40; ++c) sq.at(r, c) = 1.0f;
  auto cs = nms(harris(sq), NmsParams{3, 0.01, 200});
  const std::pair<double, double> geo[] = {{19.5, 19.5}, {19.5, 39.5}, {39.5, 19.5}, {39.5, 39.5}};
  for (auto [gr, gc] : geo) {
    bool near = false;
    for (const auto& c : cs.points)
      near |= std::max(std::abs(c.row - gr), std::abs(c.col - gc)) <= 3.0;
    CHECK(near);
  }
}

TEST_CASE("nms examples") {
  ResponseMap m{50, 50, std::vector<double>(2500, 0.0)};
  m.at(10, 10) = 1.0;
  auto one = nms(m);
  REQUIRE(one.size() == 1);
  CHECK(one.points[0].row == 10);
  CHECK(one.points[0].col == 10);

  m.at(10, 15) = 2.0;
  auto close = nms(m);
  REQUIRE(close.size() == 1);
  CHECK(close.points[0].col == 15);

  m.at(10, 15) = 0.0;
  m.at(10, 35) = 2.0;
  auto far = nms(m);
  REQUIRE(far.size() == 2);
  CHECK(far.points[0].col == 35);
  CHECK(far.points[1].col == 10);

  CHECK(nms(ResponseMap{5, 5, std::vector<double>(25, 0.0)}).empty());
  CHECK_THROWS_AS(nms(m, NmsParams{0, 0.01, 200}), UsageError);
}

TEST_CASE("nms properties: spacing, order, cap, idempotence") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 25; ++t) {
    NmsParams params{1 + rng() % 12, 0.01, 1 + rng() % 60};
    auto m = random_response(40 + rng() % 60, 40 + rng() % 60, rng);
    auto cs = nms(m, params);
    CHECK(cs.size() <= params.max_corners);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      CHECK(cs.points[i].row < m.h);
      CHECK(cs.points[i].col < m.w);
      if (i) CHECK(cs.points[i - 1].response >= cs.points[i].response);
      for (std::size_t j = 0; j < i; ++j) CHECK(chebyshev(cs.points[i], cs.points[j]) > params.radius);
    }
    ResponseMap survivors{m.h, m.w, std::vector<double>(m.h * m.w, 0.0)};
    for (const auto& c : cs.points) survivors.at(c.row, c.col) = c.response;
    auto again = nms(survivors, params);
    CHECK(again.points == cs.points);

    auto mask = Mask::from_corners(cs);
    CHECK(mask.popcount() == cs.size());
  }
}

TEST_CASE("corner csv") {
  CornerSet cs{{{1, 2, 0.5}}, 4, 4};
  std::ostringstream out;
  write_corners_csv(out, cs);
  CHECK(out.str().find("row,col,response") == 0);
  CHECK(out.str().find("1,2,") != std::string::npos);
}

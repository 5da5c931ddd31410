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

#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "imaging/image_io.hpp"
#include "procedural.hpp"
#include "synth/dataset.hpp"
#include "util/errors.hpp"

using namespace latres;
using namespace latres::synth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("latres_synth_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Three tall images and one three-frame video: cheap but >= 1080 rows. Width
// 800 keeps a=1 regression variants above the 8 px guard.
fs::path small_corpus(std::size_t width = 160) {
  auto dir = scratch("corpus" + std::to_string(width));
  for (int i = 0; i < 3; ++i)
    img::save_png(dir / ("img_" + std::to_string(i) + ".png"), latres::testing::make_scene(10 + i, 1080, width));
  fs::create_directories(dir / "vid_a");
  for (int f = 0; f < 3; ++f)
    img::save_png(dir / "vid_a" / ("frame_" + std::to_string(f) + ".png"),
                  latres::testing::make_scene(40, 1080, width, 3.0 * f, 2.0 * f));
  return dir;
}

}  // namespace

TEST_CASE("class factors and names") {
  CHECK(class_factor(6) == 1.0);
  CHECK(class_factor(1) == doctest::Approx(2.0 / 15.0));
  CHECK(class_name(4) == "480p");
  CHECK_THROWS_AS(class_factor(0), UsageError);
  CHECK_THROWS_AS(class_factor(7), UsageError);
}

TEST_CASE("nearest_class examples and exhaustive check") {
  CHECK(nearest_class(480) == 4);
  CHECK(nearest_class(500) == 4);
  CHECK(nearest_class(600) == 5);
  CHECK(nearest_class(1) == 1);
  CHECK(nearest_class(5000) == 6);
  CHECK_THROWS_AS(nearest_class(0), UsageError);
  for (std::size_t h = 1; h < 2000; ++h) {
    int best = 1;
    for (int c = 2; c <= 6; ++c) {
      const long d = std::labs(static_cast<long>(h) - kClassHeights[c - 1]);
      const long bd = std::labs(static_cast<long>(h) - kClassHeights[best - 1]);
      if (d <= bd) best = c;
    }
    CHECK(nearest_class(h) == best);
  }
}

TEST_CASE("variants") {
  auto src = latres::testing::make_scene(1, 1080, 96);
  auto six = make_class_variant(src, 6, img::ResampleMethod::bicubic);
  CHECK(six.plane == src);
  CHECK(six.label_class == 6);
  for (int c = 1; c <= 5; ++c) {
    auto v = make_class_variant(src, c, img::ResampleMethod::bicubic);
    CHECK(v.plane.height() == 1080);
    CHECK(v.plane.width() == 96);
    CHECK(v.factor == doctest::Approx(kClassHeights[c - 1] / 1080.0));
  }
  CHECK_THROWS_AS(make_class_variant(img::Plane(1079, 100), 3, img::ResampleMethod::bicubic), DataError);

  auto r100 = make_reg_variant(src, 100, img::ResampleMethod::bicubic);
  CHECK(r100.plane == src);
  CHECK(r100.target == 1.0);
  auto r50 = make_reg_variant(src, 50, img::ResampleMethod::bicubic);
  CHECK(r50.target == 0.5);
  CHECK(r50.plane == img::degrade(src, 0.5, img::ResampleMethod::bicubic));
  // round(0.01*1080) = 11 rows survive the guard; 0.01*96 does not.
  auto wide = latres::testing::make_scene(2, 1080, 1920);
  CHECK(make_reg_variant(wide, 1, img::ResampleMethod::bilinear).plane.width() == 1920);
  CHECK_THROWS_AS(make_reg_variant(src, 1, img::ResampleMethod::bicubic), DataError);
  CHECK_THROWS_AS(make_reg_variant(src, 0, img::ResampleMethod::bicubic), UsageError);
}

TEST_CASE("split_corpus") {
  auto s = split_corpus(10, 0.7, 0.0, 3);
  CHECK(std::count(s.begin(), s.end(), Split::train) == 7);
  CHECK(std::count(s.begin(), s.end(), Split::test) == 3);
  CHECK(split_corpus(10, 0.7, 0.0, 3) == s);
  auto v = split_corpus(30, 0.7, 0.1, 5);
  CHECK(std::count(v.begin(), v.end(), Split::test) == 9);
  CHECK(std::count(v.begin(), v.end(), Split::val) == 2);
  CHECK_THROWS_AS(split_corpus(1, 0.7, 0.1, 1), DataError);
  CHECK_THROWS_AS(split_corpus(0, 0.7, 0.1, 1), DataError);
  for (std::size_t n = 2; n < 40; ++n) {
    auto x = split_corpus(n, 0.7, 0.1, n);
    CHECK(std::count(x.begin(), x.end(), Split::test) >= 1);
    CHECK(std::count(x.begin(), x.end(), Split::train) >= 1);
  }
}

TEST_CASE("extract_patches") {
  std::mt19937_64 rng(3);
  img::Plane p(64, 64);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : p.samples()) v = u(rng);
  img::CornerSet cs{{{32, 32, 1.0}, {5, 5, 0.5}}, 64, 64};
  auto out = extract_patches(p, cs);
  REQUIRE(out.size() == 1);
  CHECK(out[0].pixels == p);
  CHECK(out[0].pixels.at(32, 32) == p.at(32, 32));

  img::Plane big(200, 150);
  for (auto& v : big.samples()) v = u(rng);
  for (int t = 0; t < 20; ++t) {
    img::CornerSet rc{{}, 200, 150};
    for (int i = 0; i < 30; ++i) rc.points.push_back({rng() % 200, rng() % 150, 1.0});
    for (const auto& r : extract_patches(big, rc)) {
      CHECK(r.pixels.height() == 64);
      CHECK(r.pixels.width() == 64);
      CHECK(r.row >= 32);
      CHECK(r.col >= 32);
      CHECK(r.row + 32 <= 200);
      CHECK(r.col + 32 <= 150);
      CHECK(r.pixels.at(32, 32) == big.at(r.row, r.col));
    }
  }
}

TEST_CASE("select_frames") {
  auto s = select_frames(100, 10);
  CHECK(s == std::vector<std::size_t>{0, 11, 22, 33, 44, 55, 66, 77, 88, 99});
  CHECK(select_frames(7, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
  CHECK(select_frames(100, 10) == s);
}

TEST_CASE("manifest round trip") {
  Manifest m;
  ManifestEntry a;
  a.id = 0;
  a.source_path = "/x/img 1.png";
  a.factor = 2.0 / 15.0;
  a.target = a.factor;  // derived fields: target for classes, class for targets
  a.label_class = 1;
  a.corner_count = 17;
  a.patch_count = 16;
  ManifestEntry b = a;
  b.id = 1;
  b.kind = SourceKind::video_frame;
  b.video_id = "vid_a";
  b.task = Task::regression;
  b.target = 0.37;
  b.label_class = 3;  // nearest_class(400) is 360p
  b.factor = 0.37;
  b.split = Split::val;
  m.entries = {a, b};
  const auto text = m.to_jsonl();
  auto back = Manifest::from_jsonl(text);
  CHECK(back.entries == m.entries);
  CHECK(back.to_jsonl() == text);
  CHECK_THROWS_AS(Manifest::from_jsonl("{\"id\": 0}\nnot json\n"), DataError);
}

TEST_CASE("shards round trip and reject garbage") {
  auto dir = scratch("shard");
  {
    ShardWriter w(dir / "a.lpch");
    w.append(3.0f, img::Plane(64, 64, 0.25f));
    w.append(0.5f, img::Plane(64, 64, 1.0f));
    CHECK_THROWS_AS(w.append(1.0f, img::Plane(32, 64)), DimensionError);
  }
  auto s = read_shard(dir / "a.lpch");
  REQUIRE(s.size() == 2);
  CHECK(s[0].label == 3.0f);
  CHECK(s[1].pixels == img::Plane(64, 64, 1.0f));
  {
    std::ofstream bad(dir / "b.lpch", std::ios::binary);
    bad << "LPCH0xxxx";
  }
  CHECK_THROWS_AS(read_shard(dir / "b.lpch"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("video ingestion") {
  auto dir = scratch("frames");
  CHECK_THROWS_AS(ingest_video_paths(dir), DataError);
  for (int i = 0; i < 12; ++i) img::save_png(dir / ("f" + std::to_string(100 + i) + ".png"), img::Plane(4, 4, 0.5f));
  auto v = ingest_video_paths(dir, 10);
  CHECK(v.video_id == "latres_synth_frames");
  REQUIRE(v.frames.size() == 10);
  CHECK(v.frames.front().filename() == "f100.png");
  CHECK(v.frames.back().filename() == "f111.png");
  fs::remove_all(dir);
}

TEST_CASE("synthesize: class dataset invariants") {
  auto corpus = small_corpus();
  auto out = scratch("ds_class");
  RunConfig cfg;
  cfg.seed = 4;
  cfg.patches_per_image = 4;
  cfg.frames_per_video = 10;
  auto summary = synthesize(cfg, corpus, out);
  CHECK(summary.sources == 4);
  CHECK(summary.entries == 6 * 6);
  auto m = Manifest::read(out / kManifestFile);
  REQUIRE(m.entries.size() == 36);

  std::map<std::string, std::set<Split>> split_of;
  std::map<std::string, std::set<Split>> video_split;
  std::map<int, int> hist;
  std::array<std::size_t, 3> patches{};
  for (const auto& e : m.entries) {
    split_of[e.source_path].insert(e.split);
    if (e.video_id) video_split[*e.video_id].insert(e.split);
    ++hist[e.label_class];
    patches[static_cast<std::size_t>(e.split)] += e.patch_count;
    CHECK(e.patch_count <= 4);
    CHECK(e.factor == doctest::Approx(class_factor(e.label_class)));
  }
  for (const auto& [_, s] : split_of) CHECK(s.size() == 1);
  for (const auto& [_, s] : video_split) CHECK(s.size() == 1);
  for (int c = 1; c <= 6; ++c) CHECK(hist[c] == 6);
  CHECK(patches == summary.patches);
  CHECK(read_shard(out / shard_file(Split::test)).size() == summary.patches[2]);

  auto again = scratch("ds_class2");
  synthesize(cfg, corpus, again);
  CHECK(Manifest::read(again / kManifestFile).entries.size() == m.entries.size());
  for (auto split : {Split::train, Split::val, Split::test}) {
    auto a = read_shard(out / shard_file(split)), b = read_shard(again / shard_file(split));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].pixels == b[i].pixels);
  }

  // The presented plane is reproducible from the manifest alone.
  const auto& e = m.entries[2];
  auto src = img::load_luma(e.source_path);
  auto rendered = render_entry(e, src, cfg.resample);
  CHECK(rendered == make_class_variant(src, e.label_class, cfg.resample).plane);
  fs::remove_all(again);
  fs::remove_all(out);
}

TEST_CASE("synthesize: regression targets") {
  auto corpus = small_corpus(800);
  auto out = scratch("ds_reg");
  RunConfig cfg;
  cfg.mode = Task::regression;
  cfg.variants = 2;
  cfg.patches_per_image = 2;
  auto summary = synthesize(cfg, corpus, out);
  CHECK(summary.entries == 6 * 2);
  for (const auto& e : Manifest::read(out / kManifestFile).entries) {
    CHECK(e.task == Task::regression);
    const double a = e.target * 100.0;
    CHECK(a == doctest::Approx(std::round(a)));
    CHECK(a >= 1.0);
    CHECK(a <= 100.0);
    CHECK(e.factor == doctest::Approx(e.target));
  }
  for (const auto& p : read_shard(out / shard_file(Split::train))) {
    CHECK(p.label > 0.0f);
    CHECK(p.label <= 1.0f);
  }
  fs::remove_all(out);
  CHECK_THROWS_AS(synthesize(cfg, scratch("empty"), out), DataError);
}

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
#include <random>

#include "fixtures.hpp"
#include "traineval/evaluate.hpp"
#include "traineval/metrics.hpp"
#include "traineval/trainer.hpp"
#include "util/errors.hpp"

using namespace latres;
using namespace latres::te;

namespace {

PatchSet random_set(std::size_t n, std::mt19937_64& rng, bool regression) {
  PatchSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.patches.push_back(latres::testing::random_plane(64, 64, rng));
    s.labels.push_back(regression ? 0.5f : static_cast<float>(1 + rng() % 6));
  }
  return s;
}

ImageAnalysis item(int label, std::vector<int> units, std::optional<std::string> video = {}) {
  ImageAnalysis a;
  a.label_class = label;
  a.unit_classes = std::move(units);
  a.corner_count = a.unit_classes.size();
  a.video_id = std::move(video);
  return a;
}

}  // namespace

TEST_CASE("r_squared") {
  std::vector<double> t{1, 2, 3};
  CHECK(r_squared(t, t) == 1.0);
  CHECK(r_squared(std::vector<double>{2, 2, 2}, t) == doctest::Approx(0.0));
  // Predictions [1,2,4] against [1,2,3]: SSres = 1, SStot = 2.
  CHECK(r_squared(std::vector<double>{1, 2, 4}, t) == doctest::Approx(0.5));
  CHECK_THROWS_AS(r_squared(std::vector<double>{1, 2}, t), UsageError);
  CHECK_THROWS_AS(r_squared(std::vector<double>{1}, std::vector<double>{1}), DataError);
  CHECK_THROWS_AS(r_squared(t, std::vector<double>{4, 4, 4}), NumericError);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p(2 + rng() % 30), y(p.size());
    for (auto& v : p) v = n(rng);
    for (auto& v : y) v = n(rng);
    CHECK(r_squared(p, y) <= 1.0);
  }
}

TEST_CASE("accuracy_confusion") {
  std::vector<int> labels{1, 2, 3, 4, 5, 6};
  auto all = accuracy_confusion(labels, labels);
  CHECK(all.accuracy() == 1.0);
  for (int c = 0; c < 6; ++c) CHECK(all.counts[c][c] == 1);
  auto ones = accuracy_confusion(std::vector<int>(6, 1), labels);
  CHECK(ones.accuracy() == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(accuracy_confusion(std::vector<int>{1}, labels), UsageError);
  CHECK_THROWS_AS(accuracy_confusion(std::vector<int>{0}, std::vector<int>{1}), UsageError);

  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> p(1 + rng() % 50), y(p.size());
    for (auto& v : p) v = 1 + static_cast<int>(rng() % 6);
    for (auto& v : y) v = 1 + static_cast<int>(rng() % 6);
    auto c = accuracy_confusion(p, y);
    std::size_t ok = 0, trace = 0, sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == y[i];
    for (int a = 0; a < 6; ++a) {
      trace += c.counts[a][a];
      CHECK(c.row_sum(a + 1) == static_cast<std::size_t>(std::count(y.begin(), y.end(), a + 1)));
      for (int b = 0; b < 6; ++b) sum += c.counts[a][b];
    }
    CHECK(c.correct == ok);
    CHECK(trace == ok);
    CHECK(sum == p.size());
    CHECK(c.total == p.size());
    CHECK(c.accuracy() == doctest::Approx(static_cast<double>(ok) / p.size()));
  }
}

TEST_CASE("batch size schedule") {
  TrainSchedule s;
  CHECK(s.batch_size(0) == 32);
  CHECK(s.batch_size(9) == 32);
  CHECK(s.batch_size(10) == 64);
  CHECK(s.batch_size(20) == 128);
  CHECK(s.batch_size(30) == 256);
  CHECK(s.batch_size(39) == 256);
}

TEST_CASE("plateau drops the learning rate by 10, at most twice") {
  std::mt19937_64 rng(1);
  RunConfig cfg;
  cfg.model = ModelKind::mask;
  cfg.schedule.epochs = 5;
  cfg.schedule.plateau_patience = 1;
  // Constant targets: val R² is undefined every epoch, so it never improves.
  auto train = random_set(4, rng, true), val = random_set(2, rng, true);
  auto r = train_network(cfg, train, val, {});
  REQUIRE(r.curves.size() == 5);
  CHECK(r.curves[0].lr == doctest::Approx(1e-4));
  CHECK(r.curves[1].lr == doctest::Approx(1e-5));
  CHECK(r.curves[2].lr == doctest::Approx(1e-6));
  CHECK(r.curves[4].lr == doctest::Approx(1e-6));
  CHECK(r.lr_drops == 2);
  CHECK(r.optimizer == "sgd");
  CHECK(std::isnan(r.curves[0].val_metric));
}

TEST_CASE("overfits ten patches within 200 epochs") {
  std::mt19937_64 rng(3);
  RunConfig cfg;
  cfg.model = ModelKind::softmax;
  cfg.schedule.epochs = 200;
  // Train accuracy saturates early and would trigger plateau drops; this run
  // checks the optimizer alone at the default learning rate.
  cfg.schedule.max_lr_drops = 0;
  auto train = random_set(10, rng, false);
  std::optional<std::size_t> hit;
  double last = 0.0;
  auto r = train_network(cfg, train, {}, {}, [&](const EpochRecord& e) {
    last = e.train_loss;
    if (!hit && e.train_loss < 0.01) hit = e.epoch;
  });
  CHECK(hit.has_value());
  MESSAGE("first epoch under 0.01: " << (hit ? static_cast<long>(*hit) : -1L) << ", final loss " << last);
  CHECK(r.curves.back().train_metric == 1.0);
  CHECK(r.optimizer == "adam");
}

TEST_CASE("training is bit-reproducible and rejects bad input") {
  std::mt19937_64 rng(4);
  RunConfig cfg;
  cfg.model = ModelKind::mask_softmax;
  cfg.schedule.epochs = 3;
  auto train = random_set(12, rng, false), val = random_set(4, rng, false);
  auto a = train_network(cfg, train, val, val), b = train_network(cfg, train, val, val);
  REQUIRE(a.curves.size() == b.curves.size());
  for (std::size_t i = 0; i < a.curves.size(); ++i) {
    CHECK(a.curves[i].train_loss == b.curves[i].train_loss);
    CHECK(a.curves[i].val_metric == b.curves[i].val_metric);
  }
  CHECK(a.best.to_records() == b.best.to_records());
  CHECK(a.best.mode() == nk::Mode::infer);

  PatchSet bad;
  bad.patches.push_back(img::Plane(32, 64));
  bad.labels.push_back(1.0f);
  CHECK_THROWS_AS(train_network(cfg, bad, {}, {}), DimensionError);

  RunConfig wild;
  wild.model = ModelKind::mask;
  wild.optimizer = "sgd";
  wild.schedule.lr0 = 1e30;
  wild.schedule.epochs = 5;
  auto reg = random_set(8, rng, true);
  for (std::size_t i = 0; i < reg.size(); ++i) reg.labels[i] = 0.1f * static_cast<float>(i);
  try {
    train_network(wild, reg, {}, {});
    FAIL("expected divergence");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    CHECK(std::string(e.what()).find("batch") != std::string::npos);
  }
}

TEST_CASE("ablation rows agree on a constant-output model") {
  std::vector<ImageAnalysis> items;
  for (int i = 0; i < 8; ++i) {
    ImageAnalysis a;
    a.target = 0.1 * (i + 1);
    a.corner_count = 3;
    a.mask_values = {0.4, 0.4, 0.4};
    a.unmasked_mean = 0.4;
    a.patch_values = {0.4, 0.4};
    items.push_back(a);
  }
  auto ab = ablation_regression(items);
  REQUIRE(ab.mask_r2);
  REQUIRE(ab.nomask_r2);
  REQUIRE(ab.patch_r2);
  CHECK(*ab.mask_r2 == doctest::Approx(*ab.nomask_r2));
  CHECK(*ab.mask_r2 == doctest::Approx(*ab.patch_r2));
  CHECK(ab.images == 8);
  CHECK(ab.fallback == 0);

  items[0].mask_values.clear();
  items[0].patch_values.clear();
  items[0].corner_count = 0;
  CHECK(ablation_regression(items).fallback == 1);

  for (auto& a : items) a.target = 0.3;
  CHECK_FALSE(ablation_regression(items).mask_r2.has_value());
}

TEST_CASE("class evaluation and the percentile sweep") {
  std::vector<ImageAnalysis> items{
      item(1, {1, 1, 2}), item(2, {2, 2, 2}), item(3, {}),
      item(4, {4, 5}, "v1"), item(4, {4}, "v1"), item(5, {5}, "v2")};
  auto ce = evaluate_classes(items, 90.0, 70.0);
  CHECK(ce.images.total == 6);
  CHECK(ce.low_confidence == 1);
  // 1 -> 2, 2 -> 2, 3 -> fallback 6, {4,5} -> 5, 4 -> 4, 5 -> 5
  CHECK(ce.images.correct == 3);
  CHECK(ce.videos.total == 2);
  CHECK(ce.videos.correct == 1);

  auto sweep = percentile_sweep(items, 90.0);
  REQUIRE(sweep.size() == 18);
  bool has70 = false, has90 = false;
  for (const auto& p : sweep) {
    if (p.accuracy) {
      CHECK(*p.accuracy >= 0.0);
      CHECK(*p.accuracy <= 1.0);
    }
    has70 |= p.axis == "video" && p.percentile == 70;
    has90 |= p.axis == "image" && p.percentile == 90;
  }
  CHECK(has70);
  CHECK(has90);

  std::vector<ImageAnalysis> flat;
  for (int c = 1; c <= 6; ++c) flat.push_back(item(c, {3, 3, 3, 3}, "v" + std::to_string(c % 2)));
  auto f = percentile_sweep(flat, 90.0);
  for (const auto& p : f) {
    REQUIRE(p.accuracy);
    CHECK(*p.accuracy == doctest::Approx(p.axis == "image" ? 1.0 / 6.0 : *f.back().accuracy));
  }

  std::vector<ImageAnalysis> stills{item(1, {1})};
  for (const auto& p : percentile_sweep(stills, 90.0))
    if (p.axis == "video") CHECK_FALSE(p.accuracy.has_value());
}

TEST_CASE("predict_image on a flat plane is a low-confidence 1080p") {
  auto net = latres::testing::random_infer_net(6, 2);
  RunConfig cfg;
  cfg.model = ModelKind::mask_softmax;
  for (auto kind : {ModelKind::softmax, ModelKind::mask_softmax}) {
    auto p = predict_image(net, kind, img::Plane(200, 240, 0.5f), cfg);
    CHECK(p.cls == 6);
    CHECK(p.low_confidence);
    CHECK(p.corners == 0);
  }
  auto reg = latres::testing::random_infer_net(1, 2);
  auto p = predict_image(reg, ModelKind::mask, img::Plane(200, 240, 0.5f), cfg);
  CHECK(p.value == 1.0);
  CHECK(p.low_confidence);
  CHECK_THROWS_AS(predict_image(net, ModelKind::softmax, img::Plane(40, 240, 0.5f), cfg), DimensionError);
}

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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "imaging/image_io.hpp"
#include "latres/latres.h"
#include "procedural.hpp"

namespace fs = std::filesystem;
using latres::testing::make_scene;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LATRES_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  std::FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// Shared scratch tree: a tiny corpus, class and reg datasets, three models
// trained for one epoch. Built on first use; cases below run in file order.
struct Workspace {
  fs::path root = fs::temp_directory_path() / "latres_cli_test";
  fs::path corpus = root / "corpus";
  fs::path flat = root / "flat.png";
  fs::path frames = root / "frames";

  Workspace() {
    fs::remove_all(root);
    fs::create_directories(corpus / "vid_a");
    for (int i = 0; i < 3; ++i)
      latres::img::save_png(corpus / ("img_" + std::to_string(i) + ".png"), make_scene(20 + i, 1080, 800));
    for (int f = 0; f < 3; ++f)
      latres::img::save_png(corpus / "vid_a" / ("frame_" + std::to_string(f) + ".png"),
                            make_scene(30, 1080, 800, 3.0 * f, 2.0 * f));
    latres::img::save_png(flat, latres::img::Plane(120, 160, 0.5f));
    fs::create_directories(frames);
    for (int f = 0; f < 4; ++f)
      latres::img::save_png(frames / ("f" + std::to_string(f) + ".png"), make_scene(50, 200, 240, f, 0));
  }
  ~Workspace() { fs::remove_all(root); }
  std::string p(const std::string& rel) const { return (root / rel).string(); }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

const std::string kQuick = " --patches-per-image 4";
const std::string kEpoch = " --epochs 1";

}  // namespace

TEST_CASE("C API: config handles") {
  latres_config* cfg = nullptr;
  REQUIRE(latres_config_new(&cfg) == LATRES_OK);
  CHECK(latres_config_set(cfg, "train.epochs", "7") == LATRES_OK);
  char buf[64];
  size_t needed = 0;
  CHECK(latres_config_get(cfg, "train.epochs", buf, sizeof buf, &needed) == LATRES_OK);
  CHECK(std::string(buf) == "7");
  CHECK(needed == 2);
  CHECK(latres_config_get(cfg, "train.epochs", nullptr, 0, &needed) == LATRES_OK);
  CHECK(needed == 2);

  CHECK(latres_config_set(cfg, "no.such.key", "1") == LATRES_ERR_USAGE);
  CHECK(std::string(latres_last_error()).find("no.such.key") != std::string::npos);
  CHECK(latres_config_set(cfg, "train.epochs", "seven") == LATRES_ERR_USAGE);
  CHECK(latres_config_set(cfg, "image_pct", "150") == LATRES_OK);
  CHECK(latres_config_validate(cfg) == LATRES_ERR_USAGE);
  CHECK(latres_config_set(cfg, "image_pct", "90") == LATRES_OK);
  CHECK(latres_config_validate(cfg) == LATRES_OK);

  CHECK(latres_config_text(cfg, nullptr, 0, &needed) == LATRES_OK);
  std::string text(needed, '\0');
  CHECK(latres_config_text(cfg, text.data(), text.size(), &needed) == LATRES_OK);
  CHECK(text.find("train.epochs = 7") != std::string::npos);
  CHECK(latres_config_merge_file(cfg, "/nonexistent/cfg.txt") == LATRES_ERR_USAGE);
  latres_config_free(cfg);
}

TEST_CASE("C API: helpers and planes") {
  size_t side = 0;
  CHECK(latres_shape_fn(1080, &side) == LATRES_OK);
  CHECK(side == 255);
  CHECK(latres_shape_fn(63, &side) == LATRES_ERR_DATA);
  CHECK(std::string(latres_class_name(1)) == "144p");
  CHECK(std::string(latres_class_name(6)) == "1080p");
  CHECK(latres_class_name(0) == nullptr);
  CHECK(latres_class_name(7) == nullptr);
  CHECK(std::string(latres_version()).size() > 0);

  std::vector<float> px(6, 0.25f);
  latres_plane* p = nullptr;
  CHECK(latres_plane_new(2, 3, px.data(), &p) == LATRES_OK);
  CHECK(latres_plane_height(p) == 2);
  CHECK(latres_plane_width(p) == 3);
  latres_plane_free(p);
  CHECK(latres_plane_new(0, 3, px.data(), &p) == LATRES_ERR_USAGE);
  CHECK(latres_plane_load("/nonexistent.png", &p) == LATRES_ERR_DATA);
  CHECK(latres_model_load("/nonexistent.lres", nullptr) != LATRES_OK);
}

TEST_CASE("cli: usage and data errors") {
  CHECK(run("").status == 2);
  CHECK(run("bogus").status == 2);
  CHECK(run("train --data /tmp").status == 2);
  CHECK(run("synth --corpus /nonexistent --out " + ws().p("x")).status == 3);
  CHECK(run("synth --corpus " + ws().corpus.string() + " --out " + ws().p("x") + " --set nope=1").status == 2);
  CHECK_FALSE(fs::exists(ws().p("x")));
  auto d = run("describe --shape 1080");
  CHECK(d.status == 0);
  CHECK(d.out.find("255") != std::string::npos);
  CHECK(run("describe --head 6").out.find("conv") != std::string::npos);
}

TEST_CASE("cli: synth class and reg datasets") {
  auto& w = ws();
  auto a = run("synth --corpus " + w.corpus.string() + " --out " + w.p("class") + " --seed 3" + kQuick);
  REQUIRE(a.status == 0);
  CHECK(a.out.find("entries 36") != std::string::npos);
  REQUIRE(run("synth --corpus " + w.corpus.string() + " --out " + w.p("class2") + " --seed 3" + kQuick).status == 0);
  CHECK(slurp(w.p("class") + "/manifest.jsonl") == slurp(w.p("class2") + "/manifest.jsonl"));
  CHECK(slurp(w.p("class") + "/patches_train.lpch") == slurp(w.p("class2") + "/patches_train.lpch"));

  auto r = run("synth --corpus " + w.corpus.string() + " --out " + w.p("reg") + " --mode reg --variants 2 --seed 3" + kQuick);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("entries 12") != std::string::npos);
  CHECK(slurp(w.p("reg") + "/config.txt").find("mode = reg") != std::string::npos);
}

TEST_CASE("cli: train picks optimizers per model") {
  auto& w = ws();
  REQUIRE(run("train --data " + w.p("class") + " --out " + w.p("m_soft") + " --model softmax" + kEpoch).status == 0);
  REQUIRE(run("train --data " + w.p("class") + " --out " + w.p("m_mask6") + " --model mask-softmax" + kEpoch).status == 0);
  REQUIRE(run("train --data " + w.p("reg") + " --out " + w.p("m_reg") + " --model mask --optimizer sgd" + kEpoch).status == 0);
  CHECK(json_file(w.p("m_soft") + "/report.json")["optimizer"] == "adam");
  CHECK(json_file(w.p("m_mask6") + "/report.json")["optimizer"] == "adam");
  auto reg = json_file(w.p("m_reg") + "/report.json");
  CHECK(reg["optimizer"] == "sgd");
  const std::string cfg = slurp(w.p("m_reg") + "/config.txt");
  CHECK(cfg.find("sgd.momentum = 0.9") != std::string::npos);
  CHECK(cfg.find("sgd.weight_decay = 1e-04") != std::string::npos);
  CHECK(slurp(w.p("m_soft") + "/curves.csv").rfind("epoch,train_metric,test_metric", 0) == 0);

  // A classifier cannot train on a regression dataset.
  CHECK(run("train --data " + w.p("reg") + " --out " + w.p("m_bad") + " --model softmax" + kEpoch).status == 3);
  CHECK(run("train --data " + w.p("nope") + " --out " + w.p("m_bad") + kEpoch).status == 3);

  latres_model* m = nullptr;
  REQUIRE(latres_model_load((w.p("m_mask6") + "/model.lres").c_str(), &m) == LATRES_OK);
  CHECK(std::string(latres_model_kind(m)) == "mask-softmax");
  latres_model_free(m);
}

TEST_CASE("cli: predict") {
  auto& w = ws();
  for (const char* model : {"m_soft", "m_mask6"}) {
    auto r = run("predict --model " + w.p(model) + "/model.lres " + w.flat.string());
    CHECK(r.status == 0);
    CHECK(r.out == "1080p low-confidence\n");
  }
  auto reg = run("predict --model " + w.p("m_reg") + "/model.lres " + w.flat.string());
  CHECK(reg.out.find("1080p k=1") == 0);
  CHECK(reg.out.find("low-confidence") != std::string::npos);

  auto v = run("predict --model " + w.p("m_mask6") + "/model.lres " + w.frames.string());
  CHECK(v.status == 0);
  CHECK(v.out.find("p") != std::string::npos);

  latres_model* m = nullptr;
  REQUIRE(latres_model_load((w.p("m_mask6") + "/model.lres").c_str(), &m) == LATRES_OK);
  latres_prediction pred{};
  CHECK(latres_predict_path(m, nullptr, w.frames.string().c_str(), &pred) == LATRES_OK);
  CHECK(pred.frames == 4);
  std::vector<float> flat(100 * 100, 0.3f);
  latres_plane* p = nullptr;
  REQUIRE(latres_plane_new(100, 100, flat.data(), &p) == LATRES_OK);
  CHECK(latres_predict_plane(m, nullptr, p, &pred) == LATRES_OK);
  CHECK(pred.cls == 6);
  CHECK(pred.low_confidence == 1);
  latres_plane_free(p);
  std::vector<float> tiny(40 * 40, 0.3f);
  REQUIRE(latres_plane_new(40, 40, tiny.data(), &p) == LATRES_OK);
  CHECK(latres_predict_plane(m, nullptr, p, &pred) == LATRES_ERR_DATA);
  latres_plane_free(p);
  latres_model_free(m);

  CHECK(run("predict --model " + w.p("m_soft") + "/model.lres /nonexistent.png").status == 3);
}

TEST_CASE("cli: eval, sweep and features") {
  auto& w = ws();
  auto e = run("eval --data " + w.p("class") + " --model " + w.p("m_mask6") + "/model.lres --out " +
               w.p("ev") + " --baseline-model " + w.p("m_reg") + "/model.lres");
  REQUIRE(e.status == 0);
  auto rep = json_file(w.p("ev") + "/report.json");
  const auto& conf = rep["image"]["confusion"];
  REQUIRE(conf.size() == 6);
  for (const auto& row : conf) CHECK(row.size() == 6);
  CHECK(rep.contains("baselines"));
  CHECK(rep.dump().find("random_forest") != std::string::npos);

  CHECK(run("eval --data " + w.p("class") + " --model " + w.p("m_mask6") + "/model.lres --out " + w.p("ev2") +
            " --split train").status == 2);
  CHECK(run("eval --data " + w.p("class") + " --model " + w.p("m_mask6") + "/model.lres --out " + w.p("ev2") +
            " --split train --force").status == 0);

  REQUIRE(run("eval --data " + w.p("reg") + " --model " + w.p("m_reg") + "/model.lres --out " + w.p("evr")).status == 0);
  const std::string reg = slurp(w.p("evr") + "/report.json");
  for (const char* row : {"Mask-CNN", "CNN without mask", "CNN from corner-centered patches"})
    CHECK(reg.find(row) != std::string::npos);

  REQUIRE(run("sweep --data " + w.p("class") + " --model " + w.p("m_soft") + "/model.lres --out " + w.p("sw")).status == 0);
  std::istringstream csv(slurp(w.p("sw") + "/sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "axis,percentile,accuracy,items");
  int image = 0, video = 0;
  while (std::getline(csv, line)) {
    image += line.rfind("image,", 0) == 0;
    video += line.rfind("video,", 0) == 0;
  }
  CHECK(image == 9);
  CHECK(video == 9);

  REQUIRE(run("features --data " + w.p("reg") + " --model " + w.p("m_reg") + "/model.lres --out " + w.p("ft")).status == 0);
  std::istringstream ft(slurp(w.p("ft") + "/features_test.csv"));
  std::getline(ft, line);
  CHECK(line.rfind("f1,f2,", 0) == 0);
  CHECK(line.find("f50,label") != std::string::npos);
}

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

// latres command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latres/latres.h"

namespace {

struct Failure {
  latres_status status;
};

void check(latres_status s) {
  if (s != LATRES_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(latres_config* c) const { latres_config_free(c); }
};
struct ModelDeleter {
  void operator()(latres_model* m) const { latres_model_free(m); }
};
using ConfigPtr = std::unique_ptr<latres_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<latres_model, ModelDeleter>;

ConfigPtr new_config() {
  latres_config* c = nullptr;
  check(latres_config_new(&c));
  return ConfigPtr(c);
}

ModelPtr load_model(const std::string& path) {
  latres_model* m = nullptr;
  check(latres_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

std::string text_of(const latres_config* cfg) {
  size_t need = 0;
  check(latres_config_text(cfg, nullptr, 0, &need));
  std::string s(need, '\0');
  check(latres_config_text(cfg, s.data(), s.size(), &need));
  s.resize(need - 1);
  return s;
}

// Layered overrides: --config file, then --set pairs, then dedicated flags.
struct Overrides {
  std::vector<std::string> config_files;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;

  void apply(latres_config* cfg) const {
    for (const auto& f : config_files) check(latres_config_merge_file(cfg, f.c_str()));
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
        throw Failure{LATRES_ERR_USAGE};
      }
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      check(latres_config_set(cfg, trim(kv.substr(0, eq)).c_str(), trim(kv.substr(eq + 1)).c_str()));
    }
    for (const auto& [k, v] : flags) check(latres_config_set(cfg, k.c_str(), v.c_str()));
    check(latres_config_validate(cfg));
  }
};

// Binds a string flag that, when given, overrides config key `key`.
void bind(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
          const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&ov, key](const std::string& v) { ov.flags.emplace_back(key, v); }, help);
}

void add_common(CLI::App* app, Overrides& ov) {
  app->add_option("--config", ov.config_files, "key = value config file (repeatable)")
      ->check(CLI::ExistingFile);
  app->add_option("--set", ov.sets, "override one config key, key=value (repeatable)");
  bind(app, ov, "--seed", "seed", "random seed");
  bind(app, ov, "--resample", "resample", "bicubic | bilinear");
}

void progress_line(size_t done, size_t total, void*) {
  std::fprintf(stderr, "\r  %zu/%zu images", done, total);
  if (done == total) std::fputc('\n', stderr);
}

void epoch_line(const latres_epoch* e, void*) {
  std::fprintf(stderr,
               "epoch %zu  batch %zu  lr %.3g  loss %.5f  train %.4f  val %.4f  test %.4f\n",
               e->epoch, e->batch_size, e->lr, e->train_loss, e->train_metric, e->val_metric,
               e->test_metric);
}

// Config for commands that consume a checkpoint: its training config, then
// the user's overrides.
ConfigPtr config_from_model(latres_model* m, const Overrides& ov) {
  latres_config* c = nullptr;
  check(latres_model_config(m, &c));
  ConfigPtr cfg(c);
  ov.apply(cfg.get());
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latres: latent-resolution estimation for upscaled images and video"};
  app.require_subcommand(1);
  app.set_version_flag("--version", latres_version());

  Overrides ov;

  std::string corpus, out, data, model_path, baseline_path, input;
  bool force = false;
  std::optional<std::size_t> head;
  std::optional<std::size_t> side;

  auto* synth = app.add_subcommand("synth", "build a degraded dataset from a corpus");
  add_common(synth, ov);
  synth->add_option("--corpus", corpus, "directory of >=1080p images and frame dirs")->required();
  synth->add_option("--out", out, "dataset output directory")->required();
  bind(synth, ov, "--mode", "mode", "class | reg");
  bind(synth, ov, "--variants", "variants", "regression variants per source");
  bind(synth, ov, "--patches-per-image", "patches_per_image", "patches kept per image (0 = all)");
  bind(synth, ov, "--frames", "video.frames", "frames sampled per video");

  auto* train = app.add_subcommand("train", "train a model on a synthesized dataset");
  add_common(train, ov);
  train->add_option("--data", data, "dataset directory")->required();
  train->add_option("--out", out, "run output directory")->required();
  bind(train, ov, "--model", "model", "softmax | mask-softmax | mask");
  bind(train, ov, "--optimizer", "optimizer", "auto | adam | sgd");
  bind(train, ov, "--epochs", "train.epochs", "training epochs");
  bind(train, ov, "--lr", "train.lr0", "initial learning rate");
  bind(train, ov, "--precision", "precision", "f32 | f64");

  auto* predict = app.add_subcommand("predict", "predict the latent resolution of an image or frame directory");
  add_common(predict, ov);
  predict->add_option("--model", model_path, "checkpoint")->required()->check(CLI::ExistingFile);
  predict->add_option("input", input, "image file or directory of frames")->required();
  bind(predict, ov, "--image-pct", "image_pct", "per-image aggregation percentile");
  bind(predict, ov, "--video-pct", "video_pct", "per-video aggregation percentile");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  add_common(eval, ov);
  eval->add_option("--data", data, "dataset directory")->required();
  eval->add_option("--model", model_path, "checkpoint")->required();
  eval->add_option("--out", out, "report directory")->required();
  eval->add_option("--baseline-model", baseline_path, "d=1 checkpoint for the feature baselines");
  bind(eval, ov, "--split", "eval.split", "train | val | test");
  eval->add_flag("--force", force, "allow evaluating on train/val");
  bind(eval, ov, "--image-pct", "image_pct", "per-image aggregation percentile");
  bind(eval, ov, "--video-pct", "video_pct", "per-video aggregation percentile");

  auto* sweep = app.add_subcommand("sweep", "accuracy vs aggregation percentile");
  add_common(sweep, ov);
  sweep->add_option("--data", data, "dataset directory")->required();
  sweep->add_option("--model", model_path, "classification checkpoint")->required();
  sweep->add_option("--out", out, "output directory")->required();
  bind(sweep, ov, "--split", "eval.split", "train | val | test");
  sweep->add_flag("--force", force, "allow sweeping on train/val");
  bind(sweep, ov, "--image-pct", "image_pct", "frame percentile used on the video axis");

  auto* features = app.add_subcommand("features", "export top-50 map features as CSV");
  add_common(features, ov);
  features->add_option("--data", data, "dataset directory")->required();
  features->add_option("--model", model_path, "d=1 checkpoint")->required();
  features->add_option("--out", out, "output directory")->required();

  auto* describe = app.add_subcommand("describe", "print the architecture, shape_fn or config");
  add_common(describe, ov);
  describe->add_option("--model", model_path, "checkpoint to describe")->check(CLI::ExistingFile);
  describe->add_option("--head", head, "head channels (6 classifier, 1 regressor)");
  describe->add_option("--shape", side, "print shape_fn for this input side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return LATRES_ERR_USAGE;
  }
  if (force) ov.flags.emplace_back("eval.force", "true");

  try {
    if (*synth) {
      auto cfg = new_config();
      ov.apply(cfg.get());
      latres_synth_summary s{};
      check(latres_synth(cfg.get(), corpus.c_str(), out.c_str(), &s));
      std::printf("sources %zu  entries %zu  patches train %zu val %zu test %zu\n", s.sources,
                  s.entries, s.patches_train, s.patches_val, s.patches_test);
    } else if (*train) {
      auto cfg = new_config();
      // Dataset settings first so corner and split parameters carry over.
      const std::string data_cfg = data + "/config.txt";
      if (std::FILE* f = std::fopen(data_cfg.c_str(), "r")) {
        std::fclose(f);
        check(latres_config_merge_file(cfg.get(), data_cfg.c_str()));
      }
      ov.apply(cfg.get());
      check(latres_train(cfg.get(), data.c_str(), out.c_str(), epoch_line, nullptr));
      std::printf("wrote %s/model.lres\n", out.c_str());
    } else if (*predict) {
      auto m = load_model(model_path);
      auto cfg = config_from_model(m.get(), ov);
      latres_prediction p{};
      check(latres_predict_path(m.get(), cfg.get(), input.c_str(), &p));
      std::string line = latres_class_name(p.cls);
      if (p.task == LATRES_TASK_REG) line += " k=" + std::to_string(p.value);
      if (p.low_confidence) line += " low-confidence";
      std::printf("%s\n", line.c_str());
    } else if (*eval) {
      auto m = load_model(model_path);
      auto cfg = config_from_model(m.get(), ov);
      m.reset();
      check(latres_eval(cfg.get(), data.c_str(), model_path.c_str(),
                        baseline_path.empty() ? nullptr : baseline_path.c_str(), out.c_str(),
                        progress_line, nullptr));
      std::printf("wrote %s/report.json\n", out.c_str());
    } else if (*sweep) {
      auto m = load_model(model_path);
      auto cfg = config_from_model(m.get(), ov);
      m.reset();
      check(latres_sweep(cfg.get(), data.c_str(), model_path.c_str(), out.c_str(), progress_line,
                         nullptr));
      std::printf("wrote %s/sweep.csv\n", out.c_str());
    } else if (*features) {
      auto m = load_model(model_path);
      auto cfg = config_from_model(m.get(), ov);
      m.reset();
      check(latres_features(cfg.get(), data.c_str(), model_path.c_str(), out.c_str(),
                            progress_line, nullptr));
      std::printf("wrote %s/features_{train,val,test}.csv\n", out.c_str());
    } else if (*describe) {
      ConfigPtr cfg;
      std::size_t d = head.value_or(6);
      if (!model_path.empty()) {
        auto m = load_model(model_path);
        std::printf("model: %s\n", latres_model_kind(m.get()));
        d = std::string(latres_model_kind(m.get())) == "mask" ? 1 : 6;
        cfg = config_from_model(m.get(), ov);
      } else {
        cfg = new_config();
        ov.apply(cfg.get());
      }
      size_t need = 0;
      check(latres_describe_architecture(d, nullptr, 0, &need));
      std::string arch(need, '\0');
      check(latres_describe_architecture(d, arch.data(), arch.size(), &need));
      arch.resize(need - 1);
      std::printf("%s", arch.c_str());
      if (side) {
        size_t q = 0;
        check(latres_shape_fn(*side, &q));
        std::printf("shape_fn(%zu) = %zu\n", *side, q);
      }
      std::printf("\n# config\n%s", text_of(cfg.get()).c_str());
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", latres_last_error());
    return f.status;
  }
  return 0;
}

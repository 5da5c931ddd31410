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

#include "latres/latres.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>

#include "config/run_config.hpp"
#include "imaging/image_io.hpp"
#include "models/model_io.hpp"
#include "synth/dataset.hpp"
#include "traineval/evaluate.hpp"
#include "traineval/trainer.hpp"
#include "util/errors.hpp"

struct latres_config {
  latres::RunConfig cfg;
};

struct latres_plane {
  latres::img::Plane plane;
};

struct latres_model {
  latres::model::LoadedModel loaded;
};

namespace {

thread_local std::string g_last_error;

latres_status fail(latres_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
latres_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return LATRES_OK;
  } catch (const latres::Error& e) {
    return fail(static_cast<latres_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(LATRES_ERR_DATA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LATRES_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LATRES_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LATRES_ERR_INTERNAL, "unknown failure");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw latres::UsageError(std::string(what) + " must not be NULL");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap == 0) return;
  const size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

const latres::RunConfig& effective(const latres_model* m, const latres_config* cfg) {
  return cfg ? cfg->cfg : m->loaded.config;
}

void fill(const latres::te::Prediction& p, latres_prediction* out) {
  out->task = p.task == latres::Task::classification ? LATRES_TASK_CLASS : LATRES_TASK_REG;
  out->cls = p.cls;
  out->value = p.value;
  out->low_confidence = p.low_confidence ? 1 : 0;
  out->corners = p.corners;
  out->frames = p.frames;
}

latres::te::EntryCallback wrap(latres_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](std::size_t done, std::size_t total) { fn(done, total, user); };
}

}  // namespace

extern "C" {

const char* latres_last_error(void) { return g_last_error.c_str(); }

const char* latres_version(void) { return "0.1.0"; }

latres_status latres_config_new(latres_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new latres_config();
  });
}

void latres_config_free(latres_config* cfg) { delete cfg; }

latres_status latres_config_set(latres_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

latres_status latres_config_get(const latres_config* cfg, const char* key, char* buf, size_t cap,
                                size_t* needed) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    copy_out(cfg->cfg.get(key), buf, cap, needed);
  });
}

latres_status latres_config_merge_file(latres_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "cfg");
    require(path, "path");
    cfg->cfg.merge_file(path);
  });
}

latres_status latres_config_text(const latres_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(cfg, "cfg");
    copy_out(cfg->cfg.to_text(), buf, cap, needed);
  });
}

latres_status latres_config_validate(const latres_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.validate();
  });
}

latres_status latres_plane_load(const char* path, latres_plane** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new latres_plane{latres::img::load_luma(path)};
  });
}

latres_status latres_plane_new(size_t height, size_t width, const float* samples,
                               latres_plane** out) {
  return guarded([&] {
    require(samples, "samples");
    require(out, "out");
    if (height == 0 || width == 0) throw latres::UsageError("plane dims must be positive");
    *out = new latres_plane{latres::img::Plane(
        height, width, std::vector<float>(samples, samples + height * width))};
  });
}

void latres_plane_free(latres_plane* plane) { delete plane; }

size_t latres_plane_height(const latres_plane* plane) { return plane ? plane->plane.height() : 0; }

size_t latres_plane_width(const latres_plane* plane) { return plane ? plane->plane.width() : 0; }

latres_status latres_model_load(const char* path, latres_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new latres_model{latres::model::load_model(path)};
  });
}

void latres_model_free(latres_model* model) { delete model; }

const char* latres_model_kind(const latres_model* model) {
  if (!model) return "";
  switch (model->loaded.config.model) {
    case latres::ModelKind::softmax: return "softmax";
    case latres::ModelKind::mask_softmax: return "mask-softmax";
    case latres::ModelKind::mask: return "mask";
  }
  return "";
}

latres_status latres_model_config(const latres_model* model, latres_config** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = new latres_config{model->loaded.config};
  });
}

latres_status latres_predict_plane(latres_model* model, const latres_config* cfg,
                                   const latres_plane* plane, latres_prediction* out) {
  return guarded([&] {
    require(model, "model");
    require(plane, "plane");
    require(out, "out");
    const auto& c = effective(model, cfg);
    c.validate();
    fill(latres::te::predict_image(model->loaded.net, model->loaded.config.model, plane->plane, c),
         out);
  });
}

latres_status latres_predict_path(latres_model* model, const latres_config* cfg, const char* path,
                                  latres_prediction* out) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    require(out, "out");
    const auto& c = effective(model, cfg);
    c.validate();
    const std::filesystem::path p(path);
    if (std::filesystem::is_directory(p)) {
      auto video = latres::synth::ingest_video(p, c.frames_per_video);
      fill(latres::te::predict_video(model->loaded.net, model->loaded.config.model, video.frames, c),
           out);
    } else {
      if (!std::filesystem::exists(p)) throw latres::DataError(p.string() + " does not exist");
      fill(latres::te::predict_image(model->loaded.net, model->loaded.config.model,
                                     latres::img::load_luma(p), c),
           out);
    }
  });
}

const char* latres_class_name(int cls) {
  static const char* const kNames[] = {"144p", "240p", "360p", "480p", "720p", "1080p"};
  if (cls < 1 || cls > 6) return nullptr;
  return kNames[cls - 1];
}

latres_status latres_shape_fn(size_t side, size_t* out) {
  return guarded([&] {
    require(out, "out");
    *out = latres::model::shape_fn(side);
  });
}

latres_status latres_describe_architecture(size_t head_channels, char* buf, size_t cap,
                                           size_t* needed) {
  return guarded([&] {
    if (head_channels == 0) throw latres::UsageError("head_channels must be positive");
    copy_out(latres::model::Architecture::standard(head_channels).describe(), buf, cap, needed);
  });
}

latres_status latres_synth(const latres_config* cfg, const char* corpus_dir, const char* out_dir,
                           latres_synth_summary* summary) {
  return guarded([&] {
    require(cfg, "cfg");
    require(corpus_dir, "corpus_dir");
    require(out_dir, "out_dir");
    const auto s = latres::synth::synthesize(cfg->cfg, corpus_dir, out_dir);
    if (summary) *summary = {s.sources, s.entries, s.patches[0], s.patches[1], s.patches[2]};
  });
}

latres_status latres_train(const latres_config* cfg, const char* dataset_dir, const char* out_dir,
                           latres_epoch_fn on_epoch, void* user) {
  return guarded([&] {
    require(cfg, "cfg");
    require(dataset_dir, "dataset_dir");
    require(out_dir, "out_dir");
    latres::te::EpochCallback cb;
    if (on_epoch) {
      cb = [on_epoch, user](const latres::te::EpochRecord& r) {
        latres_epoch e{r.epoch, r.train_metric, r.val_metric, r.test_metric,
                       r.lr,    r.batch_size,   r.train_loss};
        on_epoch(&e, user);
      };
    }
    latres::te::train_from_dataset(cfg->cfg, dataset_dir, out_dir, cb);
  });
}

latres_status latres_eval(const latres_config* cfg, const char* dataset_dir, const char* model_path,
                          const char* baseline_model, const char* out_dir,
                          latres_progress_fn progress, void* user) {
  return guarded([&] {
    require(cfg, "cfg");
    require(dataset_dir, "dataset_dir");
    require(model_path, "model_path");
    require(out_dir, "out_dir");
    latres::te::EvalRequest req{dataset_dir, model_path, out_dir, std::nullopt};
    if (baseline_model) req.baseline_model = baseline_model;
    latres::te::run_eval(cfg->cfg, req, wrap(progress, user));
  });
}

latres_status latres_sweep(const latres_config* cfg, const char* dataset_dir,
                           const char* model_path, const char* out_dir,
                           latres_progress_fn progress, void* user) {
  return guarded([&] {
    require(cfg, "cfg");
    require(dataset_dir, "dataset_dir");
    require(model_path, "model_path");
    require(out_dir, "out_dir");
    latres::te::run_sweep(cfg->cfg, {dataset_dir, model_path, out_dir, std::nullopt},
                          wrap(progress, user));
  });
}

latres_status latres_features(const latres_config* cfg, const char* dataset_dir,
                              const char* model_path, const char* out_dir,
                              latres_progress_fn progress, void* user) {
  return guarded([&] {
    require(cfg, "cfg");
    require(dataset_dir, "dataset_dir");
    require(model_path, "model_path");
    require(out_dir, "out_dir");
    latres::te::run_features(cfg->cfg, {dataset_dir, model_path, out_dir, std::nullopt},
                             wrap(progress, user));
  });
}

}  // extern "C"

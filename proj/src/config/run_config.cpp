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

#include "config/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "util/errors.hpp"

namespace latres {

std::string to_string(Task task) {
  return task == Task::classification ? "class" : "reg";
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::softmax: return "softmax";
    case ModelKind::mask_softmax: return "mask-softmax";
    case ModelKind::mask: return "mask";
  }
  return "?";
}

Task parse_task(const std::string& s) {
  if (s == "class") return Task::classification;
  if (s == "reg") return Task::regression;
  throw UsageError("unknown mode '" + s + "' (class|reg)");
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "softmax") return ModelKind::softmax;
  if (s == "mask-softmax") return ModelKind::mask_softmax;
  if (s == "mask") return ModelKind::mask;
  throw UsageError("unknown model '" + s + "' (softmax|mask-softmax|mask)");
}

Task task_of(ModelKind kind) {
  return kind == ModelKind::mask ? Task::regression : Task::classification;
}

std::size_t head_channels_of(ModelKind kind) {
  return kind == ModelKind::mask ? 1 : 6;
}

std::size_t TrainSchedule::batch_size(std::size_t epoch) const {
  const std::size_t doublings = batch_double_every ? epoch / batch_double_every : 0;
  return batch0 << std::min<std::size_t>(doublings, 20);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw UsageError("config '" + key + "': expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw UsageError("config '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config '" + key + "': expected true/false, got '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename M>
Field size_field(M member) {
  return {[member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); },
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            std::invoke(member, c) = static_cast<std::size_t>(parse_uint(k, v));
          }};
}

template <typename M>
Field double_field(M member) {
  return {[member](const RunConfig& c) { return format_double(std::invoke(member, c)); },
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            std::invoke(member, c) = parse_double(k, v);
          }};
}

template <typename M>
Field bool_field(M member) {
  return {[member](const RunConfig& c) { return std::string(std::invoke(member, c) ? "true" : "false"); },
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            std::invoke(member, c) = parse_bool(k, v);
          }};
}

template <typename M>
Field string_field(M member) {
  return {[member](const RunConfig& c) { return std::invoke(member, c); },
          [member](RunConfig& c, const std::string&, const std::string& v) {
            std::invoke(member, c) = v;
          }};
}

// Nested members are reached through small accessor lambdas.
#define LATRES_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::map<std::string, Field>& registry() {
  static const std::map<std::string, Field> fields = {
      {"seed", {[](const RunConfig& c) { return std::to_string(c.seed); },
                [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_uint(k, v); }}},
      {"deterministic", bool_field(LATRES_REF(deterministic))},
      {"resample", {[](const RunConfig& c) { return img::to_string(c.resample); },
                    [](RunConfig& c, const std::string&, const std::string& v) {
                      c.resample = img::parse_resample_method(v);
                    }}},
      {"harris.kappa", double_field(LATRES_REF(harris.kappa))},
      {"harris.sigma", double_field(LATRES_REF(harris.sigma))},
      {"nms.radius", size_field(LATRES_REF(nms.radius))},
      {"nms.rel_threshold", double_field(LATRES_REF(nms.rel_threshold))},
      {"nms.max_corners", size_field(LATRES_REF(nms.max_corners))},
      {"mode", {[](const RunConfig& c) { return to_string(c.mode); },
                [](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_task(v); }}},
      {"variants", size_field(LATRES_REF(variants))},
      {"patches_per_image", size_field(LATRES_REF(patches_per_image))},
      {"video.frames", size_field(LATRES_REF(frames_per_video))},
      {"split.train_fraction", double_field(LATRES_REF(train_fraction))},
      {"split.val_fraction", double_field(LATRES_REF(val_fraction))},
      {"model", {[](const RunConfig& c) { return to_string(c.model); },
                 [](RunConfig& c, const std::string&, const std::string& v) { c.model = parse_model_kind(v); }}},
      {"optimizer", string_field(LATRES_REF(optimizer))},
      {"input_channels", size_field(LATRES_REF(input_channels))},
      {"precision", string_field(LATRES_REF(precision))},
      {"train.epochs", size_field(LATRES_REF(schedule.epochs))},
      {"train.batch0", size_field(LATRES_REF(schedule.batch0))},
      {"train.batch_double_every", size_field(LATRES_REF(schedule.batch_double_every))},
      {"train.lr0", double_field(LATRES_REF(schedule.lr0))},
      {"train.lr_drop_factor", double_field(LATRES_REF(schedule.lr_drop_factor))},
      {"train.plateau_patience", size_field(LATRES_REF(schedule.plateau_patience))},
      {"train.plateau_min_delta", double_field(LATRES_REF(schedule.plateau_min_delta))},
      {"train.max_lr_drops", size_field(LATRES_REF(schedule.max_lr_drops))},
      {"sgd.momentum", double_field(LATRES_REF(sgd_momentum))},
      {"sgd.weight_decay", double_field(LATRES_REF(sgd_weight_decay))},
      {"adam.beta1", double_field(LATRES_REF(adam_beta1))},
      {"adam.beta2", double_field(LATRES_REF(adam_beta2))},
      {"adam.epsilon", double_field(LATRES_REF(adam_epsilon))},
      {"bn.momentum", double_field(LATRES_REF(bn_momentum))},
      {"bn.epsilon", double_field(LATRES_REF(bn_epsilon))},
      {"image_pct", double_field(LATRES_REF(image_pct))},
      {"video_pct", double_field(LATRES_REF(video_pct))},
      {"predict.low_conf_corners", size_field(LATRES_REF(low_conf_corners))},
      {"eval.split", string_field(LATRES_REF(eval_split))},
      {"eval.force", bool_field(LATRES_REF(eval_force))},
      {"baseline.feature_count", size_field(LATRES_REF(baseline.feature_count))},
      {"baseline.trees", size_field(LATRES_REF(baseline.trees))},
      {"baseline.max_features", size_field(LATRES_REF(baseline.max_features))},
      {"baseline.min_split", size_field(LATRES_REF(baseline.min_split))},
      {"baseline.nb_var_floor", double_field(LATRES_REF(baseline.nb_var_floor))},
      {"baseline.logreg_l2", double_field(LATRES_REF(baseline.logreg_l2))},
      {"baseline.logreg_tol", double_field(LATRES_REF(baseline.logreg_tol))},
      {"baseline.logreg_max_iter", size_field(LATRES_REF(baseline.logreg_max_iter))},
  };
  return fields;
}

#undef LATRES_REF

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& reg = registry();
  auto it = reg.find(key);
  if (it == reg.end()) throw UsageError("unknown config key '" + key + "'");
  it->second.set(*this, key, trim(value));
}

std::string RunConfig::get(const std::string& key) const {
  const auto& reg = registry();
  auto it = reg.find(key);
  if (it == reg.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : registry()) k.push_back(name);
    return k;
  }();
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("invalid config: " + what);
  };
  require(harris.kappa > 0.0 && harris.sigma > 0.0, "harris.kappa and harris.sigma must be > 0");
  require(nms.radius >= 1, "nms.radius must be >= 1");
  require(nms.rel_threshold >= 0.0 && nms.rel_threshold < 1.0, "nms.rel_threshold must be in [0,1)");
  require(nms.max_corners >= 1, "nms.max_corners must be >= 1");
  require(variants >= 1, "variants must be >= 1");
  require(frames_per_video >= 1, "video.frames must be >= 1");
  require(train_fraction > 0.0 && train_fraction < 1.0, "split.train_fraction must be in (0,1)");
  require(val_fraction >= 0.0 && val_fraction < 1.0, "split.val_fraction must be in [0,1)");
  require(optimizer == "auto" || optimizer == "adam" || optimizer == "sgd", "optimizer must be auto|adam|sgd");
  require(input_channels == 1, "input_channels: only single-channel luma input is supported");
  require(precision == "f32", "precision: training runs at f32");
  require(schedule.epochs >= 1 && schedule.batch0 >= 1, "train.epochs and train.batch0 must be >= 1");
  require(schedule.lr0 > 0.0, "train.lr0 must be > 0");
  require(schedule.lr_drop_factor >= 1.0, "train.lr_drop_factor must be >= 1");
  require(sgd_momentum >= 0.0 && sgd_momentum < 1.0, "sgd.momentum must be in [0,1)");
  require(sgd_weight_decay >= 0.0, "sgd.weight_decay must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          "adam betas must be in [0,1)");
  require(adam_epsilon > 0.0 && bn_epsilon > 0.0, "epsilons must be > 0");
  require(bn_momentum > 0.0 && bn_momentum <= 1.0, "bn.momentum must be in (0,1]");
  require(image_pct >= 0.0 && image_pct <= 100.0, "image_pct must be in [0,100]");
  require(video_pct >= 0.0 && video_pct <= 100.0, "video_pct must be in [0,100]");
  require(eval_split == "train" || eval_split == "val" || eval_split == "test",
          "eval.split must be train|val|test");
  require(baseline.feature_count >= 1 && baseline.trees >= 1 && baseline.max_features >= 1,
          "baseline counts must be >= 1");
  require(baseline.min_split >= 2, "baseline.min_split must be >= 2");
  require(baseline.nb_var_floor > 0.0, "baseline.nb_var_floor must be > 0");
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, field] : registry()) out[name] = field.get(*this);
  return out;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : to_map()) os << k << " = " << v << '\n';
  return os.str();
}

void RunConfig::merge_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  c.merge_text(text);
  return c;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  merge_text(os.str());
}

std::string RunConfig::resolved_optimizer() const {
  if (optimizer != "auto") return optimizer;
  return model == ModelKind::mask ? "sgd" : "adam";
}

}  // namespace latres

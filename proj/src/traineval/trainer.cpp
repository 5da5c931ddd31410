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

#include "traineval/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "models/model_io.hpp"
#include "numkernel/ops.hpp"
#include "numkernel/optim.hpp"
#include "synth/dataset.hpp"
#include "traineval/metrics.hpp"
#include "util/errors.hpp"
#include "util/text_io.hpp"

namespace latres::te {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kEvalBatch = 64;

template <typename T>
nk::Tensor<T> gather(const PatchSet& set, std::span<const std::size_t> idx) {
  const std::size_t side = set.patches.front().height();
  nk::Tensor<T> t({idx.size(), 1, side, side});
  T* out = t.raw();
  for (std::size_t i : idx)
    for (float v : set.patches[i].samples()) *out++ = static_cast<T>(v);
  return t;
}

template <typename T>
std::vector<double> predict_all(model::Network<T>& net, const PatchSet& set,
                                Task task, std::vector<int>* classes) {
  net.set_mode(nk::Mode::infer);
  std::vector<double> values;
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < set.size(); b += kEvalBatch) {
    idx.resize(std::min(kEvalBatch, set.size() - b));
    std::iota(idx.begin(), idx.end(), b);
    auto out = net.forward(gather<T>(set, idx), false);
    const std::size_t d = out.shape().c;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (task == Task::regression) {
        values.push_back(static_cast<double>(out[i * d]));
      } else {
        std::size_t best = 0;
        for (std::size_t c = 1; c < d; ++c)
          if (out[i * d + c] > out[i * d + best]) best = c;
        classes->push_back(static_cast<int>(best) + 1);
      }
    }
  }
  return values;
}

nk::OptimizerKind optimizer_kind(const std::string& name) {
  return name == "sgd" ? nk::OptimizerKind::sgd_momentum : nk::OptimizerKind::adam;
}

template <typename T>
TrainResult train_impl(const RunConfig& cfg, const PatchSet& train,
                       const PatchSet& val, const PatchSet& test,
                       const EpochCallback& on_epoch) {
  const Task task = task_of(cfg.model);
  model::Network<T> net(head_channels_of(cfg.model), cfg.input_channels);
  net.init(cfg.seed);
  net.set_bn_hyper(static_cast<T>(cfg.bn_momentum), static_cast<T>(cfg.bn_epsilon));

  nk::OptimizerState<T> opt;
  const std::string opt_name = cfg.resolved_optimizer();
  opt.kind = optimizer_kind(opt_name);
  opt.lr = static_cast<T>(cfg.schedule.lr0);
  opt.momentum = static_cast<T>(cfg.sgd_momentum);
  opt.weight_decay = static_cast<T>(cfg.sgd_weight_decay);
  opt.beta1 = static_cast<T>(cfg.adam_beta1);
  opt.beta2 = static_cast<T>(cfg.adam_beta2);
  opt.epsilon = static_cast<T>(cfg.adam_epsilon);

  TrainResult result{model::Network<float>(net.head_channels(), net.in_channels()), {}, 0, 0.0, 0, opt_name};
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double lr = cfg.schedule.lr0;
  double plateau_best = -std::numeric_limits<double>::infinity();
  double best_val = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::size_t stall = 0;
  auto params = net.parameters();

  for (std::size_t epoch = 0; epoch < cfg.schedule.epochs; ++epoch) {
    const std::size_t bs = cfg.schedule.batch_size(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    net.set_mode(nk::Mode::train);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t b = 0; b < order.size(); b += bs, ++batch_no) {
      std::span<const std::size_t> idx(order.data() + b, std::min(bs, order.size() - b));
      auto x = gather<T>(train, idx);
      auto out = net.forward(x, true);
      nk::LossResult<T> loss;
      if (task == Task::classification) {
        std::vector<int> labels;
        for (std::size_t i : idx) labels.push_back(static_cast<int>(std::lround(train.labels[i])));
        loss = nk::softmax_xent(out, std::span<const int>(labels));
      } else {
        nk::Tensor<T> target(out.shape());
        for (std::size_t i = 0; i < idx.size(); ++i) target[i] = static_cast<T>(train.labels[idx[i]]);
        loss = nk::mse_loss(out, target);
      }
      if (!std::isfinite(static_cast<double>(loss.loss)) || !loss.grad.all_finite())
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_no));
      net.zero_grad();
      net.backward(loss.grad, false);
      nk::optimizer_step(std::span<nk::Tensor<T>* const>(params), opt);
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(idx.size());
    }
    net.clear_cache();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.batch_size = bs;
    rec.lr = lr;
    rec.train_loss = train.empty() ? 0.0 : loss_sum / static_cast<double>(train.size());
    rec.train_metric = patch_metric(net, train, task);
    rec.val_metric = val.empty() ? rec.train_metric : patch_metric(net, val, task);
    rec.test_metric = test.empty() ? std::nan("") : patch_metric(net, test, task);
    result.curves.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const double v = std::isnan(rec.val_metric) ? -std::numeric_limits<double>::infinity()
                                                : rec.val_metric;
    if (!have_best || v > best_val) {
      have_best = true;
      best_val = v;
      result.best = net.template cast<float>();
      result.best_epoch = epoch;
    }
    if (v > plateau_best + cfg.schedule.plateau_min_delta) {
      plateau_best = v;
      stall = 0;
    } else if (++stall >= cfg.schedule.plateau_patience &&
               result.lr_drops < cfg.schedule.max_lr_drops) {
      lr /= cfg.schedule.lr_drop_factor;
      opt.lr = static_cast<T>(lr);
      ++result.lr_drops;
      stall = 0;
    }
  }
  if (!have_best) result.best = net.template cast<float>();
  result.best.set_mode(nk::Mode::infer);
  result.best_val = best_val;
  return result;
}

}  // namespace

PatchSet load_patch_set(const fs::path& shard) {
  PatchSet set;
  for (auto& p : synth::read_shard(shard)) {
    set.labels.push_back(p.label);
    set.patches.push_back(std::move(p.pixels));
  }
  return set;
}

template <typename T>
double patch_metric(model::Network<T>& net, const PatchSet& set, Task task) {
  if (set.empty()) return std::nan("");
  std::vector<int> classes;
  auto values = predict_all(net, set, task, &classes);
  if (task == Task::classification) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == static_cast<int>(std::lround(set.labels[i]))) ++hit;
    return static_cast<double>(hit) / static_cast<double>(set.size());
  }
  std::vector<double> targets(set.labels.begin(), set.labels.end());
  try {
    return r_squared(values, targets);
  } catch (const Error&) {
    return std::nan("");
  }
}

template double patch_metric(model::Network<float>&, const PatchSet&, Task);
template double patch_metric(model::Network<double>&, const PatchSet&, Task);

TrainResult train_network(const RunConfig& cfg, const PatchSet& train,
                          const PatchSet& val, const PatchSet& test,
                          const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw DataError("training set holds no patches");
  for (const auto* s : {&train, &val, &test})
    for (const auto& p : s->patches)
      if (p.height() != model::kPatchSize || p.width() != model::kPatchSize)
        throw DimensionError("training patch is " + img::dims(p.height(), p.width()) +
                             ", expected 64x64");
  if (cfg.precision == "f64") return train_impl<double>(cfg, train, val, test, on_epoch);
  return train_impl<float>(cfg, train, val, test, on_epoch);
}

void write_curves_csv(const fs::path& path, std::span<const EpochRecord> curves) {
  std::string out = "epoch,train_metric,test_metric,val_metric,lr,batch_size,train_loss\n";
  for (const auto& r : curves) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_metric) + "," +
           format_double(r.test_metric) + "," + format_double(r.val_metric) + "," +
           format_double(r.lr) + "," + std::to_string(r.batch_size) + "," +
           format_double(r.train_loss) + "\n";
  }
  write_text(path, out);
}

namespace {

nlohmann::ordered_json metric_json(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

TrainResult train_from_dataset(const RunConfig& cfg, const fs::path& dataset_dir,
                               const fs::path& out_dir, const EpochCallback& on_epoch) {
  cfg.validate();
  if (!fs::is_directory(dataset_dir))
    throw DataError("dataset directory " + dataset_dir.string() + " does not exist");
  const auto data_cfg = RunConfig::from_text(read_text(dataset_dir / synth::kConfigFile));
  if (data_cfg.mode != task_of(cfg.model))
    throw DataError("dataset " + dataset_dir.string() + " was synthesized for mode " +
                    to_string(data_cfg.mode) + " but model " + to_string(cfg.model) +
                    " needs mode " + to_string(task_of(cfg.model)));
  const auto train = load_patch_set(dataset_dir / synth::shard_file(synth::Split::train));
  const auto val = load_patch_set(dataset_dir / synth::shard_file(synth::Split::val));
  const auto test = load_patch_set(dataset_dir / synth::shard_file(synth::Split::test));

  fs::create_directories(out_dir);
  auto result = train_network(cfg, train, val, test, on_epoch);

  model::save_model(out_dir / kModelFile, result.best, cfg);
  write_curves_csv(out_dir / kCurvesFile, result.curves);
  write_text(out_dir / synth::kConfigFile, cfg.to_text());

  const Task task = task_of(cfg.model);
  nlohmann::ordered_json report;
  report["command"] = "train";
  report["model"] = to_string(cfg.model);
  report["optimizer"] = result.optimizer;
  report["metric"] = task == Task::classification ? "patch_accuracy" : "patch_r2";
  report["patches"] = {{"train", train.size()}, {"val", val.size()}, {"test", test.size()}};
  report["epochs"] = result.curves.size();
  report["best_epoch"] = result.best_epoch;
  report["best_val_metric"] = metric_json(result.best_val);
  report["lr_drops"] = result.lr_drops;
  report["best_test_metric"] = metric_json(patch_metric(result.best, test, task));
  report["config"] = cfg.to_map();
  write_text(out_dir / kReportFile, report.dump(2) + "\n");
  return result;
}

}  // namespace latres::te

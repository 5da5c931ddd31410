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

#include "models/model_io.hpp"

#include "util/errors.hpp"

namespace latres::model {

void save_model(const std::filesystem::path& path, const Network<float>& net,
                const RunConfig& cfg) {
  auto records = net.to_records();
  records.push_back(nk::make_text_record(kConfigRecord, cfg.to_text()));
  nk::write_checkpoint(path, records);
}

LoadedModel load_model(const std::filesystem::path& path) {
  const auto records = nk::read_checkpoint(path);
  RunConfig cfg;
  bool found = false;
  for (const auto& r : records) {
    if (r.name == kConfigRecord) {
      cfg = RunConfig::from_text(nk::record_text(r));
      found = true;
    }
  }
  if (!found) throw DataError(path.string() + ": checkpoint carries no config record");
  auto net = Network<float>::from_records(records);
  if (net.head_channels() != head_channels_of(cfg.model))
    throw DataError(path.string() + ": head has " + std::to_string(net.head_channels()) +
                    " channels but model kind " + to_string(cfg.model) + " expects " +
                    std::to_string(head_channels_of(cfg.model)));
  net.set_mode(nk::Mode::infer);
  return {std::move(net), std::move(cfg)};
}

}  // namespace latres::model

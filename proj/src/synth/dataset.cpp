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

#include "synth/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "imaging/image_io.hpp"
#include "util/text_io.hpp"

namespace latres::synth {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr char kShardMagic[5] = {'L', 'P', 'C', 'H', '1'};

void check_class(int cls) {
  if (cls < 1 || cls > 6) throw UsageError("class " + std::to_string(cls) + " outside 1..6");
}

void check_source(const img::Plane& p) {
  if (p.height() < kMinSourceHeight)
    throw DataError("source height " + std::to_string(p.height()) +
                    " is below the 1080 px minimum");
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& out, float f) { write_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t read_u32(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw DataError("patch shard truncated");
  const std::uint32_t v = bytes[pos] | (bytes[pos + 1] << 8) | (bytes[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
  pos += 4;
  return v;
}

}  // namespace

double class_factor(int cls) {
  check_class(cls);
  return static_cast<double>(kClassHeights[static_cast<std::size_t>(cls - 1)]) / 1080.0;
}

std::string class_name(int cls) {
  check_class(cls);
  return std::to_string(kClassHeights[static_cast<std::size_t>(cls - 1)]) + "p";
}

int nearest_class(std::size_t native_height) {
  if (native_height == 0) throw UsageError("nearest_class: height must be >= 1");
  int best = 1;
  long best_diff = -1;
  for (int c = 1; c <= 6; ++c) {
    const long diff = std::labs(static_cast<long>(native_height) - kClassHeights[static_cast<std::size_t>(c - 1)]);
    if (best_diff < 0 || diff <= best_diff) {
      best = c;
      best_diff = diff;
    }
  }
  return best;
}

std::string to_string(SourceKind kind) {
  return kind == SourceKind::image ? "image" : "video_frame";
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + s + "'");
}

float ManifestEntry::shard_label() const {
  return task == Task::classification ? static_cast<float>(label_class)
                                      : static_cast<float>(target);
}

std::string Manifest::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) {
    json j;
    j["id"] = e.id;
    j["source_path"] = e.source_path;
    j["kind"] = to_string(e.kind);
    j["video_id"] = e.video_id ? json(*e.video_id) : json(nullptr);
    j["factor"] = e.factor;
    j["task"] = to_string(e.task);
    if (e.task == Task::classification)
      j["label"] = e.label_class;
    else
      j["label"] = e.target;
    j["split"] = to_string(e.split);
    j["corner_count"] = e.corner_count;
    j["patch_count"] = e.patch_count;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Manifest Manifest::from_jsonl(const std::string& text) {
  Manifest m;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::uint32_t>();
      e.source_path = j.at("source_path").get<std::string>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind != "image" && kind != "video_frame") throw DataError("bad kind '" + kind + "'");
      e.kind = kind == "image" ? SourceKind::image : SourceKind::video_frame;
      if (!j.at("video_id").is_null()) e.video_id = j.at("video_id").get<std::string>();
      e.factor = j.at("factor").get<double>();
      e.task = parse_task(j.at("task").get<std::string>());
      if (e.task == Task::classification) {
        e.label_class = j.at("label").get<int>();
        e.target = e.factor;
      } else {
        e.target = j.at("label").get<double>();
        e.label_class = nearest_class(static_cast<std::size_t>(std::lround(e.target * 1080.0)));
      }
      e.split = parse_split(j.at("split").get<std::string>());
      e.corner_count = j.at("corner_count").get<std::size_t>();
      e.patch_count = j.at("patch_count").get<std::size_t>();
      m.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw DataError("manifest line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const Error& ex) {
      throw DataError("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return m;
}

void Manifest::write(const fs::path& path) const { write_text(path, to_jsonl()); }

Manifest Manifest::read(const fs::path& path) { return from_jsonl(read_text(path)); }

Variant make_class_variant(const img::Plane& source, int cls, img::ResampleMethod method) {
  check_source(source);
  const double k = class_factor(cls);
  return Variant{img::degrade(source, k, method), k, cls, k};
}

Variant make_reg_variant(const img::Plane& source, int a, img::ResampleMethod method) {
  check_source(source);
  if (a < 1 || a > 100) throw UsageError("regression level a=" + std::to_string(a) + " outside 1..100");
  const double k = static_cast<double>(a) / 100.0;
  return Variant{img::degrade(source, k, method), k, nearest_class(static_cast<std::size_t>(std::lround(k * 1080.0))), k};
}

std::vector<Split> split_corpus(std::size_t source_count, double fraction,
                                double val_fraction, std::uint64_t seed) {
  if (source_count < 2) throw DataError("split_corpus: need at least 2 sources, got " + std::to_string(source_count));
  std::vector<std::size_t> order(source_count);
  for (std::size_t i = 0; i < source_count; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(source_count)));
  n_train = std::clamp<std::size_t>(n_train, 1, source_count - 1);
  auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n_train)));
  if (n_val == 0 && val_fraction > 0.0 && n_train >= 3) n_val = 1;
  n_val = std::min(n_val, n_train - 1);

  std::vector<Split> out(source_count, Split::test);
  for (std::size_t i = 0; i < n_train; ++i) out[order[i]] = i < n_val ? Split::val : Split::train;
  return out;
}

std::vector<PatchRecord> extract_patches(const img::Plane& plane, const img::CornerSet& corners,
                                         std::size_t size) {
  std::vector<PatchRecord> out;
  const std::size_t half = size / 2;
  for (const auto& c : corners.points) {
    if (c.row < half || c.col < half || c.row + (size - half) > plane.height() ||
        c.col + (size - half) > plane.width())
      continue;
    PatchRecord r;
    r.pixels = plane.crop(c.row - half, c.col - half, size, size);
    r.row = c.row;
    r.col = c.col;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::size_t> select_frames(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (n == 0 || k == 0) return out;
  if (n <= k) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  if (k == 1) return {0};
  for (std::size_t i = 0; i < k; ++i) out.push_back(i * (n - 1) / (k - 1));
  return out;
}

VideoFrames ingest_video_paths(const fs::path& frame_dir, std::size_t frames) {
  if (!fs::is_directory(frame_dir)) throw DataError("not a frame directory: " + frame_dir.string());
  std::vector<fs::path> all;
  for (const auto& e : fs::directory_iterator(frame_dir))
    if (e.is_regular_file() && img::is_image_file(e.path())) all.push_back(e.path());
  if (all.empty()) throw DataError("frame directory has no PNG/JPEG frames: " + frame_dir.string());
  std::sort(all.begin(), all.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  VideoFrames v;
  v.video_id = frame_dir.filename().string();
  if (v.video_id.empty()) v.video_id = frame_dir.parent_path().filename().string();
  for (std::size_t i : select_frames(all.size(), frames)) v.frames.push_back(all[i]);
  return v;
}

Video ingest_video(const fs::path& frame_dir, std::size_t frames) {
  auto paths = ingest_video_paths(frame_dir, frames);
  Video v{paths.video_id, {}};
  for (const auto& p : paths.frames) v.frames.push_back(img::load_luma(p));
  return v;
}

std::vector<Source> scan_corpus(const fs::path& dir, std::size_t frames_per_video) {
  if (!fs::is_directory(dir)) throw DataError("corpus is not a directory: " + dir.string());
  std::vector<fs::path> images, videos;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && img::is_image_file(e.path()))
      images.push_back(e.path());
    else if (e.is_directory())
      videos.push_back(e.path());
  }
  auto by_name = [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  };
  std::sort(images.begin(), images.end(), by_name);
  std::sort(videos.begin(), videos.end(), by_name);
  std::vector<Source> out;
  for (const auto& p : images) out.push_back({p.filename().string(), SourceKind::image, {p}});
  for (const auto& d : videos) {
    auto v = ingest_video_paths(d, frames_per_video);
    out.push_back({v.video_id, SourceKind::video_frame, std::move(v.frames)});
  }
  return out;
}

ShardWriter::ShardWriter(const fs::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw DataError("cannot write patch shard " + path.string());
  out_.write(kShardMagic, sizeof(kShardMagic));
  write_u32(out_, 0);
}

ShardWriter::~ShardWriter() {
  try {
    close();
  } catch (...) {
  }
}

void ShardWriter::append(float label, const img::Plane& pixels) {
  if (!out_.is_open()) throw UsageError("patch shard already closed");
  if (pixels.height() != kPatchSize || pixels.width() != kPatchSize)
    throw DimensionError("patch shard expects 64x64 patches, got " +
                         img::dims(pixels.height(), pixels.width()));
  write_f32(out_, label);
  for (float v : pixels.samples()) write_f32(out_, v);
  ++count_;
}

void ShardWriter::close() {
  if (!out_.is_open()) return;
  out_.seekp(sizeof(kShardMagic));
  write_u32(out_, count_);
  out_.close();
  if (!out_) throw DataError("failed writing patch shard " + path_.string());
}

std::vector<ShardPatch> read_shard(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read patch shard " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kShardMagic, 5) != 0)
    throw DataError("patch shard missing LPCH1 magic: " + path.string());
  std::size_t pos = 5;
  const std::uint32_t count = read_u32(bytes, pos);
  const std::size_t record = 4 * (1 + kPatchSize * kPatchSize);
  if (bytes.size() != 9 + count * record)
    throw DataError("patch shard " + path.string() + " size does not match its count");
  std::vector<ShardPatch> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ShardPatch p;
    p.label = std::bit_cast<float>(read_u32(bytes, pos));
    std::vector<float> px(kPatchSize * kPatchSize);
    for (float& v : px) v = std::bit_cast<float>(read_u32(bytes, pos));
    p.pixels = img::Plane(kPatchSize, kPatchSize, std::move(px));
    out.push_back(std::move(p));
  }
  return out;
}

std::string shard_file(Split split) { return "patches_" + to_string(split) + ".lpch"; }

img::Plane render_entry(const ManifestEntry& entry, const img::Plane& source,
                        img::ResampleMethod method) {
  return img::degrade(source, entry.factor, method);
}

SynthSummary synthesize(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& out_dir) {
  cfg.validate();
  const auto sources = scan_corpus(corpus_dir, cfg.frames_per_video);
  if (sources.empty()) throw DataError("corpus " + corpus_dir.string() + " contains no images or frame directories");
  const auto splits = split_corpus(sources.size(), cfg.train_fraction, cfg.val_fraction, cfg.seed);

  fs::create_directories(out_dir);
  ShardWriter shards[3] = {ShardWriter(out_dir / shard_file(Split::train)),
                           ShardWriter(out_dir / shard_file(Split::val)),
                           ShardWriter(out_dir / shard_file(Split::test))};
  Manifest manifest;
  SynthSummary summary;
  summary.sources = sources.size();

  for (std::size_t si = 0; si < sources.size(); ++si) {
    const Source& src = sources[si];
    std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(si)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> level(1, 100);
    for (const fs::path& frame : src.frames) {
      const img::Plane plane = img::load_luma(frame);
      check_source(plane);
      const std::size_t n_variants = cfg.mode == Task::classification ? 6 : cfg.variants;
      for (std::size_t v = 0; v < n_variants; ++v) {
        Variant var = cfg.mode == Task::classification
                          ? make_class_variant(plane, static_cast<int>(v) + 1, cfg.resample)
                          : make_reg_variant(plane, level(rng), cfg.resample);
        ManifestEntry e;
        e.id = static_cast<std::uint32_t>(manifest.entries.size());
        e.source_path = frame.string();
        e.kind = src.kind;
        if (src.kind == SourceKind::video_frame) e.video_id = src.id;
        e.factor = var.factor;
        e.task = cfg.mode;
        e.label_class = var.label_class;
        e.target = var.target;
        e.split = splits[si];

        const auto corners = img::detect_corners(var.plane, cfg.harris, cfg.nms);
        e.corner_count = corners.size();
        auto patches = extract_patches(var.plane, corners);
        if (cfg.patches_per_image && patches.size() > cfg.patches_per_image)
          patches.resize(cfg.patches_per_image);
        e.patch_count = patches.size();
        const auto split_idx = static_cast<std::size_t>(e.split);
        for (const auto& p : patches) shards[split_idx].append(e.shard_label(), p.pixels);
        summary.patches[split_idx] += patches.size();
        manifest.entries.push_back(std::move(e));
      }
    }
  }
  for (auto& s : shards) s.close();
  manifest.write(out_dir / kManifestFile);
  write_text(out_dir / kConfigFile, cfg.to_text());
  summary.entries = manifest.entries.size();
  return summary;
}

}  // namespace latres::synth

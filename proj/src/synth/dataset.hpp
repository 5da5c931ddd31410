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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config/run_config.hpp"
#include "imaging/corners.hpp"
#include "imaging/plane.hpp"
#include "imaging/resample.hpp"

namespace latres::synth {

inline constexpr std::array<int, 6> kClassHeights{144, 240, 360, 480, 720, 1080};
inline constexpr std::size_t kMinSourceHeight = 1080;
inline constexpr std::size_t kPatchSize = 64;

// k = height/1080 for class 1..6.
double class_factor(int cls);
// "144p" .. "1080p"
std::string class_name(int cls);
// Class whose nominal height is closest; ties go to the larger class.
int nearest_class(std::size_t native_height);

enum class SourceKind { image, video_frame };
enum class Split { train, val, test };

std::string to_string(SourceKind kind);
std::string to_string(Split split);
Split parse_split(const std::string& s);

struct ManifestEntry {
  std::uint32_t id = 0;
  std::string source_path;
  SourceKind kind = SourceKind::image;
  std::optional<std::string> video_id;
  double factor = 1.0;
  Task task = Task::classification;
  int label_class = 6;  // classification label
  double target = 1.0;  // regression label, a/100
  Split split = Split::train;
  std::size_t corner_count = 0;
  std::size_t patch_count = 0;

  // Label as stored in patch shards.
  float shard_label() const;
  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::string to_jsonl() const;
  static Manifest from_jsonl(const std::string& text);
  void write(const std::filesystem::path& path) const;
  static Manifest read(const std::filesystem::path& path);
};

struct Variant {
  img::Plane plane;
  double factor = 1.0;
  int label_class = 6;
  double target = 1.0;
};

Variant make_class_variant(const img::Plane& source, int cls,
                           img::ResampleMethod method);
Variant make_reg_variant(const img::Plane& source, int a,
                         img::ResampleMethod method);

// Per-source assignment: round(fraction*n) sources go to train. Then
// round(val_fraction*n_train) of those (at least one when n_train >= 3 and
// val_fraction > 0) are held out as val.
std::vector<Split> split_corpus(std::size_t source_count, double fraction,
                                double val_fraction, std::uint64_t seed);

struct PatchRecord {
  img::Plane pixels;
  float label = 0.0f;
  std::uint32_t entry_id = 0;
  std::size_t row = 0;
  std::size_t col = 0;
};

// size×size crops centered at each corner (top-left = corner - size/2).
// Corners closer than size/2 to a border are skipped.
std::vector<PatchRecord> extract_patches(const img::Plane& plane,
                                         const img::CornerSet& corners,
                                         std::size_t size = kPatchSize);

// Indices of k frames spread uniformly over n (all of them when n <= k).
std::vector<std::size_t> select_frames(std::size_t n, std::size_t k);

struct VideoFrames {
  std::string video_id;
  std::vector<std::filesystem::path> frames;  // selected, filename order
};

VideoFrames ingest_video_paths(const std::filesystem::path& frame_dir,
                               std::size_t frames = 10);

struct Video {
  std::string video_id;
  std::vector<img::Plane> frames;
};
Video ingest_video(const std::filesystem::path& frame_dir,
                   std::size_t frames = 10);

struct Source {
  std::string id;
  SourceKind kind = SourceKind::image;
  std::vector<std::filesystem::path> frames;
};

// Image files directly in `dir` become image sources; each subdirectory is
// a video. Both sorted by name.
std::vector<Source> scan_corpus(const std::filesystem::path& dir,
                                std::size_t frames_per_video);

// "LPCH1" | u32 count | count × (f32 label | size*size f32 pixels), LE.
class ShardWriter {
 public:
  explicit ShardWriter(const std::filesystem::path& path);
  ~ShardWriter();
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  void append(float label, const img::Plane& pixels);
  void close();
  std::uint32_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint32_t count_ = 0;
};

struct ShardPatch {
  float label = 0.0f;
  img::Plane pixels;
};
std::vector<ShardPatch> read_shard(const std::filesystem::path& path);

struct SynthSummary {
  std::size_t sources = 0;
  std::size_t entries = 0;
  std::array<std::size_t, 3> patches{};  // train, val, test
};

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kConfigFile = "config.txt";
std::string shard_file(Split split);

// Builds a dataset directory: manifest.jsonl, patches_{train,val,test}.lpch
// and config.txt.
SynthSummary synthesize(const RunConfig& cfg,
                        const std::filesystem::path& corpus_dir,
                        const std::filesystem::path& out_dir);

// Re-creates the presented (degraded) plane of a manifest entry.
img::Plane render_entry(const ManifestEntry& entry, const img::Plane& source,
                        img::ResampleMethod method);

}  // namespace latres::synth
